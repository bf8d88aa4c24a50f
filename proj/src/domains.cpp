#include "ucw/domains.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

namespace ucw {

namespace {

constexpr int kGood = 1;

struct GoodProbs {
  // p[s][a] = probability of reaching the good state from s under a.
  double p[2][2];
};

// Enforces the two validity constraints by multiplicative shrinking, fixing
// p(1,1) and repairing in an order that cannot reintroduce a violation:
//   p(1,0) <= p(1,1), p(0,1) <= p(1,1), p(0,0) <= min(p(0,1), p(1,0)).
// In the thin-margin domain the shrunk value must stay above `floor`; the
// noise is redrawn up to 100 times before clamping to the floor.
void repair(GoodProbs& g, std::mt19937_64& rng, double floor) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto shrink = [&](double upper, double current) {
    if (current <= upper) return current;
    for (int attempt = 0; attempt < 100; ++attempt) {
      const double candidate = upper * unif(rng);
      if (candidate >= floor) return candidate;
    }
    return floor;
  };
  g.p[1][0] = shrink(g.p[1][1], g.p[1][0]);  // acting helps in the good state
  g.p[0][1] = shrink(g.p[1][1], g.p[0][1]);  // good start helps when acting
  g.p[0][0] = shrink(g.p[0][1], g.p[0][0]);  // acting helps in the bad state
  g.p[0][0] = shrink(g.p[1][0], g.p[0][0]);  // good start helps when passive
}

RmabInstance generate(int num_arms, std::uint64_t rng_seed, double lo, double hi,
                      double floor) {
  if (num_arms < 0) {
    throw std::invalid_argument("generate: num_arms must be nonnegative");
  }
  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> unif(lo, hi);

  std::vector<TransitionKernel> kernels;
  kernels.reserve(num_arms);
  for (int i = 0; i < num_arms; ++i) {
    GoodProbs g;
    for (int s = 0; s < 2; ++s) {
      for (int a = 0; a < 2; ++a) g.p[s][a] = unif(rng);
    }
    repair(g, rng, floor);
    kernels.push_back(TransitionKernel::from_good_probs(g.p[0][0], g.p[0][1],
                                                        g.p[1][0], g.p[1][1]));
  }

  std::vector<int> initial_states(num_arms);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int i = 0; i < num_arms; ++i) initial_states[i] = coin(rng);

  return RmabInstance{std::move(kernels), RewardTable::state_value(2, 2),
                      std::move(initial_states), 1};
}

}  // namespace

RmabInstance generate_wide(int num_arms, std::uint64_t rng_seed) {
  return generate(num_arms, rng_seed, 0.0, 1.0, 0.0);
}

RmabInstance generate_thin(int num_arms, std::uint64_t rng_seed) {
  return generate(num_arms, rng_seed, 0.2, 0.4, 0.2);
}

bool satisfies_validity_constraints(const TransitionKernel& kernel) {
  if (kernel.num_states() != 2 || kernel.num_actions() != 2) return false;
  for (int s = 0; s < 2; ++s) {
    if (kernel.p(s, 1, kGood) < kernel.p(s, 0, kGood)) return false;
  }
  for (int a = 0; a < 2; ++a) {
    if (kernel.p(1, a, kGood) < kernel.p(0, a, kGood)) return false;
  }
  return true;
}

namespace {

bool parse_double(const std::string& field, double& out) {
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

std::vector<DatasetRow> read_dataset_rows(const std::string& path, DatasetMode mode) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("dataset file not found: " + path);
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("dataset file is empty: " + path);
  }
  if (line != "p0_pass,p0_act,p1_pass,p1_act") {
    throw std::runtime_error("dataset header mismatch in " + path + ": " + line);
  }

  std::vector<DatasetRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);

    std::string error;
    DatasetRow row{};
    if (fields.size() != 4) {
      error = "expected 4 columns, got " + std::to_string(fields.size());
    } else {
      double values[4];
      for (int c = 0; c < 4 && error.empty(); ++c) {
        if (!parse_double(fields[c], values[c])) {
          error = "unparseable value '" + fields[c] + "'";
        } else if (!(values[c] >= 0.0 && values[c] <= 1.0)) {
          error = "value " + fields[c] + " outside [0, 1]";
        }
      }
      if (error.empty()) {
        row = DatasetRow{values[0], values[1], values[2], values[3]};
        if (row.p0_act < row.p0_pass || row.p1_act < row.p1_pass ||
            row.p1_pass < row.p0_pass || row.p1_act < row.p0_act) {
          error = "validity constraints violated";
        }
      }
    }
    if (!error.empty()) {
      const std::string message =
          path + ":" + std::to_string(line_no) + ": " + error;
      if (mode == DatasetMode::kStrict) {
        throw std::runtime_error("dataset error at " + message);
      }
      std::cerr << "skipping dataset row at " << message << "\n";
      continue;
    }
    rows.push_back(row);
  }
  return rows;
}

RmabInstance load_dataset(const std::string& path, int num_arms,
                          std::uint64_t rng_seed, DatasetMode mode) {
  const std::vector<DatasetRow> rows = read_dataset_rows(path, mode);
  if (rows.empty()) {
    throw std::runtime_error("dataset has no usable rows: " + path);
  }
  std::mt19937_64 rng(rng_seed);
  std::uniform_int_distribution<size_t> pick(0, rows.size() - 1);

  std::vector<TransitionKernel> kernels;
  kernels.reserve(num_arms);
  for (int i = 0; i < num_arms; ++i) {
    const DatasetRow& row = rows[pick(rng)];
    kernels.push_back(TransitionKernel::from_good_probs(row.p0_pass, row.p0_act,
                                                        row.p1_pass, row.p1_act));
  }
  std::vector<int> initial_states(num_arms);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int i = 0; i < num_arms; ++i) initial_states[i] = coin(rng);

  return RmabInstance{std::move(kernels), RewardTable::state_value(2, 2),
                      std::move(initial_states), 1};
}

void save_dataset(const RmabInstance& instance, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path);
  }
  out << "p0_pass,p0_act,p1_pass,p1_act\n";
  char buffer[128];
  for (const TransitionKernel& kernel : instance.kernels) {
    if (kernel.num_states() != 2 || kernel.num_actions() != 2) {
      throw std::invalid_argument("save_dataset: binary domains only");
    }
    const double values[4] = {kernel.p(0, 0, kGood), kernel.p(0, 1, kGood),
                              kernel.p(1, 0, kGood), kernel.p(1, 1, kGood)};
    for (int c = 0; c < 4; ++c) {
      auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), values[c]);
      out.write(buffer, ptr - buffer);
      out.put(c == 3 ? '\n' : ',');
    }
  }
}

}  // namespace ucw
