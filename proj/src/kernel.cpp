#include "ucw/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ucw {

namespace {
constexpr double kRowSumTol = 1e-9;
constexpr double kEntryTol = 1e-12;
}  // namespace

TransitionKernel::TransitionKernel(int num_states, int num_actions,
                                   std::vector<double> probs)
    : num_states_(num_states), num_actions_(num_actions), probs_(std::move(probs)) {
  if (num_states_ <= 0 || num_actions_ <= 0) {
    throw std::invalid_argument("TransitionKernel: state/action counts must be positive");
  }
  if (probs_.size() != static_cast<size_t>(num_states_) * num_actions_ * num_states_) {
    throw std::invalid_argument("TransitionKernel: probability array has wrong size");
  }
  validate();
}

TransitionKernel TransitionKernel::from_good_probs(double p0_pass, double p0_act,
                                                   double p1_pass, double p1_act) {
  // Layout: (s, a, s') with s'=1 the good state.
  std::vector<double> p = {
      1.0 - p0_pass, p0_pass,   // s=0, a=0
      1.0 - p0_act,  p0_act,    // s=0, a=1
      1.0 - p1_pass, p1_pass,   // s=1, a=0
      1.0 - p1_act,  p1_act,    // s=1, a=1
  };
  return TransitionKernel(2, 2, std::move(p));
}

void TransitionKernel::set_row(int s, int a, std::span<const double> row) {
  if (row.size() != static_cast<size_t>(num_states_)) {
    throw std::invalid_argument("TransitionKernel::set_row: wrong row length");
  }
  std::copy(row.begin(), row.end(), probs_.begin() + index(s, a, 0));
}

void TransitionKernel::validate() const {
  for (double v : probs_) {
    if (!std::isfinite(v) || v < -kEntryTol || v > 1.0 + kEntryTol) {
      throw std::invalid_argument("TransitionKernel: entry outside [0, 1]");
    }
  }
  for (int s = 0; s < num_states_; ++s) {
    for (int a = 0; a < num_actions_; ++a) {
      auto r = row(s, a);
      double sum = std::accumulate(r.begin(), r.end(), 0.0);
      if (std::abs(sum - 1.0) > kRowSumTol) {
        throw std::invalid_argument("TransitionKernel: row (" + std::to_string(s) +
                                    "," + std::to_string(a) + ") sums to " +
                                    std::to_string(sum));
      }
    }
  }
}

RewardTable::RewardTable(int num_states, int num_actions, std::vector<double> values)
    : num_states_(num_states), num_actions_(num_actions), values_(std::move(values)) {
  if (num_states_ <= 0 || num_actions_ <= 0) {
    throw std::invalid_argument("RewardTable: state/action counts must be positive");
  }
  if (values_.size() != static_cast<size_t>(num_states_) * num_actions_) {
    throw std::invalid_argument("RewardTable: value array has wrong size");
  }
  r_max_ = 0.0;
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("RewardTable: non-finite reward");
    }
    r_max_ = std::max(r_max_, std::abs(v));
  }
}

RewardTable RewardTable::state_value(int num_states, int num_actions) {
  std::vector<double> values(static_cast<size_t>(num_states) * num_actions);
  for (int s = 0; s < num_states; ++s) {
    for (int a = 0; a < num_actions; ++a) {
      values[static_cast<size_t>(s) * num_actions + a] = static_cast<double>(s);
    }
  }
  return RewardTable(num_states, num_actions, std::move(values));
}

}  // namespace ucw
