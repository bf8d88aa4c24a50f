#include "ucw/whittle.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace ucw {

namespace {

// Q(state, 1) - Q(state, 0) at penalty m, reusing the previous step's value
// function as the warm start.
double penalty_gap(const TransitionKernel& kernel, const RewardTable& rewards,
                   int state, double m, double gamma, const WhittleOptions& opts,
                   std::vector<double>& warm) {
  SolveOptions solve_opts;
  solve_opts.tol = opts.vi_tol;
  solve_opts.max_sweeps = opts.max_sweeps;
  solve_opts.warm_start = warm.empty() ? nullptr : &warm;
  PenalizedSolution sol = solve_penalized_mdp(kernel, rewards, m, gamma, solve_opts);
  warm = sol.v;
  return sol.q_at(state, 1, kernel.num_actions()) -
         sol.q_at(state, 0, kernel.num_actions());
}

}  // namespace

std::string IndexMemoizer::key_of(const TransitionKernel& kernel, int state) {
  std::string key;
  key.reserve(kernel.flat().size() * 2 + 6);
  auto push16 = [&key](int v) {
    key.push_back(static_cast<char>(v & 0xff));
    key.push_back(static_cast<char>((v >> 8) & 0xff));
  };
  push16(kernel.num_states());
  push16(kernel.num_actions());
  push16(state);
  for (double p : kernel.flat()) {
    push16(static_cast<int>(std::llround(p * 1e4)));  // four decimal places
  }
  return key;
}

std::optional<double> IndexMemoizer::lookup(const TransitionKernel& kernel, int state) {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = table_.find(key_of(kernel, state));
  if (it == table_.end()) {
    ++misses_;
    return std::nullopt;
  }
  ++hits_;
  return it->second;
}

void IndexMemoizer::store(const TransitionKernel& kernel, int state, double value) {
  std::lock_guard<std::mutex> lock(mutex_);
  table_.emplace(key_of(kernel, state), value);
}

IndexResult whittle_index(const TransitionKernel& kernel, const RewardTable& rewards,
                          int state, double gamma, const WhittleOptions& opts) {
  if (kernel.num_actions() != 2) {
    throw std::invalid_argument("whittle_index: binary actions required");
  }
  if (state < 0 || state >= kernel.num_states()) {
    throw std::invalid_argument("whittle_index: state out of range");
  }
  if (!(opts.search_tol > 0.0)) {
    throw std::invalid_argument("whittle_index: search tolerance must be positive");
  }
  if (opts.memoizer != nullptr) {
    if (auto cached = opts.memoizer->lookup(kernel, state)) {
      return {*cached, false};
    }
  }

  const double v_max = rewards.v_max(gamma);
  double lo = -v_max - 1.0;
  double hi = v_max + 1.0;
  if (opts.floor && hi < *opts.floor) {
    return {hi, true};  // whole interval is below the floor
  }

  std::vector<double> warm;
  const double gap_lo = penalty_gap(kernel, rewards, state, lo, gamma, opts, warm);
  const double gap_hi = penalty_gap(kernel, rewards, state, hi, gamma, opts, warm);
  if (gap_lo < 0.0 || gap_hi > 0.0) {
    throw std::runtime_error(
        "whittle_index: Q-gap has the same sign at both interval ends (gap(" +
        std::to_string(lo) + ")=" + std::to_string(gap_lo) + ", gap(" +
        std::to_string(hi) + ")=" + std::to_string(gap_hi) + ")");
  }

  double best_m = 0.0;
  double best_gap = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 200; ++iter) {
    if (opts.floor && hi < *opts.floor) {
      return {hi, true};
    }
    if (hi - lo < opts.search_tol && best_gap <= opts.gap_tol) break;
    const double mid = 0.5 * (lo + hi);
    const double gap = penalty_gap(kernel, rewards, state, mid, gamma, opts, warm);
    if (std::abs(gap) <= best_gap) {  // prefer later mids: they sit in the bracket
      best_gap = std::abs(gap);
      best_m = mid;
    }
    if (gap >= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (best_gap > opts.gap_tol) {
    throw ConvergenceError("whittle_index: indifference gap did not close", best_gap);
  }
  if (opts.memoizer != nullptr && opts.memoizer_store) {
    opts.memoizer->store(kernel, state, best_m);
  }
  return {best_m, false};
}

std::vector<int> threshold_policy(const WhittleTable& table,
                                  const std::vector<int>& states, double penalty) {
  if (states.size() != table.indices.size()) {
    throw std::invalid_argument("threshold_policy: one state per arm required");
  }
  std::vector<int> actions(states.size());
  for (size_t i = 0; i < states.size(); ++i) {
    actions[i] = table.indices[i].at(states[i]) >= penalty ? 1 : 0;
  }
  return actions;
}

std::vector<int> top_k_pull(const WhittleTable& table, const std::vector<int>& states,
                            int budget) {
  const int n = table.num_arms();
  LazyTopK result = top_k_pull_lazy(
      [&](int arm, std::optional<double>) {
        return IndexResult{table.indices[arm].at(states[arm]), false};
      },
      n, budget, /*prune=*/false);
  return result.pulled;
}

double kth_largest_index(const WhittleTable& table, const std::vector<int>& states,
                         int budget) {
  const int n = table.num_arms();
  if (budget < 1 || budget > n) {
    throw std::invalid_argument("kth_largest_index: budget out of range");
  }
  std::vector<double> values(n);
  for (int i = 0; i < n; ++i) values[i] = table.indices[i].at(states[i]);
  std::nth_element(values.begin(), values.begin() + (budget - 1), values.end(),
                   std::greater<>());
  return values[budget - 1];
}

LazyTopK top_k_pull_lazy(const IndexProvider& provider, int num_arms, int budget,
                         bool prune) {
  LazyTopK out;
  out.entries.resize(num_arms);
  if (budget <= 0) return out;

  struct Entry {
    double value;
    int arm;
  };
  // Weakest incumbent on top: smallest value; among equals, the largest id.
  auto weaker = [](const Entry& a, const Entry& b) {
    if (a.value != b.value) return a.value > b.value;
    return a.arm < b.arm;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(weaker)> heap(weaker);

  for (int arm = 0; arm < num_arms; ++arm) {
    std::optional<double> floor;
    if (prune && static_cast<int>(heap.size()) == budget) {
      floor = heap.top().value;
    }
    IndexResult res = provider(arm, floor);
    out.entries[arm] = res;
    if (res.pruned) continue;  // upper bound below the K-th largest seen so far
    if (static_cast<int>(heap.size()) < budget) {
      heap.push({res.value, arm});
    } else if (res.value > heap.top().value) {
      heap.pop();
      heap.push({res.value, arm});
    }
  }
  while (!heap.empty()) {
    out.pulled.push_back(heap.top().arm);
    heap.pop();
  }
  std::sort(out.pulled.begin(), out.pulled.end());
  return out;
}

}  // namespace ucw
