#pragma once

#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ucw/kernel.hpp"
#include "ucw/mdp.hpp"

namespace ucw {

/// Result of one index computation. A pruned result carries the binary
/// search's upper bracket at the moment it fell below the caller's floor; the
/// true index is no larger than `value`.
struct IndexResult {
  double value = 0.0;
  bool pruned = false;
};

/// Memoizes (kernel, state) -> index with kernel entries rounded to four
/// decimal places. Stores only exact (non-pruned) results; a hit returns the
/// stored value bit-for-bit. Concurrent use is serialized by an internal lock.
class IndexMemoizer {
 public:
  std::optional<double> lookup(const TransitionKernel& kernel, int state);
  void store(const TransitionKernel& kernel, int state, double value);

  std::int64_t hits() const { return hits_; }
  std::int64_t misses() const { return misses_; }

  static std::string key_of(const TransitionKernel& kernel, int state);

 private:
  mutable std::mutex mutex_;
  std::unordered_map<std::string, double> table_;
  std::int64_t hits_ = 0;
  std::int64_t misses_ = 0;
};

struct WhittleOptions {
  double search_tol = 1e-4;   // stop when the bracket is narrower than this
  double gap_tol = 5e-4;      // and the measured Q-gap at the result is below this
  double vi_tol = 1e-9;
  int max_sweeps = 10000;
  std::optional<double> floor;     // early-termination bound (top-K pruning)
  IndexMemoizer* memoizer = nullptr;
  // When false the caller takes over storing results; lookups still happen.
  // Batch planners defer stores so thread scheduling cannot reorder them.
  bool memoizer_store = true;
};

/// Whittle index of one arm at `state`: the smallest penalty m at which
/// pulling and not pulling tie, located by binary search over
/// [-v_max - 1, v_max + 1] with warm-started value iteration per step.
/// Throws std::runtime_error if the Q-gap has the same sign at both interval
/// ends (a non-indexable instance).
IndexResult whittle_index(const TransitionKernel& kernel, const RewardTable& rewards,
                          int state, double gamma, const WhittleOptions& opts = {});

/// Per-arm, per-state index values for one kernel set.
struct WhittleTable {
  std::vector<std::vector<double>> indices;  // [arm][state]
  std::string source;

  int num_arms() const { return static_cast<int>(indices.size()); }
  double at(int arm, int state) const { return indices[arm][state]; }
};

/// Threshold policy: pull every arm whose current-state index reaches the
/// penalty. Not budget-limited.
std::vector<int> threshold_policy(const WhittleTable& table,
                                  const std::vector<int>& states, double penalty);

/// The K arms with the largest current-state indices, ties broken toward the
/// lowest arm id. Returned ids are sorted ascending.
std::vector<int> top_k_pull(const WhittleTable& table, const std::vector<int>& states,
                            int budget);

/// K-th largest current-state index (the next episode's penalty in the
/// learning loop).
double kth_largest_index(const WhittleTable& table, const std::vector<int>& states,
                         int budget);

/// Lazy top-K: indices are produced one arm at a time by `provider`, which
/// receives the floor (current K-th largest) once K candidates are banked so
/// the binary search can terminate early. The per-arm results are returned
/// alongside the selection; pruned entries hold upper bounds that are sound
/// for selection and for the K-th largest value but are not exact indices.
struct LazyTopK {
  std::vector<int> pulled;           // sorted ascending
  std::vector<IndexResult> entries;  // one per arm
};
using IndexProvider =
    std::function<IndexResult(int arm, std::optional<double> floor)>;
LazyTopK top_k_pull_lazy(const IndexProvider& provider, int num_arms, int budget,
                         bool prune = true);

}  // namespace ucw
