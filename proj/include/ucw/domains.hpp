#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ucw/kernel.hpp"

namespace ucw {

/// A restless-bandit instance: per-arm true kernels, the shared reward table,
/// fixed initial states, and the pull budget.
struct RmabInstance {
  std::vector<TransitionKernel> kernels;
  RewardTable rewards;
  std::vector<int> initial_states;
  int budget = 1;

  int num_arms() const { return static_cast<int>(kernels.size()); }
};

/// Synthetic binary-state instance with good-state transition probabilities
/// uniform on [0, 1], repaired so acting always helps and starting in the good
/// state always helps.
RmabInstance generate_wide(int num_arms, std::uint64_t rng_seed);

/// As generate_wide but every good-state transition probability is confined
/// to [0.2, 0.4] (so bad-state complements lie in [0.6, 0.8]).
RmabInstance generate_thin(int num_arms, std::uint64_t rng_seed);

/// How load_dataset treats malformed rows.
enum class DatasetMode { kStrict, kLenient };

/// Builds an instance by sampling rows (with replacement) from a dataset CSV
/// with header p0_pass,p0_act,p1_pass,p1_act. Malformed rows abort in strict
/// mode and are skipped with a log line in lenient mode.
RmabInstance load_dataset(const std::string& path, int num_arms,
                          std::uint64_t rng_seed,
                          DatasetMode mode = DatasetMode::kStrict);

/// Writes the instance's kernels as a dataset CSV (one row per arm, same
/// schema that load_dataset reads).
void save_dataset(const RmabInstance& instance, const std::string& path);

/// The four good-state probabilities of one arm, in dataset column order.
struct DatasetRow {
  double p0_pass;
  double p0_act;
  double p1_pass;
  double p1_act;
};

/// Parses a dataset CSV; used by load_dataset and by round-trip checks.
std::vector<DatasetRow> read_dataset_rows(const std::string& path, DatasetMode mode);

/// True when the binary-domain validity constraints hold: acting never lowers
/// the chance of the good state, and the good state never lowers it either.
bool satisfies_validity_constraints(const TransitionKernel& kernel);

}  // namespace ucw
