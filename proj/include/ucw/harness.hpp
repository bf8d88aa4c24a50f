#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ucw/domains.hpp"

namespace ucw {

struct ExperimentConfig {
  std::string domain = "wide";  // wide | thin | dataset
  std::string dataset_path;
  int arms = 8;
  int budget = 3;
  int horizon = 20;
  int episodes = 40;
  double gamma = 0.9;
  double delta = 0.05;
  std::vector<std::uint64_t> seeds = default_seeds();
  double smoothing = 0.9;
  std::vector<std::string> algorithms = {"ucw-value", "ucw-penalty", "extreme",
                                         "wiql",      "random",      "oracle"};
  std::string out_dir = "out";
  bool serial_timing = false;   // run (seed x algorithm) jobs one at a time
  bool fix_population = false;  // reuse the first seed's instance everywhere
  bool parallel = true;

  static std::vector<std::uint64_t> default_seeds();
  void validate() const;
};

/// One learner's realized episode rewards and regret against the oracle, per
/// seed. Cumulative regret is smoothed with the configured weight.
struct AlgoCurve {
  std::string algo;
  // Indexed [seed][episode].
  std::vector<std::vector<double>> reward;
  std::vector<std::vector<double>> oracle_reward;
  std::vector<std::vector<double>> regret;
  std::vector<std::vector<double>> smoothed_cum_regret;
  std::vector<double> seconds;  // wall time per seed
};

struct SummaryRow {
  int episode;
  std::string algo;
  double mean;    // mean cumulative regret across seeds
  double stderr_; // sample standard error of the same
};

struct ExperimentResult {
  std::vector<AlgoCurve> curves;  // one per requested algorithm
  std::vector<SummaryRow> summary;
  std::vector<std::string> failures;  // "(algo, seed): what" entries
};

/// Runs every requested algorithm on identical instances, initial states, and
/// environment randomness, with the oracle as the regret reference. Failing
/// (algorithm, seed) runs are recorded and excluded from aggregates.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes regret_<algo>.csv, summary.csv, runtime.csv, budget_table.csv and
/// ergodicity.txt into the directory (created if missing).
void write_outputs(const ExperimentResult& result, const ExperimentConfig& config);

/// Exponential smoothing: out[0] = in[0], out[k] = w*out[k-1] + (1-w)*in[k].
std::vector<double> smooth(const std::vector<double>& series, double weight);

struct BudgetRow {
  int budget;
  double optimal;  // sum of the top-K indices
  double random;   // K * mean index
  double gap;      // (optimal - random) / K
};

/// Expected-reward table for every budget level, from a descending index list.
std::vector<BudgetRow> budget_impact_table(const std::vector<double>& sorted_indices);

struct ErgodicityReport {
  double omega2 = 0.0;      // worst second-eigenvalue magnitude over policies
  double r = 0.0;           // minimum stationary probability of that chain
  double epsilon = 0.0;     // r / 2
  double h_required = 0.0;  // log_omega2(sqrt(2) * epsilon^(3/2))
  bool ergodic = true;
  bool mixes_in_one_step = false;

  std::string to_text(std::optional<int> configured_horizon) const;
};

/// Closed-form mixing diagnostic for binary-state instances: enumerates all
/// deterministic per-arm policies and reports the horizon needed for the
/// ergodicity assumption to hold. A chain with |second eigenvalue| = 1 sets
/// ergodic=false and produces no horizon bound.
ErgodicityReport ergodicity_diagnostic(const RmabInstance& instance,
                                       std::optional<double> epsilon_override = {});

/// The instance a given seed runs on (honors fix_population).
RmabInstance make_instance(const ExperimentConfig& config, std::uint64_t seed);

/// Environment randomness, one stream per (arm, episode, step): the same
/// uniform draw is consumed whatever action the learner picked.
double env_uniform(std::uint64_t seed, int arm, int episode, int step);

/// Inverse-CDF sample of the next state from P(s, a, .) at quantile u.
int sample_next_state(const TransitionKernel& kernel, int s, int a, double u);

}  // namespace ucw
