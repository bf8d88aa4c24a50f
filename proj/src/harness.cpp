#include "ucw/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "ucw/csv.hpp"
#include "ucw/learners.hpp"
#include "ucw/whittle.hpp"

namespace ucw {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::vector<std::uint64_t> ExperimentConfig::default_seeds() {
  std::vector<std::uint64_t> seeds(30);
  std::iota(seeds.begin(), seeds.end(), 0);
  return seeds;
}

void ExperimentConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("config: gamma must lie in (0, 1)");
  }
  if (horizon < 1) throw std::invalid_argument("config: horizon must be >= 1");
  if (episodes < 1) throw std::invalid_argument("config: episodes must be >= 1");
  if (arms < 1) throw std::invalid_argument("config: arms must be >= 1");
  if (budget < 1 || budget > arms) {
    throw std::invalid_argument("config: budget must lie in [1, arms]");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("config: delta must lie in (0, 1)");
  }
  if (!(smoothing >= 0.0 && smoothing < 1.0)) {
    throw std::invalid_argument("config: smoothing must lie in [0, 1)");
  }
  if (seeds.empty()) throw std::invalid_argument("config: at least one seed");
  if (algorithms.empty()) throw std::invalid_argument("config: at least one algorithm");
  for (const std::string& algo : algorithms) {
    learner_ordinal(algo);  // throws on unknown names
  }
  if (domain != "wide" && domain != "thin" && domain != "dataset") {
    throw std::invalid_argument("config: unknown domain '" + domain + "'");
  }
  if (domain == "dataset" && dataset_path.empty()) {
    throw std::invalid_argument("config: dataset domain requires dataset_path");
  }
}

double env_uniform(std::uint64_t seed, int arm, int episode, int step) {
  std::uint64_t x = splitmix64(seed ^ 0x2545f4914f6cdd1dULL);
  x = splitmix64(x ^ (static_cast<std::uint64_t>(arm) + 1) * 0xd6e8feb86659fd93ULL);
  x = splitmix64(x ^ static_cast<std::uint64_t>(episode) * 0xa0761d6478bd642fULL);
  x = splitmix64(x ^ static_cast<std::uint64_t>(step) * 0xe7037ed1a0b428dbULL);
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

int sample_next_state(const TransitionKernel& kernel, int s, int a, double u) {
  auto row = kernel.row(s, a);
  double cum = 0.0;
  for (int s2 = 0; s2 < kernel.num_states(); ++s2) {
    cum += row[s2];
    if (u < cum) return s2;
  }
  return kernel.num_states() - 1;
}

RmabInstance make_instance(const ExperimentConfig& config, std::uint64_t seed) {
  const std::uint64_t instance_seed = config.fix_population ? config.seeds.front() : seed;
  RmabInstance instance =
      config.domain == "wide"   ? generate_wide(config.arms, instance_seed)
      : config.domain == "thin" ? generate_thin(config.arms, instance_seed)
                                : load_dataset(config.dataset_path, config.arms,
                                               instance_seed);
  instance.budget = config.budget;
  return instance;
}

std::vector<double> smooth(const std::vector<double>& series, double weight) {
  if (!(weight >= 0.0 && weight < 1.0)) {
    throw std::invalid_argument("smooth: weight must lie in [0, 1)");
  }
  std::vector<double> out(series.size());
  for (size_t k = 0; k < series.size(); ++k) {
    out[k] = k == 0 ? series[0] : weight * out[k - 1] + (1.0 - weight) * series[k];
  }
  return out;
}

std::vector<BudgetRow> budget_impact_table(const std::vector<double>& sorted_indices) {
  if (!std::is_sorted(sorted_indices.begin(), sorted_indices.end(),
                      std::greater<>())) {
    throw std::invalid_argument("budget_impact_table: indices must be descending");
  }
  const int n = static_cast<int>(sorted_indices.size());
  const double mean =
      n == 0 ? 0.0
             : std::accumulate(sorted_indices.begin(), sorted_indices.end(), 0.0) / n;
  std::vector<BudgetRow> rows;
  rows.reserve(n);
  double top_sum = 0.0;
  for (int k = 1; k <= n; ++k) {
    top_sum += sorted_indices[k - 1];
    const double random = k * mean;
    rows.push_back(BudgetRow{k, top_sum, random, (top_sum - random) / k});
  }
  return rows;
}

ErgodicityReport ergodicity_diagnostic(const RmabInstance& instance,
                                       std::optional<double> epsilon_override) {
  if (instance.num_arms() == 0) {
    throw std::invalid_argument("ergodicity_diagnostic: empty instance");
  }
  for (const TransitionKernel& kernel : instance.kernels) {
    if (kernel.num_states() != 2 || kernel.num_actions() != 2) {
      throw std::invalid_argument("ergodicity_diagnostic: binary-state instances only");
    }
  }

  // 2-state chain under a deterministic policy (a0, a1): the second
  // eigenvalue is 1 - p01 - p10 and the stationary distribution is
  // (p10, p01) / (p01 + p10).
  ErgodicityReport report;
  report.omega2 = -1.0;
  double worst_r = 1.0;
  for (const TransitionKernel& kernel : instance.kernels) {
    for (int a0 = 0; a0 < 2; ++a0) {
      for (int a1 = 0; a1 < 2; ++a1) {
        const double p01 = kernel.p(0, a0, 1);
        const double p10 = kernel.p(1, a1, 0);
        const double sigma2 = std::abs(1.0 - p01 - p10);
        double r_chain = 0.0;
        if (p01 + p10 > 0.0) {
          r_chain = std::min(p10, p01) / (p01 + p10);
        }
        if (sigma2 > report.omega2 + 1e-12) {
          report.omega2 = sigma2;
          worst_r = r_chain;
        } else if (sigma2 > report.omega2 - 1e-12) {
          worst_r = std::min(worst_r, r_chain);  // worst case among ties
        }
      }
    }
  }

  if (report.omega2 >= 1.0 - 1e-12) {
    report.ergodic = false;
    report.omega2 = 1.0;
    report.r = 0.0;
    report.epsilon = 0.0;
    report.h_required = std::numeric_limits<double>::quiet_NaN();
    return report;
  }

  report.r = worst_r;
  report.epsilon = epsilon_override.value_or(worst_r / 2.0);
  if (report.omega2 <= 0.0) {
    report.mixes_in_one_step = true;
    report.h_required = 1.0;
  } else {
    report.h_required = std::log(std::sqrt(2.0) * std::pow(report.epsilon, 1.5)) /
                        std::log(report.omega2);
  }
  return report;
}

std::string ErgodicityReport::to_text(std::optional<int> configured_horizon) const {
  std::ostringstream out;
  if (!ergodic) {
    out << "non-ergodic: some deterministic policy induces a chain with "
           "|second eigenvalue| = 1; no horizon bound produced\n";
    return out.str();
  }
  out << "omega2 = " << format_double(omega2) << "\n";
  out << "min stationary probability r = " << format_double(r) << "\n";
  out << "epsilon = " << format_double(epsilon) << "\n";
  out << "H_required = " << format_double(h_required) << "\n";
  if (mixes_in_one_step) {
    out << "mixes in one step (second eigenvalue 0)\n";
  }
  if (configured_horizon) {
    if (static_cast<double>(*configured_horizon) < h_required) {
      out << "WARNING: configured horizon H = " << *configured_horizon
          << " is below H_required\n";
    } else {
      out << "configured horizon H = " << *configured_horizon << " is sufficient\n";
    }
  }
  return out.str();
}

namespace {

struct RunOutput {
  std::vector<std::vector<double>> reward;  // [seed][episode]
  std::vector<double> seconds;              // [seed]
  std::vector<char> failed;                 // [seed]
};

// One (algorithm, seed) run: T episodes of H steps against the true kernels,
// common random numbers shared across algorithms.
std::vector<double> run_one(const ExperimentConfig& config, const std::string& algo,
                            std::uint64_t seed) {
  const RmabInstance instance = make_instance(config, seed);
  LearnerContext ctx;
  ctx.instance = &instance;
  ctx.horizon = config.horizon;
  ctx.gamma = config.gamma;
  ctx.delta = config.delta;
  ctx.seed = splitmix64(seed ^ static_cast<std::uint64_t>(learner_ordinal(algo)) *
                                   0x9e3779b97f4a7c15ULL);
  ctx.parallel = config.parallel && !config.serial_timing;
  std::unique_ptr<Learner> learner = make_learner(algo, ctx);

  const int n = instance.num_arms();
  std::vector<double> episode_rewards(config.episodes, 0.0);
  std::vector<int> states;
  std::vector<StepRecord> records(n);
  for (int t = 1; t <= config.episodes; ++t) {
    learner->begin_episode(instance.initial_states, t);
    states = instance.initial_states;
    double ep_reward = 0.0;
    double discount = 1.0;
    for (int h = 1; h <= config.horizon; ++h) {
      const ActionSet actions = learner->act(states);
      if (static_cast<int>(actions.pulled.size()) > instance.budget) {
        throw std::logic_error(algo + ": budget exceeded");
      }
      std::vector<char> pulled(n, 0);
      for (int arm : actions.pulled) {
        if (arm < 0 || arm >= n || pulled[arm]) {
          throw std::logic_error(algo + ": malformed action set");
        }
        pulled[arm] = 1;
      }
      for (int i = 0; i < n; ++i) {
        const int a = pulled[i] ? 1 : 0;
        const double reward = instance.rewards.r(states[i], a);
        ep_reward += discount * reward;
        const double u = env_uniform(seed, i, t, h);
        const int s_next = sample_next_state(instance.kernels[i], states[i], a, u);
        records[i] = StepRecord{i, states[i], a, s_next, reward};
      }
      learner->observe(records);
      for (int i = 0; i < n; ++i) states[i] = records[i].s_next;
      discount *= config.gamma;
    }
    learner->end_episode();
    episode_rewards[t - 1] = ep_reward;
  }
  return episode_rewards;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();

  // The oracle always runs: it is the regret reference.
  std::vector<std::string> run_list = config.algorithms;
  if (std::find(run_list.begin(), run_list.end(), "oracle") == run_list.end()) {
    run_list.push_back("oracle");
  }
  const int num_algos = static_cast<int>(run_list.size());
  const int num_seeds = static_cast<int>(config.seeds.size());
  const int T = config.episodes;

  std::vector<RunOutput> outputs(num_algos);
  for (RunOutput& out : outputs) {
    out.reward.assign(num_seeds, std::vector<double>(T, 0.0));
    out.seconds.assign(num_seeds, 0.0);
    out.failed.assign(num_seeds, 0);
  }
  std::vector<std::string> failures;

  const int jobs = num_algos * num_seeds;
  const bool parallel_jobs = config.parallel && !config.serial_timing;
#pragma omp parallel for schedule(dynamic) if (parallel_jobs)
  for (int job = 0; job < jobs; ++job) {
    const int ai = job / num_seeds;
    const int si = job % num_seeds;
    const auto start = std::chrono::steady_clock::now();
    try {
      outputs[ai].reward[si] = run_one(config, run_list[ai], config.seeds[si]);
    } catch (const std::exception& e) {
      outputs[ai].failed[si] = 1;
#pragma omp critical(ucw_harness_failures)
      failures.push_back("(" + run_list[ai] + ", seed " +
                         std::to_string(config.seeds[si]) + "): " + e.what());
    }
    outputs[ai].seconds[si] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
  }
  std::sort(failures.begin(), failures.end());
  for (const std::string& f : failures) {
    std::cerr << "warning: run failed and is excluded from aggregates " << f << "\n";
  }

  const int oracle_idx = static_cast<int>(
      std::find(run_list.begin(), run_list.end(), "oracle") - run_list.begin());

  ExperimentResult result;
  result.failures = failures;
  for (const std::string& algo : config.algorithms) {
    const int ai = static_cast<int>(
        std::find(run_list.begin(), run_list.end(), algo) - run_list.begin());
    AlgoCurve curve;
    curve.algo = algo;
    curve.reward = outputs[ai].reward;
    curve.seconds = outputs[ai].seconds;
    curve.oracle_reward = outputs[oracle_idx].reward;
    curve.regret.assign(num_seeds, std::vector<double>(T, 0.0));
    curve.smoothed_cum_regret.assign(num_seeds, std::vector<double>(T, 0.0));
    for (int si = 0; si < num_seeds; ++si) {
      if (outputs[ai].failed[si] || outputs[oracle_idx].failed[si]) {
        curve.regret[si].assign(T, std::numeric_limits<double>::quiet_NaN());
        curve.smoothed_cum_regret[si] = curve.regret[si];
        continue;
      }
      std::vector<double> cum(T);
      double running = 0.0;
      for (int t = 0; t < T; ++t) {
        curve.regret[si][t] = curve.oracle_reward[si][t] - curve.reward[si][t];
        running += curve.regret[si][t];
        cum[t] = running;
      }
      curve.smoothed_cum_regret[si] = smooth(cum, config.smoothing);
    }

    // Aggregate cumulative regret across the surviving seeds.
    for (int t = 0; t < T; ++t) {
      double sum = 0.0, sum_sq = 0.0;
      int n = 0;
      for (int si = 0; si < num_seeds; ++si) {
        if (outputs[ai].failed[si] || outputs[oracle_idx].failed[si]) continue;
        double cum = 0.0;
        for (int j = 0; j <= t; ++j) cum += curve.regret[si][j];
        sum += cum;
        sum_sq += cum * cum;
        ++n;
      }
      SummaryRow row;
      row.episode = t + 1;
      row.algo = algo;
      row.mean = n > 0 ? sum / n : std::numeric_limits<double>::quiet_NaN();
      row.stderr_ = 0.0;
      if (n > 1) {
        const double var = (sum_sq - sum * sum / n) / (n - 1);
        row.stderr_ = std::sqrt(std::max(var, 0.0) / n);
      }
      result.summary.push_back(row);
    }
    result.curves.push_back(std::move(curve));
  }
  return result;
}

void write_outputs(const ExperimentResult& result, const ExperimentConfig& config) {
  namespace fs = std::filesystem;
  fs::create_directories(config.out_dir);
  const fs::path dir(config.out_dir);

  for (const AlgoCurve& curve : result.curves) {
    std::ofstream out(dir / ("regret_" + curve.algo + ".csv"));
    out << "seed,episode,reward,oracle_reward,regret,smoothed_cum_regret\n";
    for (size_t si = 0; si < config.seeds.size(); ++si) {
      if (std::isnan(curve.regret[si][0])) continue;  // failed run, excluded
      for (int t = 0; t < config.episodes; ++t) {
        out << config.seeds[si] << ',' << (t + 1) << ','
            << format_double(curve.reward[si][t]) << ','
            << format_double(curve.oracle_reward[si][t]) << ','
            << format_double(curve.regret[si][t]) << ','
            << format_double(curve.smoothed_cum_regret[si][t]) << '\n';
      }
    }
  }

  {
    std::ofstream out(dir / "summary.csv");
    out << "episode,algo,mean,stderr\n";
    for (const SummaryRow& row : result.summary) {
      out << row.episode << ',' << row.algo << ',' << format_double(row.mean) << ','
          << format_double(row.stderr_) << '\n';
    }
  }

  {
    std::ofstream out(dir / "runtime.csv");
    out << "algo,mean_seconds\n";
    for (const AlgoCurve& curve : result.curves) {
      double sum = 0.0;
      int n = 0;
      for (size_t si = 0; si < curve.seconds.size(); ++si) {
        if (std::isnan(curve.regret[si][0])) continue;
        sum += curve.seconds[si];
        ++n;
      }
      out << curve.algo << ','
          << format_double(n > 0 ? sum / n : std::numeric_limits<double>::quiet_NaN())
          << '\n';
    }
  }

  // Budget table and mixing diagnostic describe the first seed's instance.
  const RmabInstance instance = make_instance(config, config.seeds.front());
  {
    std::vector<double> indices(instance.num_arms());
    IndexMemoizer memoizer;
    for (int i = 0; i < instance.num_arms(); ++i) {
      WhittleOptions opts;
      opts.memoizer = &memoizer;
      indices[i] = whittle_index(instance.kernels[i], instance.rewards,
                                 instance.initial_states[i], config.gamma, opts)
                       .value;
    }
    std::sort(indices.begin(), indices.end(), std::greater<>());
    std::ofstream out(dir / "budget_table.csv");
    out << "K,optimal,random,gap\n";
    for (const BudgetRow& row : budget_impact_table(indices)) {
      out << row.budget << ',' << format_double(row.optimal) << ','
          << format_double(row.random) << ',' << format_double(row.gap) << '\n';
    }
  }
  {
    std::ofstream out(dir / "ergodicity.txt");
    out << ergodicity_diagnostic(instance).to_text(config.horizon);
  }
}

}  // namespace ucw
