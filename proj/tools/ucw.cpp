// Command-line harness: run experiments, inspect Whittle indices, emit
// synthetic datasets, and check the ergodicity assumption of a config.
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ucw/config.hpp"
#include "ucw/csv.hpp"
#include "ucw/domains.hpp"
#include "ucw/harness.hpp"
#include "ucw/whittle.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides,
            const std::string& out_dir) {
  ucw::ExperimentConfig config;
  try {
    config = ucw::parse_config_file(config_path);
    ucw::apply_overrides(config, overrides);
    if (!out_dir.empty()) config.out_dir = out_dir;
    config.validate();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    const ucw::ExperimentResult result = ucw::run_experiment(config);
    ucw::write_outputs(result, config);
    for (const ucw::AlgoCurve& curve : result.curves) {
      double final_mean = 0.0;
      for (const ucw::SummaryRow& row : result.summary) {
        if (row.algo == curve.algo && row.episode == config.episodes) {
          final_mean = row.mean;
        }
      }
      double mean_seconds = 0.0;
      for (double s : curve.seconds) mean_seconds += s;
      mean_seconds /= curve.seconds.empty() ? 1 : curve.seconds.size();
      std::printf("%-12s final mean cumulative regret %10.4f   mean %8.3f s/run\n",
                  curve.algo.c_str(), final_mean, mean_seconds);
    }
    std::printf("outputs written to %s\n", config.out_dir.c_str());
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_whittle(const std::vector<double>& probs, int state, double gamma) {
  try {
    if (probs.size() != 4) {
      throw std::invalid_argument("--probs needs p0_pass,p0_act,p1_pass,p1_act");
    }
    if (!(gamma > 0.0 && gamma < 1.0)) {
      throw std::invalid_argument("gamma must lie in (0, 1)");
    }
    const ucw::TransitionKernel kernel =
        ucw::TransitionKernel::from_good_probs(probs[0], probs[1], probs[2], probs[3]);
    const ucw::RewardTable rewards = ucw::RewardTable::state_value(2, 2);
    const ucw::IndexResult result =
        ucw::whittle_index(kernel, rewards, state, gamma);
    std::printf("%.4f\n", result.value);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "whittle failed: " << e.what() << "\n";
    return kExitConfig;
  }
}

int cmd_gen(const std::string& domain, int arms, std::uint64_t seed,
            const std::string& out_path) {
  try {
    ucw::RmabInstance instance = domain == "wide"   ? ucw::generate_wide(arms, seed)
                                 : domain == "thin" ? ucw::generate_thin(arms, seed)
                                                    : throw std::invalid_argument(
                                                          "domain must be wide or thin");
    ucw::save_dataset(instance, out_path);
    std::printf("wrote %d rows to %s\n", arms, out_path.c_str());
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "gen failed: " << e.what() << "\n";
    return kExitConfig;
  }
}

int cmd_diag(const std::string& config_path, const std::vector<std::string>& overrides,
             const std::string& out_path) {
  ucw::ExperimentConfig config;
  try {
    config = ucw::parse_config_file(config_path);
    ucw::apply_overrides(config, overrides);
    config.validate();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    const ucw::RmabInstance instance =
        ucw::make_instance(config, config.seeds.front());
    const ucw::ErgodicityReport report = ucw::ergodicity_diagnostic(instance);
    const std::string text = report.to_text(config.horizon);
    std::cout << text;
    if (!out_path.empty()) {
      std::ofstream out(out_path);
      if (!out) throw std::runtime_error("cannot write " + out_path);
      out << text;
    }
    if (!report.ergodic || config.horizon < report.h_required) {
      return kExitRuntime;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "diag failed: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"restless-bandit online learning harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  CLI::App* run = app.add_subcommand("run", "run an experiment from a config file");
  run->add_option("--config", config_path, "config file path")->required();
  run->add_option("--override", overrides, "key=value override (repeatable)");
  run->add_option("--out", out_dir, "output directory (wins over the config)");

  std::vector<double> probs;
  int state = 0;
  double gamma = 0.9;
  CLI::App* whittle =
      app.add_subcommand("whittle", "print the Whittle index of one binary arm");
  whittle->add_option("--probs", probs,
                      "good-state probabilities p0_pass,p0_act,p1_pass,p1_act")
      ->required()
      ->delimiter(',');
  whittle->add_option("--state", state, "state to index (0=bad, 1=good)");
  whittle->add_option("--gamma", gamma, "discount factor");

  std::string gen_domain;
  int gen_arms = 0;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  CLI::App* gen = app.add_subcommand("gen", "emit a synthetic dataset CSV");
  gen->add_option("domain", gen_domain, "wide | thin")->required();
  gen->add_option("arms", gen_arms, "number of rows")->required();
  gen->add_option("seed", gen_seed, "generator seed")->required();
  gen->add_option("out", gen_out, "output CSV path")->required();

  std::string diag_config;
  std::vector<std::string> diag_overrides;
  std::string diag_out;
  CLI::App* diag =
      app.add_subcommand("diag", "ergodicity diagnostic for a config's instance");
  diag->add_option("--config", diag_config, "config file path")->required();
  diag->add_option("--override", diag_overrides, "key=value override (repeatable)");
  diag->add_option("--out", diag_out, "also write the report to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  if (run->parsed()) return cmd_run(config_path, overrides, out_dir);
  if (whittle->parsed()) return cmd_whittle(probs, state, gamma);
  if (gen->parsed()) return cmd_gen(gen_domain, gen_arms, gen_seed, gen_out);
  if (diag->parsed()) return cmd_diag(diag_config, diag_overrides, diag_out);
  return kExitConfig;
}
