#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "ucw/confidence.hpp"
#include "ucw/domains.hpp"
#include "ucw/optimism.hpp"
#include "ucw/whittle.hpp"

namespace ucw {

/// Arms pulled in one timestep; at most the budget, ids unique and ascending.
struct ActionSet {
  std::vector<int> pulled;
};

/// One arm's transition and reward for one timestep (full observability).
struct StepRecord {
  int arm;
  int s;
  int a;
  int s_next;
  double reward;
};

struct LearnerContext {
  const RmabInstance* instance = nullptr;  // true kernels are read by the oracle only
  int horizon = 20;
  double gamma = 0.9;
  double delta = 0.05;
  double vi_tol = 1e-9;
  std::uint64_t seed = 0;
  bool parallel = false;  // fan per-arm planning across threads

  // Debug hook: replace the confidence region with a zero-radius ball at
  // these kernels (ucw-value only).
  const std::vector<TransitionKernel>* zero_radius_kernels = nullptr;
};

class Learner {
 public:
  explicit Learner(const LearnerContext& ctx);
  virtual ~Learner() = default;

  virtual void begin_episode(const std::vector<int>& initial_states, int episode) = 0;
  virtual ActionSet act(const std::vector<int>& states) = 0;
  virtual void observe(const std::vector<StepRecord>& records);
  virtual void end_episode() {}
  virtual std::string_view name() const = 0;

  double current_penalty() const { return penalty_; }
  const TransitionCounts& counts() const { return counts_; }
  const IndexMemoizer& memoizer() const { return memoizer_; }

 protected:
  int num_arms_;
  int num_states_;
  int num_actions_;
  int budget_;
  int horizon_;
  double gamma_;
  double delta_;
  double vi_tol_;
  bool parallel_;
  const RewardTable& rewards_;
  TransitionCounts counts_;
  IndexMemoizer memoizer_;
  std::mt19937_64 rng_;
  double penalty_ = 0.0;
  int episode_ = 0;
  int step_ = 0;  // acts taken in the current episode
};

/// Tabular Q-learning baseline: per-arm Q(s, a) with visit-count step sizes
/// and a decaying epsilon-greedy top-K over Q-gaps. Declared here so tests
/// can pin the update rule through the hooks below.
class WiqlLearner : public Learner {
 public:
  explicit WiqlLearner(const LearnerContext& ctx);

  std::string_view name() const override { return "wiql"; }
  void begin_episode(const std::vector<int>& initial_states, int episode) override;
  ActionSet act(const std::vector<int>& states) override;
  void observe(const std::vector<StepRecord>& records) override;

  double q_gap(int arm, int state) const;

  // Test hooks.
  void set_epsilon_override(double eps) { epsilon_override_ = eps; }
  void set_q(int arm, int s, int a, double value) { q_[slot(arm, s, a)] = value; }
  double q_value(int arm, int s, int a) const { return q_[slot(arm, s, a)]; }

 private:
  size_t slot(int arm, int s, int a) const {
    return (static_cast<size_t>(arm) * num_states_ + s) * num_actions_ + a;
  }
  std::vector<int> random_subset();

  std::vector<double> q_;
  std::vector<std::int64_t> visits_;
  std::optional<double> epsilon_override_;
};

/// Known learner names: ucw-value, ucw-penalty, extreme, wiql, random, oracle.
std::unique_ptr<Learner> make_learner(std::string_view name, const LearnerContext& ctx);

/// Stable per-algorithm ordinal used to derive per-learner RNG streams.
int learner_ordinal(std::string_view name);

}  // namespace ucw
