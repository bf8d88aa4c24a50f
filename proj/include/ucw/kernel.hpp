#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ucw {

/// Thrown when an iterative solver fails to contract within its sweep cap.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Per-arm transition tensor P(s, a, s'). Rows must lie on the simplex.
class TransitionKernel {
 public:
  TransitionKernel(int num_states, int num_actions, std::vector<double> probs);

  /// Binary-state (bad=0, good=1), binary-action kernel from the four
  /// probabilities of reaching the good state. Column order matches the
  /// dataset schema: p0_pass, p0_act, p1_pass, p1_act.
  static TransitionKernel from_good_probs(double p0_pass, double p0_act,
                                          double p1_pass, double p1_act);

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }

  double p(int s, int a, int s2) const { return probs_[index(s, a, s2)]; }
  std::span<const double> row(int s, int a) const {
    return {probs_.data() + index(s, a, 0), static_cast<size_t>(num_states_)};
  }

  /// Replaces one next-state row. The caller is responsible for keeping the
  /// row on the simplex; validate() re-checks the whole kernel.
  void set_row(int s, int a, std::span<const double> row);

  void validate() const;

  std::span<const double> flat() const { return probs_; }

  bool operator==(const TransitionKernel& other) const = default;

 private:
  size_t index(int s, int a, int s2) const {
    return (static_cast<size_t>(s) * num_actions_ + a) * num_states_ + s2;
  }

  int num_states_;
  int num_actions_;
  std::vector<double> probs_;
};

/// Shared reward table R(s, a); rewards are known to the learner.
class RewardTable {
 public:
  RewardTable(int num_states, int num_actions, std::vector<double> values);

  /// The binary-domain convention: R(s, a) = s (good state pays 1).
  static RewardTable state_value(int num_states, int num_actions);

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  double r(int s, int a) const {
    return values_[static_cast<size_t>(s) * num_actions_ + a];
  }
  /// Largest absolute reward entry.
  double r_max() const { return r_max_; }
  /// Value-scale bound r_max / (1 - gamma).
  double v_max(double gamma) const { return r_max_ / (1.0 - gamma); }

 private:
  int num_states_;
  int num_actions_;
  std::vector<double> values_;
  double r_max_;
};

}  // namespace ucw
