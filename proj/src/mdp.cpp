#include "ucw/mdp.hpp"

#include <algorithm>
#include <cmath>

namespace ucw {

namespace {

void check_inputs(const TransitionKernel& kernel, const RewardTable& rewards,
                  double penalty, double gamma, const SolveOptions& opts) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("solve: gamma must lie in (0, 1)");
  }
  if (!(opts.tol > 0.0)) {
    throw std::invalid_argument("solve: tol must be positive");
  }
  if (!std::isfinite(penalty)) {
    throw std::invalid_argument("solve: penalty must be finite");
  }
  if (kernel.num_states() != rewards.num_states() ||
      kernel.num_actions() != rewards.num_actions()) {
    throw std::invalid_argument("solve: kernel/reward shape mismatch");
  }
}

// Residual threshold so that ||v - v*||_inf <= tol at termination.
double residual_threshold(double tol, double gamma) {
  return tol * (1.0 - gamma) / gamma;
}

}  // namespace

PenalizedSolution solve_penalized_mdp(const TransitionKernel& kernel,
                                      const RewardTable& rewards, double penalty,
                                      double gamma, const SolveOptions& opts) {
  check_inputs(kernel, rewards, penalty, gamma, opts);
  const int S = kernel.num_states();
  const int A = kernel.num_actions();

  std::vector<double> v(S, 0.0);
  if (opts.warm_start != nullptr) {
    if (opts.warm_start->size() != static_cast<size_t>(S)) {
      throw std::invalid_argument("solve: warm start has wrong length");
    }
    v = *opts.warm_start;
  }
  std::vector<double> v_next(S);

  const double threshold = residual_threshold(opts.tol, gamma);
  double residual = std::numeric_limits<double>::infinity();
  int sweeps = 0;
  for (; sweeps < opts.max_sweeps; ++sweeps) {
    residual = 0.0;
    for (int s = 0; s < S; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < A; ++a) {
        auto row = kernel.row(s, a);
        double ev = 0.0;
        for (int s2 = 0; s2 < S; ++s2) ev += row[s2] * v[s2];
        double q = -penalty * a + rewards.r(s, a) + gamma * ev;
        if (q > best) best = q;
      }
      v_next[s] = best;
      residual = std::max(residual, std::abs(best - v[s]));
    }
    v.swap(v_next);
    if (residual <= threshold) break;
  }
  if (residual > threshold) {
    throw ConvergenceError("solve_penalized_mdp: no contraction within sweep cap",
                           residual);
  }

  PenalizedSolution out;
  out.penalty = penalty;
  out.gamma = gamma;
  out.iterations = sweeps + 1;
  out.q.resize(static_cast<size_t>(S) * A);
  out.policy.resize(S);
  out.v.resize(S);
  for (int s = 0; s < S; ++s) {
    double best = -std::numeric_limits<double>::infinity();
    int best_a = 0;
    for (int a = 0; a < A; ++a) {
      auto row = kernel.row(s, a);
      double ev = 0.0;
      for (int s2 = 0; s2 < S; ++s2) ev += row[s2] * v[s2];
      double q = -penalty * a + rewards.r(s, a) + gamma * ev;
      out.q[static_cast<size_t>(s) * A + a] = q;
      if (q > best) {  // ties stay on the lower (cheaper) action
        best = q;
        best_a = a;
      }
    }
    out.v[s] = best;
    out.policy[s] = best_a;
  }
  return out;
}

std::vector<double> evaluate_policy(const TransitionKernel& kernel,
                                    const RewardTable& rewards,
                                    const std::vector<int>& policy, double penalty,
                                    double gamma, const SolveOptions& opts) {
  check_inputs(kernel, rewards, penalty, gamma, opts);
  const int S = kernel.num_states();
  const int A = kernel.num_actions();
  if (policy.size() != static_cast<size_t>(S)) {
    throw std::invalid_argument("evaluate_policy: policy has wrong length");
  }
  for (int a : policy) {
    if (a < 0 || a >= A) {
      throw std::invalid_argument("evaluate_policy: illegal action");
    }
  }

  std::vector<double> v(S, 0.0);
  std::vector<double> v_next(S);
  const double threshold = residual_threshold(opts.tol, gamma);
  double residual = std::numeric_limits<double>::infinity();
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    residual = 0.0;
    for (int s = 0; s < S; ++s) {
      const int a = policy[s];
      auto row = kernel.row(s, a);
      double ev = 0.0;
      for (int s2 = 0; s2 < S; ++s2) ev += row[s2] * v[s2];
      v_next[s] = -penalty * a + rewards.r(s, a) + gamma * ev;
      residual = std::max(residual, std::abs(v_next[s] - v[s]));
    }
    v.swap(v_next);
    if (residual <= threshold) return v;
  }
  throw ConvergenceError("evaluate_policy: no contraction within sweep cap", residual);
}

double lagrangian_value(const std::vector<std::vector<double>>& arm_values,
                        const std::vector<int>& initial_states, double penalty,
                        int budget, double gamma) {
  if (arm_values.size() != initial_states.size()) {
    throw std::invalid_argument("lagrangian_value: one value array per arm required");
  }
  if (!(gamma > 0.0 && gamma < 1.0) || !std::isfinite(penalty)) {
    throw std::invalid_argument("lagrangian_value: bad penalty or gamma");
  }
  double total = 0.0;
  for (size_t i = 0; i < arm_values.size(); ++i) {
    const auto& values = arm_values[i];
    const int s = initial_states[i];
    if (s < 0 || s >= static_cast<int>(values.size())) {
      throw std::invalid_argument("lagrangian_value: initial state out of range");
    }
    total += values[s];
  }
  return total + penalty * budget / (1.0 - gamma);
}

}  // namespace ucw
