#pragma once

#include <vector>

#include "ucw/kernel.hpp"

namespace ucw {

/// Fixed point of the penalized Bellman operator
///   q(s,a) = -penalty*a + R(s,a) + gamma * sum_s' P(s,a,s') v(s')
///   v(s)   = max_a q(s,a)
/// with the greedy policy breaking ties toward action 0.
struct PenalizedSolution {
  std::vector<double> v;       // per state
  std::vector<double> q;       // flat (s, a)
  std::vector<int> policy;     // greedy action per state
  double penalty = 0.0;
  double gamma = 0.0;
  int iterations = 0;

  double q_at(int s, int a, int num_actions) const {
    return q[static_cast<size_t>(s) * num_actions + a];
  }
};

struct SolveOptions {
  double tol = 1e-9;       // sup-norm distance to the fixed point
  int max_sweeps = 10000;
  const std::vector<double>* warm_start = nullptr;
};

/// Value iteration for the penalized single-arm MDP. Throws ConvergenceError
/// (carrying the final residual) if the sweep cap is hit first.
PenalizedSolution solve_penalized_mdp(const TransitionKernel& kernel,
                                      const RewardTable& rewards, double penalty,
                                      double gamma, const SolveOptions& opts = {});

/// Value of a fixed deterministic policy under the penalized operator.
std::vector<double> evaluate_policy(const TransitionKernel& kernel,
                                    const RewardTable& rewards,
                                    const std::vector<int>& policy, double penalty,
                                    double gamma, const SolveOptions& opts = {});

/// Lagrangian total: sum of per-arm values at the initial states plus the
/// penalty * budget / (1 - gamma) constant. The per-arm values are assumed to
/// already internalize the -penalty * a term.
double lagrangian_value(const std::vector<std::vector<double>>& arm_values,
                        const std::vector<int>& initial_states, double penalty,
                        int budget, double gamma);

}  // namespace ucw
