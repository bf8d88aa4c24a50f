#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "ucw/domains.hpp"
#include "ucw/mdp.hpp"

using namespace ucw;

namespace {

TransitionKernel action_independent_kernel() {
  // Same row under both actions.
  return TransitionKernel::from_good_probs(0.3, 0.3, 0.7, 0.7);
}

}  // namespace

TEST_CASE("kernel validation") {
  CHECK_THROWS_AS(TransitionKernel(2, 2, std::vector<double>(7, 0.5)),
                  std::invalid_argument);
  CHECK_THROWS_AS(TransitionKernel(2, 2, {0.5, 0.6, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5}),
                  std::invalid_argument);
  CHECK_THROWS_AS(TransitionKernel::from_good_probs(1.2, 0.5, 0.5, 0.5),
                  std::invalid_argument);
  const TransitionKernel k = TransitionKernel::from_good_probs(0.1, 0.9, 0.2, 0.8);
  CHECK(k.p(0, 1, 1) == doctest::Approx(0.9));
  CHECK(k.p(1, 0, 0) == doctest::Approx(0.8));
}

TEST_CASE("identical actions with zero penalty give equal q-values") {
  const TransitionKernel kernel = action_independent_kernel();
  const RewardTable rewards = RewardTable::state_value(2, 2);
  const PenalizedSolution sol = solve_penalized_mdp(kernel, rewards, 0.0, 0.9);
  for (int s = 0; s < 2; ++s) {
    CHECK(sol.q_at(s, 0, 2) == doctest::Approx(sol.q_at(s, 1, 2)).epsilon(1e-9));
    CHECK(sol.policy[s] == 0);  // ties break toward the cheaper action
  }
}

TEST_CASE("penalty above 2*v_max never pulls") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const RmabInstance inst = generate_wide(1, rng());
    const RewardTable& rewards = inst.rewards;
    const double penalty = 2.0 * rewards.v_max(0.9) + 0.1;
    const PenalizedSolution sol =
        solve_penalized_mdp(inst.kernels[0], rewards, penalty, 0.9);
    CHECK(sol.policy == std::vector<int>{0, 0});
  }
}

TEST_CASE("fixed point matches a long high-precision Bellman recursion") {
  // 2-state kernel with P(s,1,good)=0.9, P(s,0,good)=0.1, R(s,a)=s.
  const TransitionKernel kernel = TransitionKernel::from_good_probs(0.1, 0.9, 0.1, 0.9);
  const RewardTable rewards = RewardTable::state_value(2, 2);
  const double gamma = 0.9;
  const double penalty = 0.3;

  // Oracle: plain Bellman recursion run 500 sweeps from zero at 1e-12.
  std::vector<double> v(2, 0.0);
  for (int sweep = 0; sweep < 500; ++sweep) {
    std::vector<double> next(2);
    for (int s = 0; s < 2; ++s) {
      double best = -1e300;
      for (int a = 0; a < 2; ++a) {
        double ev = 0.0;
        for (int s2 = 0; s2 < 2; ++s2) ev += kernel.p(s, a, s2) * v[s2];
        best = std::max(best, -penalty * a + rewards.r(s, a) + gamma * ev);
      }
      next[s] = best;
    }
    v = next;
  }

  const PenalizedSolution sol = solve_penalized_mdp(kernel, rewards, penalty, gamma);
  for (int s = 0; s < 2; ++s) {
    CHECK(sol.v[s] == doctest::Approx(v[s]).epsilon(1e-9));
    double best = -1e300;
    for (int a = 0; a < 2; ++a) best = std::max(best, sol.q_at(s, a, 2));
    CHECK(sol.v[s] == doctest::Approx(best).epsilon(1e-12));  // v = max_a q
  }
}

TEST_CASE("solver rejects bad inputs and reports non-contraction") {
  const TransitionKernel kernel = action_independent_kernel();
  const RewardTable rewards = RewardTable::state_value(2, 2);
  CHECK_THROWS_AS(solve_penalized_mdp(kernel, rewards, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(solve_penalized_mdp(kernel, rewards, NAN, 0.9), std::invalid_argument);
  SolveOptions opts;
  opts.max_sweeps = 2;
  try {
    solve_penalized_mdp(kernel, rewards, 0.0, 0.9, opts);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.residual() > 0.0);
  }
}

TEST_CASE("evaluate_policy basics") {
  const RewardTable zero(2, 2, {0, 0, 0, 0});
  const TransitionKernel kernel = action_independent_kernel();
  const std::vector<int> never_pull{0, 0};
  const std::vector<double> v = evaluate_policy(kernel, zero, never_pull, 0.0, 0.9);
  CHECK(v[0] == doctest::Approx(0.0));
  CHECK(v[1] == doctest::Approx(0.0));

  // Absorbing good state, R = state value: value 1/(1-gamma) = 10 there.
  const TransitionKernel absorbing = TransitionKernel::from_good_probs(0.0, 0.0, 1.0, 1.0);
  const RewardTable rewards = RewardTable::state_value(2, 2);
  const std::vector<double> va =
      evaluate_policy(absorbing, rewards, never_pull, 0.0, 0.9);
  CHECK(va[1] == doctest::Approx(10.0).epsilon(1e-8));

  CHECK_THROWS_AS(evaluate_policy(kernel, rewards, {0, 5}, 0.0, 0.9),
                  std::invalid_argument);
}

TEST_CASE("evaluate_policy agrees with the greedy policy's value") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 25; ++trial) {
    const RmabInstance inst = generate_wide(1, rng());
    const RewardTable& rewards = inst.rewards;
    std::uniform_real_distribution<double> pen(-1.0, 1.0);
    const double penalty = pen(rng);
    const PenalizedSolution sol =
        solve_penalized_mdp(inst.kernels[0], rewards, penalty, 0.9);
    const std::vector<double> v =
        evaluate_policy(inst.kernels[0], rewards, sol.policy, penalty, 0.9);
    for (int s = 0; s < 2; ++s) {
      CHECK(std::abs(v[s] - sol.v[s]) <= 2e-9);  // within 2*tol
    }
  }
}

TEST_CASE("contraction and value bound invariants") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const RmabInstance inst = generate_wide(1, rng());
    const RewardTable& rewards = inst.rewards;
    std::uniform_real_distribution<double> pen(-2.0, 2.0);
    const double penalty = pen(rng);
    const double gamma = 0.9;
    const PenalizedSolution sol =
        solve_penalized_mdp(inst.kernels[0], rewards, penalty, gamma);
    const double bound = rewards.v_max(gamma) + std::abs(penalty) / (1.0 - gamma);
    for (double v : sol.v) CHECK(std::abs(v) <= bound + 1e-9);
  }

  // Sup-norm residual contracts by at least gamma per sweep.
  const TransitionKernel kernel = TransitionKernel::from_good_probs(0.2, 0.8, 0.3, 0.9);
  const RewardTable rewards = RewardTable::state_value(2, 2);
  std::vector<double> v(2, 0.0);
  double prev_residual = -1.0;
  for (int sweep = 0; sweep < 60; ++sweep) {
    std::vector<double> next(2);
    for (int s = 0; s < 2; ++s) {
      double best = -1e300;
      for (int a = 0; a < 2; ++a) {
        double ev = 0.0;
        for (int s2 = 0; s2 < 2; ++s2) ev += kernel.p(s, a, s2) * v[s2];
        best = std::max(best, -0.25 * a + rewards.r(s, a) + 0.9 * ev);
      }
      next[s] = best;
    }
    const double residual =
        std::max(std::abs(next[0] - v[0]), std::abs(next[1] - v[1]));
    if (prev_residual >= 0.0) CHECK(residual <= 0.9 * prev_residual + 1e-12);
    prev_residual = residual;
    v = next;
  }
}

TEST_CASE("pulling advantage is nonincreasing in the penalty") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const RmabInstance inst = generate_wide(1, rng());
    const RewardTable& rewards = inst.rewards;
    for (int s = 0; s < 2; ++s) {
      double prev_gap = std::numeric_limits<double>::infinity();
      for (double m = -2.0; m <= 2.0; m += 0.125) {
        const PenalizedSolution sol =
            solve_penalized_mdp(inst.kernels[0], rewards, m, 0.9);
        const double gap = sol.q_at(s, 1, 2) - sol.q_at(s, 0, 2);
        CHECK(gap <= prev_gap + 1e-9);
        prev_gap = gap;
      }
    }
  }
}

TEST_CASE("lagrangian_value closed forms") {
  CHECK(lagrangian_value({{0.0, 0.0}, {0.0, 0.0}}, {0, 1}, 0.0, 1, 0.9) ==
        doctest::Approx(0.0));
  // Two arms valued 3 and 4 at their initial states, lambda 0.5, K=1: 12.
  CHECK(lagrangian_value({{3.0, 0.0}, {0.0, 4.0}}, {0, 1}, 0.5, 1, 0.9) ==
        doctest::Approx(12.0));
  CHECK_THROWS_AS(lagrangian_value({{1.0}}, {0, 1}, 0.0, 1, 0.9),
                  std::invalid_argument);
}

TEST_CASE("lagrangian_value matches a 1e5-rollout Monte Carlo estimate") {
  const RmabInstance inst = generate_wide(2, 99);
  const RewardTable& rewards = inst.rewards;
  const double gamma = 0.9;
  const double penalty = 0.4;
  const int budget = 1;

  std::vector<std::vector<int>> policies;
  std::vector<std::vector<double>> arm_values;
  for (int i = 0; i < 2; ++i) {
    const PenalizedSolution sol =
        solve_penalized_mdp(inst.kernels[i], rewards, penalty, gamma);
    policies.push_back(sol.policy);
    arm_values.push_back(
        evaluate_policy(inst.kernels[i], rewards, sol.policy, penalty, gamma));
  }
  const double exact =
      lagrangian_value(arm_values, inst.initial_states, penalty, budget, gamma);
  const auto mc = ucw::testing::rollout_lagrangian(
      inst.kernels, rewards, policies, inst.initial_states, penalty, budget, gamma,
      100000, 1234);
  CHECK(std::abs(exact - mc.mean) <= 4.0 * mc.stderr_ + 1e-6);
}
