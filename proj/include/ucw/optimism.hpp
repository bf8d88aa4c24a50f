#pragma once

#include <vector>

#include "ucw/confidence.hpp"
#include "ucw/kernel.hpp"
#include "ucw/mdp.hpp"
#include "ucw/whittle.hpp"

namespace ucw {

/// argmax_p p.values over the simplex intersected with the L1 ball of the
/// given radius around `center`: move min(radius/2, 1 - p_best) onto the
/// highest-value state, then drain that mass from states in ascending value
/// order. Exact for L1 balls; radii above the simplex diameter saturate.
std::vector<double> l1_optimistic_row(std::span<const double> center, double radius,
                                      std::span<const double> values);

/// The matching minimizer (optimistic row under negated values).
std::vector<double> l1_pessimistic_row(std::span<const double> center, double radius,
                                       std::span<const double> values);

/// An optimistic kernel chosen from the ball together with its penalized
/// solution.
struct OptimisticSolution {
  TransitionKernel kernel;     // the P-dagger picked from the ball
  PenalizedSolution solution;  // exact solve under that kernel
  double penalty_used = 0.0;
};

/// Highest-future-value program: extended value iteration whose backups
/// maximize each (s,a) row over the arm's L1 ball. The fixed point dominates
/// the optimal value under every kernel in the ball, for every start state.
OptimisticSolution solve_p_v(const ArmRegion& ball, const RewardTable& rewards,
                             double penalty, double gamma,
                             const SolveOptions& opts = {});

struct PmResult {
  double index = 0.0;
  TransitionKernel kernel;  // ball member achieving the index
  bool hit_alternation_cap = false;
};

/// Highest-Whittle-index program: binary search over the penalty m, testing
/// "does some ball member make pulling at `state` at least as good as not
/// pulling" by alternating between an exact penalized solve and a per-row
/// re-optimization ((state,1) maximized, (state,0) minimized, all other rows
/// maximized). The alternation only guarantees a local optimum of the gap.
PmResult solve_p_m(const ArmRegion& ball, const RewardTable& rewards, int state,
                   double gamma, const WhittleOptions& opts = {});

/// Endpoint kernel for the UCB/LCB baseline: acting rows take the upper
/// confidence bound on reaching the good state, passive rows the lower bound.
/// Binary-state domains only (good state = 1).
TransitionKernel extreme_kernel(const ArmRegion& ball);

}  // namespace ucw
