#include "ucw/optimism.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ucw {

namespace {

std::vector<size_t> order_by_value_ascending(std::span<const double> values) {
  std::vector<size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return values[a] < values[b]; });
  return order;
}

}  // namespace

std::vector<double> l1_optimistic_row(std::span<const double> center, double radius,
                                      std::span<const double> values) {
  if (center.size() != values.size()) {
    throw std::invalid_argument("l1_optimistic_row: size mismatch");
  }
  if (radius < 0.0) {
    throw std::invalid_argument("l1_optimistic_row: negative radius");
  }
  std::vector<double> out(center.begin(), center.end());
  if (out.empty()) return out;

  size_t best = 0;
  for (size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  double eps = std::min(radius / 2.0, 1.0 - out[best]);
  eps = std::max(eps, 0.0);
  out[best] += eps;

  double remaining = eps;
  for (size_t k : order_by_value_ascending(values)) {
    if (k == best || remaining <= 0.0) continue;
    const double take = std::min(remaining, std::max(out[k], 0.0));
    out[k] -= take;
    remaining -= take;
  }
  return out;
}

std::vector<double> l1_pessimistic_row(std::span<const double> center, double radius,
                                       std::span<const double> values) {
  std::vector<double> negated(values.begin(), values.end());
  for (double& v : negated) v = -v;
  return l1_optimistic_row(center, radius, negated);
}

OptimisticSolution solve_p_v(const ArmRegion& ball, const RewardTable& rewards,
                             double penalty, double gamma, const SolveOptions& opts) {
  const int S = ball.center.num_states();
  const int A = ball.center.num_actions();
  if (!(gamma > 0.0 && gamma < 1.0) || !(opts.tol > 0.0)) {
    throw std::invalid_argument("solve_p_v: bad gamma or tol");
  }
  if (!std::isfinite(penalty)) {
    throw std::invalid_argument("solve_p_v: penalty must be finite");
  }

  std::vector<double> v(S, 0.0);
  std::vector<double> v_next(S);
  const double threshold = opts.tol * (1.0 - gamma) / gamma;
  double residual = std::numeric_limits<double>::infinity();
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    residual = 0.0;
    for (int s = 0; s < S; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < A; ++a) {
        auto row = l1_optimistic_row(ball.center.row(s, a), ball.radius_at(s, a), v);
        double ev = 0.0;
        for (int s2 = 0; s2 < S; ++s2) ev += row[s2] * v[s2];
        best = std::max(best, -penalty * a + rewards.r(s, a) + gamma * ev);
      }
      v_next[s] = best;
      residual = std::max(residual, std::abs(best - v[s]));
    }
    v.swap(v_next);
    if (residual <= threshold) break;
  }
  if (residual > threshold) {
    throw ConvergenceError("solve_p_v: no contraction within sweep cap", residual);
  }

  TransitionKernel chosen = ball.center;
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      auto row = l1_optimistic_row(ball.center.row(s, a), ball.radius_at(s, a), v);
      chosen.set_row(s, a, row);
    }
  }
  chosen.validate();

  SolveOptions exact = opts;
  exact.warm_start = &v;
  PenalizedSolution solution = solve_penalized_mdp(chosen, rewards, penalty, gamma, exact);
  return OptimisticSolution{std::move(chosen), std::move(solution), penalty};
}

namespace {

// One feasibility probe for the P_m search: maximize the pulling gap at
// `state` over the ball by alternating exact solves with per-row transfers.
// The working kernel and value function persist across probes.
struct GapMaximizer {
  const ArmRegion& ball;
  const RewardTable& rewards;
  int state;
  double gamma;
  const WhittleOptions& opts;
  TransitionKernel kernel;
  std::vector<double> warm;
  bool hit_cap = false;

  GapMaximizer(const ArmRegion& b, const RewardTable& r, int st, double g,
               const WhittleOptions& o)
      : ball(b), rewards(r), state(st), gamma(g), opts(o), kernel(b.center) {}

  double max_gap(double m) {
    const int S = ball.center.num_states();
    const int A = ball.center.num_actions();
    SolveOptions solve_opts;
    solve_opts.tol = opts.vi_tol;
    solve_opts.max_sweeps = opts.max_sweeps;

    double prev_gap = std::numeric_limits<double>::quiet_NaN();
    for (int iter = 0; iter < 100; ++iter) {
      solve_opts.warm_start = warm.empty() ? nullptr : &warm;
      PenalizedSolution sol = solve_penalized_mdp(kernel, rewards, m, gamma, solve_opts);
      warm = sol.v;
      const double gap = sol.q_at(state, 1, A) - sol.q_at(state, 0, A);
      if (iter > 0 && std::abs(gap - prev_gap) < 1e-6) return gap;
      prev_gap = gap;

      bool changed = false;
      for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
          std::vector<double> row =
              (s == state && a == 0)
                  ? l1_pessimistic_row(ball.center.row(s, a), ball.radius_at(s, a),
                                       sol.v)
                  : l1_optimistic_row(ball.center.row(s, a), ball.radius_at(s, a),
                                      sol.v);
          auto current = kernel.row(s, a);
          for (int s2 = 0; s2 < S; ++s2) {
            if (std::abs(row[s2] - current[s2]) > 1e-15) {
              changed = true;
              break;
            }
          }
          kernel.set_row(s, a, row);
        }
      }
      if (!changed) return gap;  // rows stable: the gap is at its fixed point
    }
    hit_cap = true;
    return prev_gap;
  }
};

}  // namespace

PmResult solve_p_m(const ArmRegion& ball, const RewardTable& rewards, int state,
                   double gamma, const WhittleOptions& opts) {
  if (ball.center.num_actions() != 2) {
    throw std::invalid_argument("solve_p_m: binary actions required");
  }
  if (state < 0 || state >= ball.center.num_states()) {
    throw std::invalid_argument("solve_p_m: state out of range");
  }

  const double v_max = rewards.v_max(gamma);
  double lo = -v_max - 1.0;
  double hi = v_max + 1.0;

  GapMaximizer maximizer(ball, rewards, state, gamma, opts);
  const double gap_lo = maximizer.max_gap(lo);
  const double gap_hi = maximizer.max_gap(hi);
  if (gap_lo < 0.0 || gap_hi > 0.0) {
    throw std::runtime_error("solve_p_m: gap has the same sign at both interval ends");
  }

  double best_m = 0.0;
  double best_gap = std::numeric_limits<double>::infinity();
  TransitionKernel best_kernel = maximizer.kernel;
  for (int iter = 0; iter < 200; ++iter) {
    if (hi - lo < opts.search_tol && best_gap <= opts.gap_tol) break;
    const double mid = 0.5 * (lo + hi);
    const double gap = maximizer.max_gap(mid);
    if (std::abs(gap) <= best_gap) {
      best_gap = std::abs(gap);
      best_m = mid;
      best_kernel = maximizer.kernel;
    }
    if (gap >= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (best_gap > opts.gap_tol) {
    throw ConvergenceError("solve_p_m: indifference gap did not close", best_gap);
  }
  return PmResult{best_m, std::move(best_kernel), maximizer.hit_cap};
}

TransitionKernel extreme_kernel(const ArmRegion& ball) {
  if (ball.center.num_states() != 2 || ball.center.num_actions() != 2) {
    throw std::invalid_argument("extreme_kernel: binary state/action domains only");
  }
  TransitionKernel kernel = ball.center;
  for (int s = 0; s < 2; ++s) {
    const double ucb = std::min(1.0, kernel.p(s, 1, 1) + ball.radius_at(s, 1) / 2.0);
    const double lcb = std::max(0.0, kernel.p(s, 0, 1) - ball.radius_at(s, 0) / 2.0);
    const double act_row[2] = {1.0 - ucb, ucb};
    const double pass_row[2] = {1.0 - lcb, lcb};
    kernel.set_row(s, 1, act_row);
    kernel.set_row(s, 0, pass_row);
  }
  kernel.validate();
  return kernel;
}

}  // namespace ucw
