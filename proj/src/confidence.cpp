#include "ucw/confidence.hpp"

#include <cmath>

namespace ucw {

TransitionCounts::TransitionCounts(int num_arms, int num_states, int num_actions)
    : num_arms_(num_arms), num_states_(num_states), num_actions_(num_actions) {
  if (num_arms <= 0 || num_states <= 0 || num_actions <= 0) {
    throw std::invalid_argument("TransitionCounts: dimensions must be positive");
  }
  counts_.assign(static_cast<size_t>(num_arms) * num_states * num_actions * num_states,
                 0);
}

size_t TransitionCounts::index(int arm, int s, int a, int s_next) const {
  return ((static_cast<size_t>(arm) * num_states_ + s) * num_actions_ + a) *
             num_states_ +
         s_next;
}

void TransitionCounts::record(const std::vector<Observation>& observations) {
  for (const Observation& obs : observations) {
    if (obs.arm < 0 || obs.arm >= num_arms_ || obs.s < 0 || obs.s >= num_states_ ||
        obs.a < 0 || obs.a >= num_actions_ || obs.s_next < 0 ||
        obs.s_next >= num_states_) {
      throw std::invalid_argument("TransitionCounts::record: index out of range");
    }
  }
  for (const Observation& obs : observations) {
    ++counts_[index(obs.arm, obs.s, obs.a, obs.s_next)];
  }
}

std::int64_t TransitionCounts::count(int arm, int s, int a, int s_next) const {
  return counts_[index(arm, s, a, s_next)];
}

std::int64_t TransitionCounts::row_total(int arm, int s, int a) const {
  std::int64_t total = 0;
  for (int s2 = 0; s2 < num_states_; ++s2) total += counts_[index(arm, s, a, s2)];
  return total;
}

ConfidenceRegion build_region(const TransitionCounts& counts, int episode,
                              double delta) {
  if (episode < 1) {
    throw std::invalid_argument("build_region: episode must be >= 1");
  }
  if (!(delta > 0.0) || delta > 1.0) {
    throw std::invalid_argument("build_region: delta must lie in (0, 1]");
  }
  const int N = counts.num_arms();
  const int S = counts.num_states();
  const int A = counts.num_actions();
  const double t = static_cast<double>(episode);
  const double log_term =
      std::log(2.0 * S * A * N * t * t * t * t / delta);

  ConfidenceRegion region;
  region.episode = episode;
  region.delta = delta;
  region.arms.reserve(N);
  for (int i = 0; i < N; ++i) {
    std::vector<double> probs(static_cast<size_t>(S) * A * S);
    std::vector<double> radius(static_cast<size_t>(S) * A);
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        const std::int64_t total = counts.row_total(i, s, a);
        for (int s2 = 0; s2 < S; ++s2) {
          const size_t at = (static_cast<size_t>(s) * A + a) * S + s2;
          probs[at] = total > 0
                          ? static_cast<double>(counts.count(i, s, a, s2)) / total
                          : 1.0 / S;
        }
        const double n = std::max<std::int64_t>(1, total);
        radius[static_cast<size_t>(s) * A + a] = std::sqrt(2.0 * S * log_term / n);
      }
    }
    region.arms.push_back(ArmRegion{TransitionKernel(S, A, std::move(probs)),
                                    std::move(radius)});
  }
  return region;
}

bool contains_arm(const ArmRegion& arm, const TransitionKernel& kernel, double slack) {
  const int S = arm.center.num_states();
  const int A = arm.center.num_actions();
  if (kernel.num_states() != S || kernel.num_actions() != A) {
    throw std::invalid_argument("contains: kernel shape mismatch");
  }
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      double l1 = 0.0;
      auto center_row = arm.center.row(s, a);
      auto row = kernel.row(s, a);
      for (int s2 = 0; s2 < S; ++s2) l1 += std::abs(row[s2] - center_row[s2]);
      if (l1 > arm.radius_at(s, a) + slack) return false;
    }
  }
  return true;
}

bool contains(const ConfidenceRegion& region,
              const std::vector<TransitionKernel>& kernels, double slack) {
  if (kernels.size() != region.arms.size()) {
    throw std::invalid_argument("contains: one kernel per arm required");
  }
  for (size_t i = 0; i < kernels.size(); ++i) {
    if (!contains_arm(region.arms[i], kernels[i], slack)) return false;
  }
  return true;
}

}  // namespace ucw
