#pragma once

#include <cstdint>
#include <vector>

#include "ucw/kernel.hpp"

namespace ucw {

struct Observation {
  int arm;
  int s;
  int a;
  int s_next;
};

/// Per-arm visit counts N_i(s, a, s'). Counts only ever grow.
class TransitionCounts {
 public:
  TransitionCounts(int num_arms, int num_states, int num_actions);

  void record(const std::vector<Observation>& observations);

  std::int64_t count(int arm, int s, int a, int s_next) const;
  std::int64_t row_total(int arm, int s, int a) const;

  int num_arms() const { return num_arms_; }
  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }

 private:
  size_t index(int arm, int s, int a, int s_next) const;

  int num_arms_;
  int num_states_;
  int num_actions_;
  std::vector<std::int64_t> counts_;
};

/// One arm's slice of the confidence ball: the empirical-mean kernel plus an
/// L1 radius per (s, a) row.
struct ArmRegion {
  TransitionKernel center;
  std::vector<double> radius;  // flat (s, a)

  double radius_at(int s, int a) const {
    return radius[static_cast<size_t>(s) * center.num_actions() + a];
  }
};

/// The ball B^(t): empirical means with radii from the episode-t confidence
/// bound. Rows with no observations default to the uniform distribution.
struct ConfidenceRegion {
  std::vector<ArmRegion> arms;
  int episode = 1;
  double delta = 0.05;
};

/// Builds the episode-t region from counts, with radius
///   d_i(s,a) = sqrt(2|S| * ln(2 |S| |A| N t^4 / delta) / max(1, N_i(s,a))).
ConfidenceRegion build_region(const TransitionCounts& counts, int episode,
                              double delta);

/// Membership test: every row of every kernel within L1 distance d of the
/// center. `slack` absorbs rounding in kernels constructed on the boundary.
bool contains(const ConfidenceRegion& region,
              const std::vector<TransitionKernel>& kernels, double slack = 1e-12);

bool contains_arm(const ArmRegion& arm, const TransitionKernel& kernel,
                  double slack = 1e-12);

}  // namespace ucw
