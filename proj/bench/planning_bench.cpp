// Times the per-arm planning kernels serial vs OpenMP, and pruned vs unpruned
// top-K selection. Build and run:
//   cmake --build build --target planning_bench && ./build/bench/planning_bench
#include <omp.h>

#include <cstdio>
#include <optional>
#include <vector>

#include "ucw/confidence.hpp"
#include "ucw/domains.hpp"
#include "ucw/harness.hpp"
#include "ucw/learners.hpp"
#include "ucw/optimism.hpp"
#include "ucw/whittle.hpp"

using namespace ucw;

namespace {

// Counts gathered from a short random-action warmup so radii are realistic.
ConfidenceRegion warmed_region(const RmabInstance& instance, int episodes,
                               int horizon, double delta) {
  TransitionCounts counts(instance.num_arms(), 2, 2);
  std::vector<int> states = instance.initial_states;
  std::vector<Observation> batch;
  for (int t = 1; t <= episodes; ++t) {
    for (int h = 1; h <= horizon; ++h) {
      for (int i = 0; i < instance.num_arms(); ++i) {
        const int a = (i + h) % 2;
        const int next = sample_next_state(instance.kernels[i], states[i], a,
                                           env_uniform(7, i, t, h));
        batch.push_back({i, states[i], a, next});
        states[i] = next;
      }
    }
  }
  counts.record(batch);
  return build_region(counts, episodes, delta);
}

template <typename Fn>
double time_planning(int num_arms, int repetitions, bool parallel, Fn&& fn) {
  const double start = omp_get_wtime();
  std::exception_ptr error = nullptr;
  for (int rep = 0; rep < repetitions; ++rep) {
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int i = 0; i < num_arms; ++i) {
      try {
        fn(i);
      } catch (...) {
#pragma omp critical
        if (!error) error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
  return (omp_get_wtime() - start) / repetitions;
}

}  // namespace

int main() {
  const int num_arms = 512;
  const int budget = 64;
  const int repetitions = 40;
  const RmabInstance instance = generate_wide(num_arms, 11);
  const RewardTable& rewards = instance.rewards;
  const ConfidenceRegion region = warmed_region(instance, 8, 20, 0.05);
  const double gamma = 0.9;

  std::printf("planning benchmark: %d arms, %d threads available\n\n", num_arms,
              omp_get_max_threads());

  std::vector<double> sink(num_arms);
  for (const char* label : {"p_v + whittle table", "p_m per arm"}) {
    const bool is_pv = label[2] == 'v';
    auto plan = [&](int i) {
      if (is_pv) {
        const OptimisticSolution opt =
            solve_p_v(region.arms[i], rewards, 0.4, gamma);
        double total = 0.0;
        for (int s = 0; s < 2; ++s) {
          total += whittle_index(opt.kernel, rewards, s, gamma).value;
        }
        sink[i] = total;
      } else {
        sink[i] = solve_p_m(region.arms[i], rewards,
                            instance.initial_states[i], gamma).index;
      }
    };
    const double serial = time_planning(num_arms, repetitions, false, plan);
    const double parallel = time_planning(num_arms, repetitions, true, plan);
    std::printf("%-20s serial %7.4f s   openmp %7.4f s   speedup %.2fx\n", label,
                serial, parallel, serial / parallel);
  }

  // Pruned vs unpruned index selection on the true kernels.
  auto provider = [&](int arm, std::optional<double> floor) {
    WhittleOptions opts;
    opts.floor = floor;
    return whittle_index(instance.kernels[arm], rewards,
                         instance.initial_states[arm], gamma, opts);
  };
  double t0 = omp_get_wtime();
  LazyTopK unpruned;
  for (int rep = 0; rep < repetitions; ++rep) {
    unpruned = top_k_pull_lazy(provider, num_arms, budget, false);
  }
  const double full = (omp_get_wtime() - t0) / repetitions;
  t0 = omp_get_wtime();
  LazyTopK pruned;
  for (int rep = 0; rep < repetitions; ++rep) {
    pruned = top_k_pull_lazy(provider, num_arms, budget, true);
  }
  const double cut = (omp_get_wtime() - t0) / repetitions;
  int pruned_count = 0;
  for (const IndexResult& e : pruned.entries) pruned_count += e.pruned ? 1 : 0;
  std::printf("\ntop-%d selection      full %7.4f s   pruned %7.4f s   "
              "(%d of %d searches cut short, same set: %s)\n",
              budget, full, cut, pruned_count, num_arms,
              pruned.pulled == unpruned.pulled ? "yes" : "NO");
  return pruned.pulled == unpruned.pulled ? 0 : 1;
}
