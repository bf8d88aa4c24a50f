#include "ucw/learners.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <optional>

namespace ucw {

namespace {

// Per-arm planning fan-out. The serial path (parallel=false) is the reference
// the tests compare against; exceptions from worker iterations are rethrown
// after the join.
template <typename Fn>
void plan_arms(int num_arms, bool parallel, Fn&& fn) {
  std::exception_ptr error = nullptr;
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int i = 0; i < num_arms; ++i) {
    try {
      fn(i);
    } catch (...) {
#pragma omp critical(ucw_plan_arms_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

Learner::Learner(const LearnerContext& ctx)
    : num_arms_(ctx.instance->num_arms()),
      num_states_(ctx.instance->rewards.num_states()),
      num_actions_(ctx.instance->rewards.num_actions()),
      budget_(ctx.instance->budget),
      horizon_(ctx.horizon),
      gamma_(ctx.gamma),
      delta_(ctx.delta),
      vi_tol_(ctx.vi_tol),
      parallel_(ctx.parallel),
      rewards_(ctx.instance->rewards),
      counts_(ctx.instance->num_arms(), ctx.instance->rewards.num_states(),
              ctx.instance->rewards.num_actions()),
      rng_(ctx.seed) {
  if (budget_ < 0 || budget_ > num_arms_) {
    throw std::invalid_argument("Learner: budget must lie in [0, num_arms]");
  }
}

void Learner::observe(const std::vector<StepRecord>& records) {
  std::vector<Observation> observations;
  observations.reserve(records.size());
  for (const StepRecord& r : records) {
    if (!std::isfinite(r.reward)) {
      throw std::invalid_argument("observe: non-finite reward");
    }
    observations.push_back(Observation{r.arm, r.s, r.a, r.s_next});
  }
  counts_.record(observations);  // validates index ranges
}

namespace {

class IndexTableLearner : public Learner {
 public:
  using Learner::Learner;

  ActionSet act(const std::vector<int>& states) override {
    if (table_.indices.empty()) {
      throw std::logic_error("act called before begin_episode");
    }
    ++step_;
    return ActionSet{top_k_pull(table_, states, budget_)};
  }

  void end_episode() override {
    if (update_penalty_ && budget_ >= 1 && !table_.indices.empty()) {
      penalty_ = kth_largest_index(table_, episode_initial_states_, budget_);
    }
  }

 protected:
  void start(const std::vector<int>& initial_states, int episode) {
    if (episode < 1) throw std::invalid_argument("begin_episode: episode must be >= 1");
    if (initial_states.size() != static_cast<size_t>(num_arms_)) {
      throw std::invalid_argument("begin_episode: one initial state per arm");
    }
    episode_ = episode;
    step_ = 0;
    episode_initial_states_ = initial_states;
    table_.indices.assign(num_arms_, std::vector<double>(num_states_, 0.0));
    table_.source = std::string(name()) + "@t" + std::to_string(episode);
  }

  WhittleOptions whittle_options(bool deferred_store) {
    WhittleOptions opts;
    opts.vi_tol = vi_tol_;
    opts.memoizer = &memoizer_;
    opts.memoizer_store = !deferred_store;
    return opts;
  }

  // Index every state of each arm's planning kernel. Memoizer writes are
  // deferred and applied in arm order so parallel and serial planning produce
  // identical state.
  void fill_table_from_kernels(const std::vector<std::optional<TransitionKernel>>& kernels) {
    plan_arms(num_arms_, parallel_, [&](int i) {
      WhittleOptions opts = whittle_options(/*deferred_store=*/true);
      for (int s = 0; s < num_states_; ++s) {
        table_.indices[i][s] =
            whittle_index(*kernels[i], rewards_, s, gamma_, opts).value;
      }
    });
    for (int i = 0; i < num_arms_; ++i) {
      for (int s = 0; s < num_states_; ++s) {
        memoizer_.store(*kernels[i], s, table_.indices[i][s]);
      }
    }
  }

  WhittleTable table_;
  std::vector<int> episode_initial_states_;
  bool update_penalty_ = true;
};

class UcwValueLearner : public IndexTableLearner {
 public:
  explicit UcwValueLearner(const LearnerContext& ctx)
      : IndexTableLearner(ctx), zero_radius_kernels_(ctx.zero_radius_kernels) {
    penalty_ = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
  }

  std::string_view name() const override { return "ucw-value"; }

  void begin_episode(const std::vector<int>& initial_states, int episode) override {
    start(initial_states, episode);
    const ConfidenceRegion region = make_region(episode);
    std::vector<std::optional<TransitionKernel>> chosen(num_arms_);
    plan_arms(num_arms_, parallel_, [&](int i) {
      SolveOptions solve_opts;
      solve_opts.tol = vi_tol_;
      OptimisticSolution opt =
          solve_p_v(region.arms[i], rewards_, penalty_, gamma_, solve_opts);
      chosen[i] = std::move(opt.kernel);
    });
    fill_table_from_kernels(chosen);
  }

 private:
  ConfidenceRegion make_region(int episode) const {
    if (zero_radius_kernels_ != nullptr) {
      ConfidenceRegion region;
      region.episode = episode;
      region.delta = delta_;
      for (const TransitionKernel& kernel : *zero_radius_kernels_) {
        region.arms.push_back(ArmRegion{
            kernel, std::vector<double>(
                        static_cast<size_t>(num_states_) * num_actions_, 0.0)});
      }
      return region;
    }
    return build_region(counts_, episode, delta_);
  }

  const std::vector<TransitionKernel>* zero_radius_kernels_;
};

class UcwPenaltyLearner : public IndexTableLearner {
 public:
  explicit UcwPenaltyLearner(const LearnerContext& ctx) : IndexTableLearner(ctx) {
    penalty_ = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
  }

  std::string_view name() const override { return "ucw-penalty"; }

  void begin_episode(const std::vector<int>& initial_states, int episode) override {
    start(initial_states, episode);
    const ConfidenceRegion region = build_region(counts_, episode, delta_);
    std::vector<char> cap_hit(num_arms_, 0);
    plan_arms(num_arms_, parallel_, [&](int i) {
      WhittleOptions opts;
      opts.vi_tol = vi_tol_;
      PmResult result =
          solve_p_m(region.arms[i], rewards_, initial_states[i], gamma_, opts);
      // The P_m value is the arm's optimistic index for the whole episode.
      std::fill(table_.indices[i].begin(), table_.indices[i].end(), result.index);
      cap_hit[i] = result.hit_alternation_cap ? 1 : 0;
    });
    const int caps = std::accumulate(cap_hit.begin(), cap_hit.end(), 0);
    alternation_cap_hits_ += caps;
    if (caps > 0 && !warned_) {
      std::cerr << "ucw-penalty: gap maximization hit the alternation cap on "
                << caps << " arm(s); last iterate used\n";
      warned_ = true;
    }
  }

  std::int64_t alternation_cap_hits() const { return alternation_cap_hits_; }

 private:
  std::int64_t alternation_cap_hits_ = 0;
  bool warned_ = false;
};

class ExtremeLearner : public IndexTableLearner {
 public:
  explicit ExtremeLearner(const LearnerContext& ctx) : IndexTableLearner(ctx) {
    penalty_ = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
  }

  std::string_view name() const override { return "extreme"; }

  void begin_episode(const std::vector<int>& initial_states, int episode) override {
    start(initial_states, episode);
    const ConfidenceRegion region = build_region(counts_, episode, delta_);
    std::vector<std::optional<TransitionKernel>> chosen(num_arms_);
    plan_arms(num_arms_, parallel_, [&](int i) {
      chosen[i] = extreme_kernel(region.arms[i]);
    });
    fill_table_from_kernels(chosen);
  }
};

class OracleLearner : public IndexTableLearner {
 public:
  explicit OracleLearner(const LearnerContext& ctx)
      : IndexTableLearner(ctx), true_kernels_(&ctx.instance->kernels) {
    update_penalty_ = false;
    // True indices never change: compute the full table once.
    cached_.indices.assign(num_arms_, std::vector<double>(num_states_, 0.0));
    std::vector<std::optional<TransitionKernel>> kernels(num_arms_);
    for (int i = 0; i < num_arms_; ++i) kernels[i] = (*true_kernels_)[i];
    table_ = cached_;
    fill_table_from_kernels(kernels);
    cached_ = table_;
  }

  std::string_view name() const override { return "oracle"; }

  void begin_episode(const std::vector<int>& initial_states, int episode) override {
    start(initial_states, episode);
    table_ = cached_;
  }

 private:
  const std::vector<TransitionKernel>* true_kernels_;
  WhittleTable cached_;
};

class RandomLearner : public Learner {
 public:
  using Learner::Learner;

  std::string_view name() const override { return "random"; }

  void begin_episode(const std::vector<int>&, int episode) override {
    if (episode < 1) throw std::invalid_argument("begin_episode: episode must be >= 1");
    episode_ = episode;
    step_ = 0;
  }

  ActionSet act(const std::vector<int>&) override {
    ++step_;
    std::vector<int> arms(num_arms_);
    std::iota(arms.begin(), arms.end(), 0);
    std::vector<int> picked;
    picked.reserve(budget_);
    std::sample(arms.begin(), arms.end(), std::back_inserter(picked), budget_, rng_);
    return ActionSet{std::move(picked)};
  }
};

}  // namespace

WiqlLearner::WiqlLearner(const LearnerContext& ctx)
    : Learner(ctx),
      q_(static_cast<size_t>(num_arms_) * num_states_ * num_actions_, 0.0),
      visits_(q_.size(), 0) {}

void WiqlLearner::begin_episode(const std::vector<int>& initial_states, int episode) {
  if (episode < 1) throw std::invalid_argument("begin_episode: episode must be >= 1");
  (void)initial_states;
  episode_ = episode;
  step_ = 0;
}

ActionSet WiqlLearner::act(const std::vector<int>& states) {
  ++step_;
  const double eps =
      epsilon_override_.value_or(static_cast<double>(num_arms_) /
                                 (num_arms_ + episode_ * horizon_ + step_));
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
  if (u < eps) {
    return ActionSet{random_subset()};
  }
  LazyTopK top = top_k_pull_lazy(
      [&](int arm, std::optional<double>) {
        return IndexResult{q_gap(arm, states[arm]), false};
      },
      num_arms_, budget_, /*prune=*/false);
  return ActionSet{std::move(top.pulled)};
}

void WiqlLearner::observe(const std::vector<StepRecord>& records) {
  Learner::observe(records);
  for (const StepRecord& r : records) {
    const size_t at = slot(r.arm, r.s, r.a);
    const double alpha = 1.0 / (1.0 + visits_[at]);
    double best_next = -std::numeric_limits<double>::infinity();
    for (int a2 = 0; a2 < num_actions_; ++a2) {
      best_next = std::max(best_next, q_[slot(r.arm, r.s_next, a2)]);
    }
    q_[at] = (1.0 - alpha) * q_[at] + alpha * (r.reward + gamma_ * best_next);
    ++visits_[at];
  }
}

double WiqlLearner::q_gap(int arm, int state) const {
  return q_[slot(arm, state, 1)] - q_[slot(arm, state, 0)];
}

std::vector<int> WiqlLearner::random_subset() {
  std::vector<int> arms(num_arms_);
  std::iota(arms.begin(), arms.end(), 0);
  std::vector<int> picked;
  picked.reserve(budget_);
  std::sample(arms.begin(), arms.end(), std::back_inserter(picked), budget_, rng_);
  return picked;
}

int learner_ordinal(std::string_view name) {
  if (name == "ucw-value") return 1;
  if (name == "ucw-penalty") return 2;
  if (name == "extreme") return 3;
  if (name == "wiql") return 4;
  if (name == "random") return 5;
  if (name == "oracle") return 6;
  throw std::invalid_argument("unknown learner: " + std::string(name));
}

std::unique_ptr<Learner> make_learner(std::string_view name, const LearnerContext& ctx) {
  if (ctx.instance == nullptr) {
    throw std::invalid_argument("make_learner: instance required");
  }
  if (name == "ucw-value") return std::make_unique<UcwValueLearner>(ctx);
  if (name == "ucw-penalty") return std::make_unique<UcwPenaltyLearner>(ctx);
  if (name == "extreme") return std::make_unique<ExtremeLearner>(ctx);
  if (name == "wiql") return std::make_unique<WiqlLearner>(ctx);
  if (name == "random") return std::make_unique<RandomLearner>(ctx);
  if (name == "oracle") return std::make_unique<OracleLearner>(ctx);
  throw std::invalid_argument("unknown learner: " + std::string(name));
}

}  // namespace ucw
