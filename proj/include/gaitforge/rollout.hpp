#pragma once

// Policy adapters and single-episode rollouts.

#include <functional>
#include <span>
#include <vector>

#include "gaitforge/biped_env.hpp"
#include "gaitforge/policy_net.hpp"

namespace gaitforge {

using ActionFn = std::function<RawAction(const Observation&)>;
using StepObserver = std::function<void(const StepResult&, const RawAction&)>;

// Normalizes the observation and runs the network. Holds scratch buffers, so
// use one instance per thread.
class NetworkPolicy {
 public:
  NetworkPolicy(std::span<const double> params, Architecture arch, NormalizationSpec norm)
      : params_(params), net_(std::move(arch)), norm_(norm) {}

  RawAction operator()(const Observation& obs) {
    const auto x = normalize(obs, norm_);
    RawAction a{};
    net_.forward(params_, x, a);
    return a;
  }

 private:
  std::span<const double> params_;
  PolicyNet net_;
  NormalizationSpec norm_;
};

struct EpisodeOutcome {
  double episode_return = 0.0;
  int ticks = 0;
  bool terminated = false;
};

inline EpisodeOutcome run_episode(BipedEnv& env, const ActionFn& policy, std::uint64_t seed,
                                  double vx_desired, double vy_desired,
                                  std::span<const PushEvent> pushes = {},
                                  const StepObserver& observer = {}, int max_ticks = -1) {
  Observation obs = env.reset(seed, vx_desired, vy_desired);
  for (const auto& p : pushes) env.apply_push(p);
  EpisodeOutcome out;
  const int cap = max_ticks < 0 ? env.config().max_ticks : max_ticks;
  while (!env.done() && env.ticks() < cap) {
    const RawAction a = policy(obs);
    const StepResult r = env.step(a);
    out.episode_return += r.reward.total;
    obs = r.observation;
    if (observer) observer(r, a);
  }
  out.ticks = env.ticks();
  out.terminated = env.is_terminated();
  return out;
}

}  // namespace gaitforge
