#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "htspg/envs.hpp"
#include "htspg/features.hpp"
#include "htspg/policy.hpp"
#include "htspg/random.hpp"

namespace htspg {

using GradientVector = std::vector<double>;

struct TrajectoryStep {
  std::vector<double> observation;  // s_t, the state the action was taken in
  double raw_action;
  double clipped_action;
  double reward;
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;
  std::size_t horizon = 0;                  // T; at most T+1 steps
  std::optional<std::size_t> truncated_at;  // step index that hit a terminal state

  double total_reward() const;
};

// T ~ Geometric on {0, 1, 2, ...} with success probability 1 - sqrt(gamma),
// i.e. P(T = t) = (1 - sqrt(gamma)) * sqrt(gamma)^t. Consumes one uniform.
std::size_t sample_horizon(double gamma, RandomStream& rng);

// Runs steps t = 0..horizon from a fresh reset, stopping early if the
// environment terminates. The reset draws from rng.substream("reset"); the
// action draws consume rng itself, one uniform per step.
Trajectory rollout(const Environment& env, const PolicyParams& params,
                   const FeatureMap& features, std::size_t horizon,
                   RandomStream& rng);

// sum_t gamma^{t/2} r_t * sum_{tau <= t} grad log pi(a_tau | s_tau), with the
// inner score sum kept as a running total. Scores use the raw actions.
// Throws NumericalError naming the step of the first non-finite quantity.
GradientVector pg_estimate(const Trajectory& traj, const PolicyParams& params,
                           const FeatureMap& features, double gamma);

struct BatchEstimate {
  GradientVector gradient;   // ordered mean over the batch
  double mean_return = 0.0;  // mean undiscounted trajectory return
};

// One rollout + estimate per stream, all with the same horizon, averaged in
// stream order.
BatchEstimate batch_estimate(const Environment& env, const PolicyParams& params,
                             const FeatureMap& features, double gamma,
                             std::size_t horizon, std::span<RandomStream> streams);

}  // namespace htspg
