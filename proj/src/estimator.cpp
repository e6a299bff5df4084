#include "htspg/estimator.hpp"

#include <cmath>
#include <limits>

#include "htspg/errors.hpp"

namespace htspg {

double Trajectory::total_reward() const {
  double sum = 0.0;
  for (const auto& step : steps) sum += step.reward;
  return sum;
}

std::size_t sample_horizon(double gamma, RandomStream& rng) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw ConfigError("gamma must lie in (0,1)");
  // P(T >= t) = q^t with q = sqrt(gamma).
  const double log_q = 0.5 * std::log(gamma);
  const double t = std::floor(std::log(rng.uniform()) / log_q);
  constexpr double cap = 1e9;
  return static_cast<std::size_t>(t < cap ? t : cap);
}

Trajectory rollout(const Environment& env, const PolicyParams& params,
                   const FeatureMap& features, std::size_t horizon,
                   RandomStream& rng) {
  const EnvSpec& spec = env.spec();
  RandomStream reset_rng = rng.substream("reset");
  EnvState state = env.reset(reset_rng);

  Trajectory traj;
  traj.horizon = horizon;
  traj.steps.reserve(std::min<std::size_t>(horizon + 1, 4096));
  std::vector<double> phi(features.output_dim());

  for (std::size_t t = 0; t <= horizon; ++t) {
    features.evaluate(state.observation, phi);
    const ActionSample action = sample_action(params, phi, spec.action_interval, rng);
    StepOutcome out = env.step(state, action.clipped_action);
    traj.steps.push_back(
        {std::move(state.observation), action.raw_action, action.clipped_action, out.reward});
    state = std::move(out.next_state);
    if (out.terminal) {
      traj.truncated_at = t;
      break;
    }
  }
  return traj;
}

GradientVector pg_estimate(const Trajectory& traj, const PolicyParams& params,
                           const FeatureMap& features, double gamma) {
  const std::size_t d = params.theta.size();
  if (features.output_dim() != d)
    throw ConfigError("feature map dimension does not match theta");

  GradientVector grad(d, 0.0);
  std::vector<double> cumulative_score(d, 0.0);
  std::vector<double> phi(d);
  const double sqrt_gamma = std::sqrt(gamma);
  double discount = 1.0;

  for (std::size_t t = 0; t < traj.steps.size(); ++t) {
    const TrajectoryStep& step = traj.steps[t];
    if (!std::isfinite(step.raw_action) || !std::isfinite(step.reward))
      throw NumericalError("non-finite action or reward in trajectory", t);
    features.evaluate(step.observation, phi);
    const double factor =
        score_factor(params.family, params.sigma, step.raw_action - mean(params, phi));
    if (!std::isfinite(factor)) throw NumericalError("non-finite score", t);
    for (std::size_t i = 0; i < d; ++i) cumulative_score[i] += factor * phi[i];

    if (step.reward != 0.0) {
      const double weight = discount * step.reward;
      for (std::size_t i = 0; i < d; ++i) {
        grad[i] += weight * cumulative_score[i];
        if (!std::isfinite(grad[i]))
          throw NumericalError("non-finite gradient accumulation", t);
      }
    }
    discount *= sqrt_gamma;
  }
  return grad;
}

BatchEstimate batch_estimate(const Environment& env, const PolicyParams& params,
                             const FeatureMap& features, double gamma,
                             std::size_t horizon, std::span<RandomStream> streams) {
  if (streams.empty()) throw ConfigError("batch must contain at least one rollout");
  BatchEstimate out;
  out.gradient.assign(params.theta.size(), 0.0);
  for (RandomStream& rng : streams) {
    const Trajectory traj = rollout(env, params, features, horizon, rng);
    const GradientVector g = pg_estimate(traj, params, features, gamma);
    for (std::size_t i = 0; i < g.size(); ++i) out.gradient[i] += g[i];
    out.mean_return += traj.total_reward();
  }
  const double inv = 1.0 / static_cast<double>(streams.size());
  for (double& g : out.gradient) g *= inv;
  out.mean_return *= inv;
  return out;
}

}  // namespace htspg
