#include "htspg/optimizers.hpp"

#include <cmath>

#include "htspg/errors.hpp"

namespace htspg {

std::string optimizer_name(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::kSgd: return "sgd";
    case OptimizerKind::kMomentum: return "momentum";
    case OptimizerKind::kHtspg: return "htspg";
  }
  return "?";
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "momentum") return OptimizerKind::kMomentum;
  if (name == "htspg") return OptimizerKind::kHtspg;
  throw ConfigError("unknown optimizer '" + std::string(name) +
                    "' (sgd | momentum | htspg)");
}

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

OptimizerState OptimizerState::init(std::vector<double> theta0, double eta,
                                    double beta, double max_grad_norm) {
  OptimizerState s;
  s.prev_theta = theta0;
  s.g.assign(theta0.size(), 0.0);
  s.theta = std::move(theta0);
  s.eta = eta;
  s.beta = beta;
  s.max_grad_norm = max_grad_norm;
  s.validate();
  return s;
}

void OptimizerState::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be positive");
  if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("beta must lie in (0,1]");
  if (prev_theta.size() != theta.size() || g.size() != theta.size())
    throw ConfigError("optimizer state vectors differ in length");
  for (std::size_t i = 0; i < theta.size(); ++i)
    if (!std::isfinite(theta[i]) || !std::isfinite(prev_theta[i]) || !std::isfinite(g[i]))
      throw ConfigError("optimizer state must be finite");
}

namespace {

void check_gradient(const OptimizerState& state, std::span<const double> grad) {
  if (grad.size() != state.theta.size())
    throw ConfigError("gradient dimension does not match theta");
  for (double x : grad)
    if (!std::isfinite(x)) throw NumericalError("non-finite gradient rejected", state.k);
}

// Rescales g to max_grad_norm if needed, then takes the ascent step.
bool apply(OptimizerState& state, GradientVector g) {
  bool clipped = false;
  if (state.max_grad_norm > 0.0) {
    const double norm = l2_norm(g);
    if (norm > state.max_grad_norm) {
      const double scale = state.max_grad_norm / norm;
      for (double& x : g) x *= scale;
      clipped = true;
    }
  }
  state.prev_theta = state.theta;
  for (std::size_t i = 0; i < g.size(); ++i) state.theta[i] += state.eta * g[i];
  state.g = std::move(g);
  ++state.k;
  return clipped;
}

}  // namespace

bool sgd_step(OptimizerState& state, std::span<const double> grad) {
  check_gradient(state, grad);
  return apply(state, GradientVector(grad.begin(), grad.end()));
}

bool momentum_step(OptimizerState& state, std::span<const double> grad) {
  check_gradient(state, grad);
  GradientVector g(grad.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    g[i] = (1.0 - state.beta) * state.g[i] + state.beta * grad[i];
  return apply(state, std::move(g));
}

bool tracking_step(OptimizerState& state, std::span<const double> grad_cur,
                   std::span<const double> grad_prev) {
  check_gradient(state, grad_cur);
  check_gradient(state, grad_prev);
  const double keep = 1.0 - state.beta;
  GradientVector g(grad_cur.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    g[i] = keep * state.g[i] + state.beta * grad_cur[i] +
           keep * (grad_cur[i] - grad_prev[i]);
  return apply(state, std::move(g));
}

IterationStreams IterationStreams::make(const RandomStream& run, std::size_t k,
                                        std::size_t batch_size, bool paired) {
  IterationStreams s{run.substream("horizon", k), {}, {}};
  s.current.reserve(batch_size);
  s.previous.reserve(batch_size);
  for (std::size_t b = 0; b < batch_size; ++b) {
    s.current.push_back(run.substream("rollout", k, b, 0));
    s.previous.push_back(run.substream("rollout", k, b, paired ? 0 : 1));
  }
  return s;
}

namespace {

PolicyParams policy_at(const StepContext& ctx, const std::vector<double>& theta) {
  return {theta, ctx.sigma, ctx.family};
}

}  // namespace

IterationRecord htspg_step(OptimizerState& state, const StepContext& ctx,
                           const RandomStream& run) {
  IterationStreams streams =
      IterationStreams::make(run, state.k, ctx.batch_size, ctx.paired_rng);
  IterationRecord rec;
  rec.k = state.k;
  rec.horizon = sample_horizon(ctx.gamma, streams.horizon);

  const BatchEstimate cur = batch_estimate(ctx.env, policy_at(ctx, state.theta),
                                           ctx.features, ctx.gamma, rec.horizon,
                                           streams.current);
  const BatchEstimate prev = batch_estimate(ctx.env, policy_at(ctx, state.prev_theta),
                                            ctx.features, ctx.gamma, rec.horizon,
                                            streams.previous);
  rec.clipped = tracking_step(state, cur.gradient, prev.gradient);
  rec.g_norm = l2_norm(state.g);
  rec.return_cur = cur.mean_return;
  rec.return_prev = prev.mean_return;
  rec.trajectories = 2 * ctx.batch_size;
  return rec;
}

IterationRecord train_step(OptimizerKind kind, OptimizerState& state,
                           const StepContext& ctx, const RandomStream& run) {
  if (kind == OptimizerKind::kHtspg) return htspg_step(state, ctx, run);

  IterationStreams streams = IterationStreams::make(run, state.k, ctx.batch_size, false);
  IterationRecord rec;
  rec.k = state.k;
  rec.horizon = sample_horizon(ctx.gamma, streams.horizon);
  const BatchEstimate cur = batch_estimate(ctx.env, policy_at(ctx, state.theta),
                                           ctx.features, ctx.gamma, rec.horizon,
                                           streams.current);
  rec.clipped = kind == OptimizerKind::kSgd ? sgd_step(state, cur.gradient)
                                            : momentum_step(state, cur.gradient);
  rec.g_norm = l2_norm(state.g);
  rec.return_cur = cur.mean_return;
  rec.trajectories = ctx.batch_size;
  return rec;
}

namespace {

// Welford accumulator over vectors.
struct RunningVariance {
  explicit RunningVariance(std::size_t d) : mean(d, 0.0), m2(d, 0.0) {}

  void add(std::span<const double> x) {
    ++n;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double delta = x[i] - mean[i];
      mean[i] += delta / static_cast<double>(n);
      m2[i] += delta * (x[i] - mean[i]);
    }
  }

  std::vector<double> variance() const {
    std::vector<double> v(mean.size(), 0.0);
    if (n > 1)
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = m2[i] / static_cast<double>(n - 1);
    return v;
  }

  std::size_t n = 0;
  std::vector<double> mean;
  std::vector<double> m2;
};

double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

VarianceReport variance_probe(const StepContext& ctx, std::span<const double> theta,
                              double beta, std::size_t n_iters, const RandomStream& run,
                              std::size_t warmup) {
  const std::vector<double> frozen(theta.begin(), theta.end());
  OptimizerState state = OptimizerState::init(frozen, 1.0, beta);
  const PolicyParams policy = policy_at(ctx, frozen);
  RunningVariance raw(frozen.size());
  RunningVariance tracked(frozen.size());

  for (std::size_t k = 0; k < n_iters; ++k) {
    IterationStreams streams = IterationStreams::make(run, k, ctx.batch_size, ctx.paired_rng);
    const std::size_t horizon = sample_horizon(ctx.gamma, streams.horizon);
    const BatchEstimate cur =
        batch_estimate(ctx.env, policy, ctx.features, ctx.gamma, horizon, streams.current);
    const BatchEstimate prev =
        batch_estimate(ctx.env, policy, ctx.features, ctx.gamma, horizon, streams.previous);
    tracking_step(state, cur.gradient, prev.gradient);
    state.theta = frozen;
    state.prev_theta = frozen;
    if (k >= warmup) {
      raw.add(cur.gradient);
      tracked.add(state.g);
    }
  }

  VarianceReport report;
  report.raw_variance = raw.variance();
  report.tracked_variance = tracked.variance();
  report.raw_trace = sum(report.raw_variance);
  report.tracked_trace = sum(report.tracked_variance);
  report.samples = raw.n;
  return report;
}

}  // namespace htspg
