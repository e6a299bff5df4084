#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "htspg/envs.hpp"
#include "htspg/estimator.hpp"
#include "htspg/features.hpp"
#include "htspg/policy.hpp"
#include "htspg/random.hpp"

namespace htspg {

enum class OptimizerKind { kSgd, kMomentum, kHtspg };

std::string optimizer_name(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view name);  // throws ConfigError

struct OptimizerState {
  std::vector<double> theta;       // theta_k
  std::vector<double> prev_theta;  // theta_{k-1}; equals theta before the first step
  GradientVector g;                // tracked direction, zero before the first step
  std::size_t k = 0;
  double eta = 0.01;
  double beta = 0.2;
  double max_grad_norm = 0.0;  // <= 0 disables the clip

  static OptimizerState init(std::vector<double> theta0, double eta, double beta,
                             double max_grad_norm = 0.0);
  void validate() const;  // throws ConfigError
};

// All three updates ascend. Each throws NumericalError and leaves the state
// untouched if an input gradient is non-finite. The return value reports
// whether g was rescaled to max_grad_norm.

// theta <- theta + eta * grad
bool sgd_step(OptimizerState& state, std::span<const double> grad);

// g <- (1-beta) g + beta grad;  theta <- theta + eta g
bool momentum_step(OptimizerState& state, std::span<const double> grad);

// g <- (1-beta) g + beta G_cur + (1-beta)(G_cur - G_prev);  theta <- theta + eta g
// where G_cur is estimated at theta_k and G_prev at theta_{k-1}.
bool tracking_step(OptimizerState& state, std::span<const double> grad_cur,
                   std::span<const double> grad_prev);

// Everything a training iteration needs besides the optimizer state.
struct StepContext {
  const Environment& env;
  const FeatureMap& features;
  PolicyFamily family;
  double sigma;
  double gamma;
  std::size_t batch_size;
  // Drive the theta_{k-1} rollouts with the same streams as the theta_k
  // rollouts (common random numbers) instead of independent ones.
  bool paired_rng = false;
};

struct IterationRecord {
  std::size_t k = 0;
  std::size_t horizon = 0;
  double g_norm = 0.0;
  double return_cur = 0.0;   // mean undiscounted return of the theta_k batch
  double return_prev = 0.0;  // same for the theta_{k-1} batch (htspg only)
  std::size_t trajectories = 0;
  bool clipped = false;
};

// Random streams consumed by iteration k of a run rooted at `run`. Every
// optimizer uses the same horizon and theta_k streams, so different update
// rules can be compared on a shared trajectory stream.
struct IterationStreams {
  RandomStream horizon;
  std::vector<RandomStream> current;
  std::vector<RandomStream> previous;

  static IterationStreams make(const RandomStream& run, std::size_t k,
                               std::size_t batch_size, bool paired);
};

// One iteration of the chosen optimizer: horizon draw, batch rollouts, update.
IterationRecord train_step(OptimizerKind kind, OptimizerState& state,
                           const StepContext& ctx, const RandomStream& run);

// One iteration of the two-trajectory tracking scheme: a single horizon T_k
// shared by a batch at theta_k and a batch at theta_{k-1}.
IterationRecord htspg_step(OptimizerState& state, const StepContext& ctx,
                           const RandomStream& run);

struct VarianceReport {
  std::vector<double> raw_variance;      // per component, raw estimator
  std::vector<double> tracked_variance;  // per component, tracked g_k
  double raw_trace = 0.0;
  double tracked_trace = 0.0;
  std::size_t samples = 0;  // iterations after warmup
};

// Runs the tracking recursion with theta frozen (no parameter updates) and
// reports sample variances of the raw batch estimate and of g_k over the
// iterations after `warmup`. ctx.paired_rng selects whether the theta_{k-1}
// estimate shares random numbers with the theta_k one.
VarianceReport variance_probe(const StepContext& ctx, std::span<const double> theta,
                              double beta, std::size_t n_iters, const RandomStream& run,
                              std::size_t warmup = 50);

double l2_norm(std::span<const double> v);

}  // namespace htspg
