#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "htspg/config.hpp"
#include "htspg/envs.hpp"
#include "htspg/features.hpp"
#include "htspg/policy.hpp"
#include "htspg/random.hpp"

namespace htspg {

struct EvalResult {
  double mean_return = 0.0;
  std::vector<double> returns;  // one undiscounted return per episode
};

// Runs `episodes` episodes to termination or max_episode_steps. Episode m
// draws everything from rng.substream("episode", m), so evaluation never
// touches training streams.
EvalResult evaluate_policy(const Environment& env, const PolicyParams& params,
                           const FeatureMap& features, std::size_t episodes,
                           const RandomStream& rng);

struct CurvePoint {
  std::size_t iteration = 0;
  std::size_t cumulative_samples = 0;
  double mean_return = 0.0;
  double std_return = 0.0;
  std::vector<double> seed_returns;  // per-seed means (aggregate) or the seed's mean
};

struct SeedCurve {
  std::uint64_t seed = 0;
  std::vector<CurvePoint> points;
  std::vector<double> final_theta;
  std::vector<std::size_t> clip_iterations;  // iterations whose g was norm-clipped
  double wall_seconds = 0.0;
  std::optional<std::string> failure;  // set when training hit a non-finite value
  std::size_t failed_at = 0;
};

// Trains one seed from theta = 0 and evaluates every eval_every iterations
// (plus iteration 0 and the final iteration).
SeedCurve run_seed(const ExperimentConfig& config, std::uint64_t seed);

// Pointwise mean and sample standard deviation across seeds. Throws
// ConfigError when the curves do not share an iteration grid.
std::vector<CurvePoint> aggregate_seeds(const std::vector<SeedCurve>& curves);

// Trajectories consumed per training iteration.
std::size_t samples_per_iteration(const ExperimentConfig& config);

// Random stream owning all randomness of one seed.
RandomStream seed_stream(std::uint64_t seed);
// Stream used to evaluate after `iteration` training iterations.
RandomStream eval_stream(std::uint64_t seed, std::size_t iteration);

std::string csv_header(const std::vector<std::uint64_t>& seeds);
std::string format_csv(const std::vector<CurvePoint>& points,
                       const std::vector<std::uint64_t>& seeds,
                       const std::optional<std::string>& failure = std::nullopt);

struct RunResult {
  std::vector<SeedCurve> seeds;
  std::vector<CurvePoint> aggregate;
  bool failed = false;
};

// Runs every seed (up to `threads` at a time, merged in seed order) and
// writes seed_<s>.csv, aggregate.csv and manifest.json into config.output.
RunResult run_experiment(const ExperimentConfig& config, unsigned threads = 1);

// Git blob hash of the canonical config text.
std::string content_hash(const std::string& text);

// Worker-slot cap from HTSPG_THREADS (default: hardware concurrency).
unsigned thread_budget();

}  // namespace htspg
