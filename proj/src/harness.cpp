#include "htspg/harness.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <mutex>
#include <thread>

#include "htspg/errors.hpp"
#include "htspg/optimizers.hpp"

namespace htspg {

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  // Deviations are taken from xs[0] first so constant input gives exactly 0.
  const double x0 = xs.front();
  double shift = 0.0;
  for (double x : xs) shift += x - x0;
  shift /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - x0 - shift) * (x - x0 - shift);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double ordered_mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

}  // namespace

EvalResult evaluate_policy(const Environment& env, const PolicyParams& params,
                           const FeatureMap& features, std::size_t episodes,
                           const RandomStream& rng) {
  if (episodes == 0) throw ConfigError("evaluation needs at least one episode");
  const EnvSpec& spec = env.spec();
  EvalResult out;
  out.returns.reserve(episodes);
  std::vector<double> phi(features.output_dim());

  for (std::size_t m = 0; m < episodes; ++m) {
    RandomStream episode = rng.substream("episode", m);
    RandomStream reset = episode.substream("reset");
    EnvState state = env.reset(reset);
    double ret = 0.0;
    for (int t = 0; t < spec.max_episode_steps; ++t) {
      features.evaluate(state.observation, phi);
      const ActionSample a = sample_action(params, phi, spec.action_interval, episode);
      StepOutcome step = env.step(state, a.clipped_action);
      ret += step.reward;
      state = std::move(step.next_state);
      if (step.terminal) break;
    }
    out.returns.push_back(ret);
  }
  out.mean_return = ordered_mean(out.returns);
  return out;
}

std::size_t samples_per_iteration(const ExperimentConfig& config) {
  return config.batch_size * (config.optimizer == OptimizerKind::kHtspg ? 2 : 1);
}

RandomStream seed_stream(std::uint64_t seed) {
  return RandomStream(RandomStream::mix(seed ^ 0x48545350475f5255ULL));
}

RandomStream eval_stream(std::uint64_t seed, std::size_t iteration) {
  return seed_stream(seed).substream("eval", iteration);
}

SeedCurve run_seed(const ExperimentConfig& config, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  const auto env = make_environment(config.env);
  const FeatureMap features = config.feature_map(env->spec());
  const PolicyFamily family = config.policy_family();
  const RandomStream run = seed_stream(seed).substream("train");
  const StepContext ctx{*env, features, family, config.sigma, config.gamma,
                        config.batch_size, config.paired_rng};

  OptimizerState state = OptimizerState::init(std::vector<double>(features.output_dim(), 0.0),
                                              config.eta, config.beta, config.max_grad_norm);
  SeedCurve curve;
  curve.seed = seed;

  auto record = [&](std::size_t k) {
    const EvalResult ev = evaluate_policy(*env, {state.theta, config.sigma, family}, features,
                                          config.eval_episodes, eval_stream(seed, k));
    if (!std::isfinite(ev.mean_return))
      throw NumericalError("non-finite evaluation return", k);
    CurvePoint p;
    p.iteration = k;
    p.cumulative_samples = k * samples_per_iteration(config);
    p.mean_return = ev.mean_return;
    p.std_return = sample_std(ev.returns);
    p.seed_returns = {ev.mean_return};
    curve.points.push_back(std::move(p));
  };

  try {
    record(0);
    for (std::size_t k = 0; k < config.iterations; ++k) {
      const IterationRecord rec = train_step(config.optimizer, state, ctx, run);
      if (rec.clipped) curve.clip_iterations.push_back(rec.k);
      const std::size_t done = k + 1;
      if (done % config.eval_every == 0 || done == config.iterations) record(done);
    }
  } catch (const NumericalError& e) {
    curve.failure = e.what();
    curve.failed_at = state.k;
  }
  curve.final_theta = state.theta;
  curve.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return curve;
}

std::vector<CurvePoint> aggregate_seeds(const std::vector<SeedCurve>& curves) {
  if (curves.empty()) throw ConfigError("no curves to aggregate");
  const auto& grid = curves.front().points;
  for (const auto& c : curves) {
    if (c.points.size() != grid.size())
      throw ConfigError("curves have different lengths");
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (c.points[i].iteration != grid[i].iteration ||
          c.points[i].cumulative_samples != grid[i].cumulative_samples)
        throw ConfigError("curves do not share an iteration grid");
  }

  std::vector<CurvePoint> out;
  out.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CurvePoint p;
    p.iteration = grid[i].iteration;
    p.cumulative_samples = grid[i].cumulative_samples;
    for (const auto& c : curves) p.seed_returns.push_back(c.points[i].mean_return);
    p.mean_return = ordered_mean(p.seed_returns);
    p.std_return = sample_std(p.seed_returns);
    out.push_back(std::move(p));
  }
  return out;
}

std::string csv_header(const std::vector<std::uint64_t>& seeds) {
  std::string h = "iteration,cumulative_samples,mean_return,std_return";
  for (auto s : seeds) h += ",seed_" + std::to_string(s);
  return h;
}

std::string format_csv(const std::vector<CurvePoint>& points,
                       const std::vector<std::uint64_t>& seeds,
                       const std::optional<std::string>& failure) {
  std::string out = csv_header(seeds) + "\n";
  for (const auto& p : points) {
    out += std::to_string(p.iteration) + "," + std::to_string(p.cumulative_samples) + "," +
           fmt17(p.mean_return) + "," + fmt17(p.std_return);
    for (double r : p.seed_returns) out += "," + fmt17(r);
    out += "\n";
  }
  if (failure) {
    std::string msg = *failure;
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    out += "# FAILED: " + msg + "\n";
  }
  return out;
}

std::string content_hash(const std::string& text) {
  const std::string blob = "blob " + std::to_string(text.size()) + '\0' + text;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(blob.data(), blob.size(), digest, &len, EVP_sha1(), nullptr) != 1)
    throw std::runtime_error("SHA-1 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

unsigned thread_budget() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("HTSPG_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) n = static_cast<unsigned>(v);
  }
  return n;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config, unsigned threads) {
  if (config.seeds.empty()) throw ConfigError("seeds: at least one seed is required");
  const std::filesystem::path out_dir(config.output);
  std::filesystem::create_directories(out_dir);

  RunResult result;
  result.seeds.resize(config.seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < config.seeds.size(); i = next++)
      result.seeds[i] = run_seed(config, config.seeds[i]);
  };
  const unsigned slots =
      std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(config.seeds.size())));
  if (slots == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < slots; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // Seeds that failed are truncated; the aggregate covers the shared prefix.
  std::size_t common = result.seeds.front().points.size();
  std::optional<std::string> failure;
  for (const auto& s : result.seeds) {
    common = std::min(common, s.points.size());
    if (s.failure && !failure)
      failure = "seed " + std::to_string(s.seed) + " iteration " +
                std::to_string(s.failed_at) + ": " + *s.failure;
    write_file(out_dir / ("seed_" + std::to_string(s.seed) + ".csv"),
               format_csv(s.points, {s.seed}, s.failure));
  }
  result.failed = failure.has_value();

  std::vector<SeedCurve> trimmed = result.seeds;
  for (auto& s : trimmed) s.points.resize(common);
  result.aggregate = aggregate_seeds(trimmed);
  write_file(out_dir / "aggregate.csv", format_csv(result.aggregate, config.seeds, failure));

  const std::string text = serialize_config(config);
  nlohmann::ordered_json manifest;
  manifest["config_text"] = text;
  manifest["config_hash"] = content_hash(text);
  manifest["config"] = {
      {"env", config.env},
      {"family", family_name(config.family)},
      {"sigma", config.sigma},
      {"nu", config.nu},
      {"features", config.features},
      {"optimizer", optimizer_name(config.optimizer)},
      {"eta", config.eta},
      {"beta", config.beta},
      {"max_grad_norm", config.max_grad_norm},
      {"paired_rng", config.paired_rng},
      {"gamma", config.gamma},
      {"batch_size", config.batch_size},
      {"iterations", config.iterations},
      {"eval_every", config.eval_every},
      {"eval_episodes", config.eval_episodes},
      {"seeds", config.seeds},
      {"output", config.output},
  };
  if (config.optimizer == OptimizerKind::kSgd && config.family == FamilyKind::kCauchy)
    manifest["note"] = "plain stochastic gradient with a Cauchy policy; approximates RPG (Cauchy)";
  manifest["samples_per_iteration"] = samples_per_iteration(config);
  manifest["status"] = result.failed ? "numerical_failure" : "ok";
  nlohmann::ordered_json seeds = nlohmann::ordered_json::array();
  for (const auto& s : result.seeds) {
    nlohmann::ordered_json j;
    j["seed"] = s.seed;
    j["wall_seconds"] = s.wall_seconds;
    j["clip_events"] = s.clip_iterations.size();
    j["clip_iterations"] = s.clip_iterations;
    j["final_theta"] = s.final_theta;
    j["final_iteration"] = s.points.empty() ? 0 : s.points.back().iteration;
    j["final_mean_return"] = s.points.empty() ? 0.0 : s.points.back().mean_return;
    if (s.failure) j["failure"] = *s.failure;
    seeds.push_back(std::move(j));
  }
  manifest["seeds"] = std::move(seeds);
  write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return result;
}

}  // namespace htspg
