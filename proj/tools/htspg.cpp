// Command-line entry point: run, eval, probe-variance, print-default-config.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "htspg/config.hpp"
#include "htspg/errors.hpp"
#include "htspg/harness.hpp"
#include "htspg/optimizers.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw htspg::ConfigError("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int cmd_run(const std::string& path, const std::vector<std::string>& overrides) {
  const htspg::ExperimentConfig config = htspg::parse_config(read_file(path), overrides);
  const auto result = htspg::run_experiment(config, htspg::thread_budget());
  for (const auto& s : result.seeds) {
    std::printf("seed %llu: final mean return %.6g after %zu iterations, %zu clip events%s\n",
                static_cast<unsigned long long>(s.seed),
                s.points.empty() ? 0.0 : s.points.back().mean_return,
                s.points.empty() ? std::size_t{0} : s.points.back().iteration,
                s.clip_iterations.size(), s.failure ? " (FAILED)" : "");
  }
  std::printf("wrote %s\n", config.output.c_str());
  return result.failed ? kExitNumerical : kExitOk;
}

int cmd_eval(const std::string& path) {
  const auto manifest = nlohmann::json::parse(read_file(path));
  const htspg::ExperimentConfig config =
      htspg::parse_config(manifest.at("config_text").get<std::string>());
  const auto env = htspg::make_environment(config.env);
  const htspg::FeatureMap features = config.feature_map(env->spec());
  for (const auto& s : manifest.at("seeds")) {
    const auto seed = s.at("seed").get<std::uint64_t>();
    const auto k = s.at("final_iteration").get<std::size_t>();
    const htspg::PolicyParams params{s.at("final_theta").get<std::vector<double>>(), config.sigma,
                                     config.policy_family()};
    const auto ev = htspg::evaluate_policy(*env, params, features, config.eval_episodes,
                                           htspg::eval_stream(seed, k));
    std::printf("seed %llu iteration %zu: mean return %.17g\n",
                static_cast<unsigned long long>(seed), k, ev.mean_return);
  }
  return kExitOk;
}

int cmd_probe(const std::string& path, const std::vector<std::string>& overrides) {
  const htspg::ExperimentConfig config = htspg::parse_config(read_file(path), overrides);
  const auto env = htspg::make_environment(config.env);
  const htspg::FeatureMap features = config.feature_map(env->spec());
  const htspg::StepContext ctx{*env, features, config.policy_family(), config.sigma,
                               config.gamma, config.batch_size, config.paired_rng};
  const std::vector<double> theta(features.output_dim(), 0.0);
  std::printf("seed,raw_trace,tracked_trace,ratio\n");
  for (auto seed : config.seeds) {
    const auto rep = htspg::variance_probe(ctx, theta, config.beta, config.iterations,
                                           htspg::seed_stream(seed).substream("probe"));
    std::printf("%llu,%.17g,%.17g,%.6g\n", static_cast<unsigned long long>(seed),
                rep.raw_trace, rep.tracked_trace,
                rep.raw_trace > 0 ? rep.tracked_trace / rep.raw_trace : 0.0);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heavy-tailed stochastic policy gradient experiments"};
  app.require_subcommand(1);

  std::string config_path, manifest_path, env_name;
  std::vector<std::string> overrides;

  auto* run = app.add_subcommand("run", "train every seed and write curves");
  run->add_option("--config", config_path, "config file")->required();
  run->add_option("--override", overrides, "key=value, applied after the file");

  auto* eval = app.add_subcommand("eval", "re-evaluate the final policies of a run");
  eval->add_option("--manifest", manifest_path, "manifest.json of a run")->required();

  auto* probe = app.add_subcommand("probe-variance",
                                   "raw vs tracked gradient variance at theta = 0");
  probe->add_option("--config", config_path, "config file")->required();
  probe->add_option("--override", overrides, "key=value, applied after the file");

  auto* defaults = app.add_subcommand("print-default-config", "print a starting config");
  defaults->add_option("env", env_name, "mario1d | pmc | sparse_pendulum")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, overrides);
    if (*eval) return cmd_eval(manifest_path);
    if (*probe) return cmd_probe(config_path, overrides);
    if (*defaults) {
      std::fputs(htspg::serialize_config(htspg::default_config(env_name)).c_str(), stdout);
      return kExitOk;
    }
  } catch (const htspg::ConfigError& e) {
    std::fprintf(stderr, "config error:\n%s\n", e.what());
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "manifest error: %s\n", e.what());
    return kExitConfig;
  } catch (const htspg::NumericalError& e) {
    std::fprintf(stderr, "numerical failure at iteration %zu: %s\n", e.step(), e.what());
    return kExitNumerical;
  }
  return kExitOk;
}
