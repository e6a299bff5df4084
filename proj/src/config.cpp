#include "htspg/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include "htspg/errors.hpp"

namespace htspg {

namespace {

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) {
    if (!out.empty()) out += '\n';
    out += l;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Entry {
  std::string value;
  std::string where;  // "line 3" or "override 'beta=1'"
};

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{
      "env",        "family",        "sigma",      "nu",         "features",
      "optimizer",  "eta",           "beta",       "max_grad_norm", "paired_rng",
      "gamma",      "batch_size",    "iterations", "eval_every", "eval_episodes",
      "seeds",      "output"};
  return keys;
}

struct EnvDefaults {
  double sigma;
  double gamma;
  std::size_t iterations;
};

EnvDefaults env_defaults(std::string_view env, const EnvSpec& spec) {
  if (env == "pmc") return {spec.default_sigma, 0.81, 1000};
  if (env == "sparse_pendulum") return {spec.default_sigma, 0.99, 500};
  return {spec.default_sigma, 0.81, 500};
}

// Accumulates per-field errors while converting values.
class Reader {
 public:
  Reader(const std::map<std::string, Entry>& entries, std::vector<std::string>& errors)
      : entries_(entries), errors_(errors) {}

  const Entry* find(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }

  void error(const std::string& key, const std::string& msg) {
    const Entry* e = find(key);
    errors_.push_back((e ? e->where + ": " : std::string()) + key + ": " + msg);
  }

  std::optional<double> real(const std::string& key) {
    const Entry* e = find(key);
    if (!e) return std::nullopt;
    double v = 0.0;
    const auto& s = e->value;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
      error(key, "expected a finite number, got '" + s + "'");
      return std::nullopt;
    }
    return v;
  }

  std::optional<std::uint64_t> integer(const std::string& key, std::string_view text) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
      error(key, "expected a non-negative integer, got '" + std::string(text) + "'");
      return std::nullopt;
    }
    return v;
  }

  std::optional<std::uint64_t> integer(const std::string& key) {
    const Entry* e = find(key);
    if (!e) return std::nullopt;
    return integer(key, e->value);
  }

  std::optional<bool> boolean(const std::string& key) {
    const Entry* e = find(key);
    if (!e) return std::nullopt;
    if (e->value == "true" || e->value == "1") return true;
    if (e->value == "false" || e->value == "0") return false;
    error(key, "expected true or false, got '" + e->value + "'");
    return std::nullopt;
  }

 private:
  const std::map<std::string, Entry>& entries_;
  std::vector<std::string>& errors_;
};

void collect_line(std::string_view line, const std::string& where, bool allow_replace,
                  std::map<std::string, Entry>& entries, std::vector<std::string>& errors) {
  const auto hash = line.find('#');
  if (hash != std::string_view::npos) line = line.substr(0, hash);
  line = trim(line);
  if (line.empty()) return;
  const auto eq = line.find('=');
  if (eq == std::string_view::npos) {
    errors.push_back(where + ": expected 'key = value', got '" + std::string(line) + "'");
    return;
  }
  const std::string key(trim(line.substr(0, eq)));
  const std::string value(trim(line.substr(eq + 1)));
  const auto& keys = known_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
    errors.push_back(where + ": unknown key '" + key + "'");
    return;
  }
  if (value.empty()) {
    errors.push_back(where + ": " + key + ": empty value");
    return;
  }
  if (!allow_replace && entries.count(key)) {
    errors.push_back(where + ": duplicate key '" + key + "' (first set at " +
                     entries[key].where + ")");
    return;
  }
  entries[key] = {value, where};
}

}  // namespace

ConfigErrors::ConfigErrors(std::vector<std::string> errors)
    : ConfigError(join_lines(errors)), errors_(std::move(errors)) {}

FeatureMap ExperimentConfig::feature_map(const EnvSpec& env_spec) const {
  return FeatureMap::parse(features, env_spec.observation_dim,
                           env_spec.default_feature_map.scale());
}

ExperimentConfig parse_config(std::string_view text,
                              const std::vector<std::string>& overrides) {
  std::vector<std::string> errors;
  std::map<std::string, Entry> entries;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    ++line_no;
    collect_line(line, "line " + std::to_string(line_no), false, entries, errors);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  for (const auto& ov : overrides) {
    if (ov.find('=') == std::string::npos) {
      errors.push_back("override '" + ov + "': expected key=value");
      continue;
    }
    collect_line(ov, "override '" + ov + "'", true, entries, errors);
  }

  Reader r(entries, errors);
  ExperimentConfig c;

  std::unique_ptr<Environment> env;
  if (const Entry* e = r.find("env")) {
    try {
      env = make_environment(e->value);
      c.env = e->value;
    } catch (const ConfigError& ex) {
      r.error("env", ex.what());
    }
  } else {
    errors.push_back("env: missing required field");
  }

  if (const Entry* e = r.find("optimizer")) {
    try {
      c.optimizer = parse_optimizer(e->value);
    } catch (const ConfigError& ex) {
      r.error("optimizer", ex.what());
    }
  } else {
    errors.push_back("optimizer: missing required field");
  }

  if (const Entry* e = r.find("family")) {
    try {
      c.family = parse_family(e->value);
    } catch (const ConfigError& ex) {
      r.error("family", ex.what());
    }
  }

  std::optional<EnvDefaults> defaults;
  if (env) defaults = env_defaults(c.env, env->spec());

  if (auto v = r.real("sigma")) {
    if (*v > 0.0) c.sigma = *v; else r.error("sigma", "sigma must be positive");
  } else if (defaults) {
    c.sigma = defaults->sigma;
  }
  if (auto v = r.real("nu")) {
    if (*v > 0.0) c.nu = *v; else r.error("nu", "nu must be positive");
  }
  if (auto v = r.real("eta")) {
    if (*v > 0.0) c.eta = *v; else r.error("eta", "eta must be positive");
  }
  if (auto v = r.real("beta")) {
    if (*v > 0.0 && *v <= 1.0) c.beta = *v; else r.error("beta", "beta must lie in (0,1]");
  }
  if (auto v = r.real("max_grad_norm")) {
    if (*v >= 0.0) c.max_grad_norm = *v;
    else r.error("max_grad_norm", "max_grad_norm must be >= 0 (0 disables)");
  }
  if (auto v = r.boolean("paired_rng")) c.paired_rng = *v;
  if (auto v = r.real("gamma")) {
    if (*v > 0.0 && *v < 1.0) c.gamma = *v; else r.error("gamma", "gamma must lie in (0,1)");
  } else if (defaults) {
    c.gamma = defaults->gamma;
  }
  if (auto v = r.integer("batch_size")) {
    if (*v >= 1) c.batch_size = *v; else r.error("batch_size", "batch_size must be >= 1");
  }
  if (auto v = r.integer("iterations")) {
    c.iterations = *v;
  } else if (defaults && !r.find("iterations")) {
    c.iterations = defaults->iterations;
  }
  if (auto v = r.integer("eval_every")) {
    if (*v >= 1) c.eval_every = *v; else r.error("eval_every", "eval_every must be >= 1");
  }
  if (auto v = r.integer("eval_episodes")) {
    if (*v >= 1) c.eval_episodes = *v; else r.error("eval_episodes", "eval_episodes must be >= 1");
  }

  if (const Entry* e = r.find("seeds")) {
    std::set<std::uint64_t> seen;
    std::string_view rest = e->value;
    bool ok = true;
    while (ok) {
      const auto comma = rest.find(',');
      const auto item = trim(rest.substr(0, comma));
      if (auto v = r.integer("seeds", item)) {
        if (!seen.insert(*v).second) {
          r.error("seeds", "duplicate seed " + std::to_string(*v));
          ok = false;
        }
        c.seeds.push_back(*v);
      } else {
        ok = false;
      }
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
  } else {
    for (std::uint64_t s = 1; s <= 10; ++s) c.seeds.push_back(s);
  }

  if (const Entry* e = r.find("output")) c.output = e->value;
  else if (!c.env.empty()) c.output = "runs/" + c.env;

  if (env) {
    const EnvSpec& spec = env->spec();
    const std::string features =
        r.find("features") ? r.find("features")->value : spec.default_feature_map.describe();
    try {
      c.features = FeatureMap::parse(features, spec.observation_dim,
                                     spec.default_feature_map.scale())
                       .describe();
    } catch (const ConfigError& ex) {
      r.error("features", ex.what());
    }
  }

  if (!errors.empty()) throw ConfigErrors(std::move(errors));
  return c;
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "env = " << c.env << '\n'
      << "family = " << family_name(c.family) << '\n'
      << "sigma = " << format_double(c.sigma) << '\n'
      << "nu = " << format_double(c.nu) << '\n'
      << "features = " << c.features << '\n'
      << "optimizer = " << optimizer_name(c.optimizer) << '\n'
      << "eta = " << format_double(c.eta) << '\n'
      << "beta = " << format_double(c.beta) << '\n'
      << "max_grad_norm = " << format_double(c.max_grad_norm) << '\n'
      << "paired_rng = " << (c.paired_rng ? "true" : "false") << '\n'
      << "gamma = " << format_double(c.gamma) << '\n'
      << "batch_size = " << c.batch_size << '\n'
      << "iterations = " << c.iterations << '\n'
      << "eval_every = " << c.eval_every << '\n'
      << "eval_episodes = " << c.eval_episodes << '\n'
      << "seeds = ";
  for (std::size_t i = 0; i < c.seeds.size(); ++i) out << (i ? "," : "") << c.seeds[i];
  out << '\n' << "output = " << c.output << '\n';
  return out.str();
}

ExperimentConfig default_config(std::string_view env) {
  return parse_config("env = " + std::string(env) + "\noptimizer = htspg\n");
}

}  // namespace htspg
