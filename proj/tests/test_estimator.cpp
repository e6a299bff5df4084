#include <doctest.h>

#include <boost/math/distributions/cauchy.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <random>

#include "htspg/errors.hpp"
#include "htspg/estimator.hpp"

using namespace htspg;

namespace {

// Observation is always 0, so phi = [0, 1] and only the bias weight matters.
// Single step, reward 1 when the action is negative, then terminal.
class SignBandit final : public Environment {
 public:
  SignBandit()
      : spec_{"sign_bandit", 1, {-1e7, 1e7}, {0}, {0}, FeatureMap::identity_with_bias(1), 1.0, 1} {}
  const EnvSpec& spec() const override { return spec_; }
  EnvState reset(RandomStream&) const override { return {{0.0}, false}; }
  StepOutcome step(const EnvState&, double a) const override {
    return {{{0.0}, true}, a < 0 ? 1.0 : 0.0, true};
  }

 private:
  EnvSpec spec_;
};

// Direct restatement: for every t, discount^t * r_t * (sum of scores up to t),
// with the inner sum recomputed from scratch.
GradientVector naive_estimate(const Trajectory& traj, const PolicyParams& p,
                              const FeatureMap& fm, double gamma) {
  GradientVector out(p.theta.size(), 0.0);
  for (std::size_t t = 0; t < traj.steps.size(); ++t) {
    GradientVector cum(p.theta.size(), 0.0);
    for (std::size_t tau = 0; tau <= t; ++tau) {
      const auto& st = traj.steps[tau];
      const auto s = score(p, fm(st.observation), st.raw_action);
      for (std::size_t i = 0; i < cum.size(); ++i) cum[i] += s[i];
    }
    const double w = std::pow(gamma, 0.5 * static_cast<double>(t)) * traj.steps[t].reward;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w * cum[i];
  }
  return out;
}

Trajectory random_trajectory(std::mt19937_64& gen, std::size_t len) {
  std::uniform_real_distribution<double> u(-1, 1);
  Trajectory t;
  t.horizon = len - 1;
  for (std::size_t i = 0; i < len; ++i) {
    const double a = 3 * u(gen);
    t.steps.push_back({{u(gen), u(gen)}, a, a, u(gen) > 0.3 ? u(gen) : 0.0});
  }
  return t;
}

}  // namespace

TEST_CASE("horizon law") {
  for (double gamma : {0.5, 0.81, 0.99}) {
    const double q = std::sqrt(gamma);
    RandomStream rng(static_cast<std::uint64_t>(gamma * 1000));
    const int n = 1000000;
    std::vector<double> counts;
    double sum = 0;
    for (int i = 0; i < n; ++i) {
      const std::size_t t = sample_horizon(gamma, rng);
      sum += static_cast<double>(t);
      if (t >= counts.size()) counts.resize(t + 1, 0.0);
      counts[t] += 1;
    }
    const double expected_mean = q / (1 - q);
    CHECK(std::abs(sum / n - expected_mean) <= 0.02 * expected_mean);

    // Bins with expected count >= 5; the remaining tail is pooled.
    double chi2 = 0, tail_obs = n, tail_p = 1;
    int dof = 0;
    for (std::size_t t = 0;; ++t) {
      const double p = (1 - q) * std::pow(q, static_cast<double>(t));
      if (n * p < 5) break;  // every cell keeps an expected count of at least 5
      const double obs = t < counts.size() ? counts[t] : 0;
      chi2 += (obs - n * p) * (obs - n * p) / (n * p);
      tail_obs -= obs;
      tail_p -= p;
      ++dof;
    }
    chi2 += (tail_obs - n * tail_p) * (tail_obs - n * tail_p) / (n * tail_p);
    const double crit = boost::math::quantile(boost::math::chi_squared(dof), 0.999);
    CHECK(chi2 < crit);
    if (gamma == 0.81) CHECK(counts[0] / n == doctest::Approx(0.1).epsilon(0.02));
  }
  RandomStream rng(2);
  for (int i = 0; i < 100; ++i) CHECK(sample_horizon(1e-12, rng) == 0);
  CHECK_THROWS_AS(sample_horizon(1.0, rng), ConfigError);
  CHECK_THROWS_AS(sample_horizon(0.0, rng), ConfigError);
}

TEST_CASE("rollout") {
  Mario1D env;
  const auto fm = env.spec().default_feature_map;
  RandomStream rng(1);
  const PolicyParams p{{0.0, 0.0}, 0.05, PolicyFamily::cauchy()};
  const auto t0 = rollout(env, p, fm, 0, rng);
  CHECK(t0.steps.size() == 1);
  CHECK(t0.horizon == 0);

  const PolicyParams pinned{{0.0, -0.1}, 1e-12, PolicyFamily::gaussian()};
  RandomStream r2(5);
  const auto tp = rollout(env, pinned, fm, 20, r2);
  REQUIRE(tp.truncated_at.has_value());
  CHECK(*tp.truncated_at == 9);
  CHECK(tp.steps.size() == 10);
  CHECK(tp.total_reward() == 1.0);

  RandomStream a(77), b(77);
  const auto ta = rollout(env, p, fm, 30, a), tb = rollout(env, p, fm, 30, b);
  REQUIRE(ta.steps.size() == tb.steps.size());
  for (std::size_t i = 0; i < ta.steps.size(); ++i) {
    CHECK(ta.steps[i].raw_action == tb.steps[i].raw_action);
    CHECK(ta.steps[i].observation == tb.steps[i].observation);
  }
}

TEST_CASE("incremental estimate equals the naive double loop") {
  std::mt19937_64 gen(21);
  const auto fm = FeatureMap::identity_with_bias(2);
  const std::vector<PolicyFamily> fams = {PolicyFamily::gaussian(), PolicyFamily::cauchy(),
                                          PolicyFamily::laplace(), PolicyFamily::student_t(3)};
  std::uniform_int_distribution<std::size_t> len(1, 40);
  for (int i = 0; i < 1000; ++i) {
    const PolicyParams p{{0.3, -0.2, 0.1}, 0.7, fams[i % 4]};
    const auto traj = random_trajectory(gen, len(gen));
    const auto fast = pg_estimate(traj, p, fm, 0.9);
    const auto slow = naive_estimate(traj, p, fm, 0.9);
    for (std::size_t k = 0; k < fast.size(); ++k)
      CHECK(std::abs(fast[k] - slow[k]) <= 1e-12 * std::max(1.0, std::abs(slow[k])));
  }
}

TEST_CASE("hand-computed three-step estimate") {
  // Gaussian, sigma 1, phi = [0, 1], theta 0: the bias score is a_t.
  const auto fm = FeatureMap::identity_with_bias(1);
  const PolicyParams p{{0.0, 0.0}, 1.0, PolicyFamily::gaussian()};
  Trajectory t;
  t.horizon = 2;
  t.steps = {{{0.0}, 1.0, 1.0, 0.0}, {{0.0}, 2.0, 2.0, 1.0}, {{0.0}, -1.0, -1.0, 2.0}};
  // gamma = 0.25: weights 1, 0.5, 0.25; cumulative scores 1, 3, 2.
  const auto g = pg_estimate(t, p, fm, 0.25);
  CHECK(g[0] == 0.0);
  CHECK(g[1] == doctest::Approx(0.5 * 1.0 * 3.0 + 0.25 * 2.0 * 2.0));
}

TEST_CASE("zero rewards give a zero gradient; rewards scale linearly") {
  std::mt19937_64 gen(4);
  const auto fm = FeatureMap::identity_with_bias(2);
  const PolicyParams p{{0.3, -0.2, 0.1}, 0.7, PolicyFamily::cauchy()};
  auto traj = random_trajectory(gen, 15);
  const auto base = pg_estimate(traj, p, fm, 0.81);
  for (auto& s : traj.steps) s.reward *= 3.5;
  const auto scaled = pg_estimate(traj, p, fm, 0.81);
  for (std::size_t i = 0; i < base.size(); ++i)
    CHECK(scaled[i] == doctest::Approx(3.5 * base[i]));
  for (auto& s : traj.steps) s.reward = 0;
  for (double v : pg_estimate(traj, p, fm, 0.81)) CHECK(v == 0.0);

  traj.steps[3].reward = NAN;
  CHECK_THROWS_AS(pg_estimate(traj, p, fm, 0.81), NumericalError);
}

TEST_CASE("bandit estimate is unbiased") {
  const double theta = 0.3, sigma = 0.5;
  // Oracle: d/dtheta of P(a < 0) as an integral of pdf * score over a < 0.
  const boost::math::cauchy_distribution<double> c(theta, sigma);
  boost::math::quadrature::exp_sinh<double> integrator;
  const double quad = integrator.integrate(
      [&](double x) {  // a = -x, x in (0, inf)
        const double z = (-x - theta) / sigma;
        return boost::math::pdf(c, -x) * 2 * z / (sigma * (1 + z * z));
      },
      0.0, std::numeric_limits<double>::infinity());
  CHECK(quad == doctest::Approx(-1.0 / (M_PI * sigma * (1 + theta * theta / (sigma * sigma)))));

  SignBandit env;
  const auto& fm = env.spec().default_feature_map;
  const PolicyParams p{{0.0, theta}, sigma, PolicyFamily::cauchy()};
  RandomStream root(99);
  const int n = 100000;
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    RandomStream rng = root.substream("bandit", i);
    const auto traj = rollout(env, p, fm, sample_horizon(0.81, rng), rng);
    const double g = pg_estimate(traj, p, fm, 0.81)[1];
    sum += g;
    sq += g * g;
  }
  const double m = sum / n, se = std::sqrt((sq / n - m * m) / n);
  CHECK(std::abs(m - quad) <= 3 * se);
}
