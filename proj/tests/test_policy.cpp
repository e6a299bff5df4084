#include <doctest.h>

#include <boost/math/distributions/cauchy.hpp>
#include <boost/math/distributions/laplace.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <random>

#include "htspg/errors.hpp"
#include "htspg/policy.hpp"

using namespace htspg;

namespace {

const std::vector<PolicyFamily> kFamilies = {PolicyFamily::gaussian(), PolicyFamily::cauchy(),
                                             PolicyFamily::laplace(),
                                             PolicyFamily::student_t(2.0)};

// Reference log-density from boost, standardised by sigma.
double boost_log_density(const PolicyFamily& f, double sigma, double x) {
  using namespace boost::math;
  switch (f.kind) {
    case FamilyKind::kGaussian: return std::log(pdf(normal_distribution<>(0, sigma), x));
    case FamilyKind::kCauchy: return std::log(pdf(cauchy_distribution<>(0, sigma), x));
    case FamilyKind::kLaplace: return std::log(pdf(laplace_distribution<>(0, sigma), x));
    case FamilyKind::kStudentT:
      return std::log(pdf(students_t_distribution<>(f.nu), x / sigma) / sigma);
  }
  return 0;
}

double boost_cdf(const PolicyFamily& f, double sigma, double x) {
  using namespace boost::math;
  switch (f.kind) {
    case FamilyKind::kGaussian: return cdf(normal_distribution<>(0, sigma), x);
    case FamilyKind::kCauchy: return cdf(cauchy_distribution<>(0, sigma), x);
    case FamilyKind::kLaplace: return cdf(laplace_distribution<>(0, sigma), x);
    case FamilyKind::kStudentT: return cdf(students_t_distribution<>(f.nu), x / sigma);
  }
  return 0;
}

}  // namespace

TEST_CASE("mean is the inner product") {
  const std::vector<double> phi{0.9, 1.0};
  CHECK(mean({{0, 0}, 1.0, {}}, phi) == 0.0);
  CHECK(mean({{1, 0}, 1.0, {}}, phi) == doctest::Approx(0.9));
  CHECK(mean({{0.5, -0.2}, 1.0, {}}, phi) == doctest::Approx(0.25));
}

TEST_CASE("sampling and clipping") {
  RandomStream rng(7);
  const std::vector<double> phi{1.0};
  const auto a = sample_action({{0.3}, 1e-12, PolicyFamily::gaussian()}, phi, {-1, 1}, rng);
  CHECK(a.clipped_action == doctest::Approx(0.3));
  CHECK(ActionInterval{-0.1, 0.1}.clip(7.4) == 0.1);

  // A raw draw inside the interval is left alone; outside it is projected.
  RandomStream r2(11);
  for (int i = 0; i < 1000; ++i) {
    const auto s = sample_action({{0.0}, 0.05, PolicyFamily::cauchy()}, phi, {-0.1, 0.1}, r2);
    CHECK(std::abs(s.clipped_action) <= 0.1);
    if (std::abs(s.raw_action) <= 0.1) CHECK(s.clipped_action == s.raw_action);
    CHECK(std::abs(s.raw_action) <= kRawActionBound);
  }
}

TEST_CASE("log_prob examples") {
  const std::vector<double> phi{1.0};
  CHECK(log_prob({{0.0}, 1.0, PolicyFamily::cauchy()}, phi, 0.0) ==
        doctest::Approx(-std::log(M_PI)));
  CHECK(log_prob({{0.0}, 1.0, PolicyFamily::gaussian()}, phi, 0.0) ==
        doctest::Approx(-0.5 * std::log(2 * M_PI)));
  CHECK(log_prob({{0.0}, 0.5, PolicyFamily::cauchy()}, phi, 0.5) ==
        doctest::Approx(-std::log(0.5 * M_PI) - std::log(2.0)));
}

TEST_CASE("log density agrees with boost for every family") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> xs(-5, 5), ss(0.05, 3);
  for (const auto& f : kFamilies)
    for (int i = 0; i < 200; ++i) {
      const double x = xs(gen), s = ss(gen);
      const double ref = boost_log_density(f, s, x);
      if (!std::isfinite(ref)) continue;  // pdf underflows in the oracle
      CHECK(log_density(f, s, x) == doctest::Approx(ref).epsilon(1e-10));
    }
}

TEST_CASE("quantile inverts the boost cdf") {
  for (const auto& f : kFamilies)
    for (double u : {1e-6, 0.01, 0.3, 0.5, 0.77, 0.999}) {
      const double x = quantile(f, 0.7, u);
      CHECK(boost_cdf(f, 0.7, x) == doctest::Approx(u).epsilon(1e-9));
    }
}

TEST_CASE("score examples") {
  const std::vector<double> phi{0.9, 1.0};
  for (const auto& f : kFamilies) {
    const auto s = score({{0.2, 0.1}, 0.7, f}, phi, 0.28);
    CHECK(s[0] == 0.0);
    CHECK(s[1] == 0.0);
  }
  const auto c = score({{0, 0}, 1.0, PolicyFamily::cauchy()}, phi, 1.0);
  CHECK(c[0] == doctest::Approx(0.9));
  CHECK(c[1] == doctest::Approx(1.0));
  const std::vector<double> one{1.0};
  CHECK(score({{0}, 0.5, PolicyFamily::gaussian()}, one, 0.25)[0] == doctest::Approx(1.0));
}

TEST_CASE("score matches central finite differences") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-2, 2), us(0.1, 2);
  for (const auto& f : kFamilies)
    for (int trial = 0; trial < 100; ++trial) {
      PolicyParams p{{u(gen), u(gen), u(gen)}, us(gen), f};
      const std::vector<double> phi{u(gen), u(gen), 1.0};
      double a = mean(p, phi) + u(gen) * p.sigma;
      if (f.kind == FamilyKind::kLaplace && std::abs(a - mean(p, phi)) < 1e-3) a += 0.01;
      const auto s = score(p, phi, a);
      for (std::size_t i = 0; i < 3; ++i) {
        const double h = 1e-6;
        PolicyParams hi = p, lo = p;
        hi.theta[i] += h;
        lo.theta[i] -= h;
        const double fd = (log_prob(hi, phi, a) - log_prob(lo, phi, a)) / (2 * h);
        CHECK(std::abs(s[i] - fd) <= 1e-8 + 1e-5 * std::abs(fd));
      }
    }
}

TEST_CASE("densities integrate to one") {
  boost::math::quadrature::tanh_sinh<double> integrator;
  for (const auto& f : kFamilies)
    for (double sigma : {0.05, 1.0, 4.0}) {
      // x = tan(t) maps (-pi/2, pi/2) onto the real line.
      auto g = [&](double t) {
        const double x = std::tan(t);
        return std::exp(log_density(f, sigma, x)) / (std::cos(t) * std::cos(t));
      };
      const double z = integrator.integrate(g, -M_PI / 2, M_PI / 2);
      CHECK(z == doctest::Approx(1.0).epsilon(1e-3));
    }
}

TEST_CASE("Cauchy score is bounded, Gaussian score is not") {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(-1, 1), us(0.01, 3);
  std::cauchy_distribution<double> wild(0, 100);
  for (int i = 0; i < 100000; ++i) {
    const double sigma = us(gen);
    PolicyParams p{{u(gen), u(gen)}, sigma, PolicyFamily::cauchy()};
    const std::vector<double> phi{10 * u(gen), 1.0};
    const auto s = score(p, phi, wild(gen));
    const double ns = std::hypot(s[0], s[1]), nphi = std::hypot(phi[0], phi[1]);
    CHECK(ns <= nphi / sigma * (1 + 1e-12));
  }
  bool found = false;
  for (double dev = 1; dev < 1e4 && !found; dev *= 2)
    found = std::abs(score_factor(PolicyFamily::gaussian(), 1.0, dev)) > 10.0;
  CHECK(found);
}

TEST_CASE("tail mass ordering") {
  // P(|X| > 5 sigma): Gaussian < Laplace < Student-t(2) < Cauchy.
  auto tail = [](const PolicyFamily& f) { return 2 * (1 - boost_cdf(f, 1.0, 5.0)); };
  CHECK(tail(PolicyFamily::gaussian()) < tail(PolicyFamily::laplace()));
  CHECK(tail(PolicyFamily::laplace()) < tail(PolicyFamily::student_t(2)));
  CHECK(tail(PolicyFamily::student_t(2)) < tail(PolicyFamily::cauchy()));
  // And the sampler realises it: far more Cauchy than Gaussian draws beyond 5 sigma.
  RandomStream a(1), b(1);
  const std::vector<double> phi{1.0};
  int nc = 0, ng = 0;
  for (int i = 0; i < 20000; ++i) {
    nc += std::abs(sample_action({{0}, 1, PolicyFamily::cauchy()}, phi, {-1, 1}, a).raw_action) > 5;
    ng += std::abs(sample_action({{0}, 1, PolicyFamily::gaussian()}, phi, {-1, 1}, b).raw_action) > 5;
  }
  CHECK(nc > 1000);
  CHECK(ng == 0);
}

TEST_CASE("sampling is deterministic per stream") {
  const std::vector<double> phi{0.4, 1.0};
  for (const auto& f : kFamilies) {
    RandomStream a(42), b(42);
    for (int i = 0; i < 100; ++i) {
      const PolicyParams p{{0.3, -0.1}, 0.5, f};
      CHECK(sample_action(p, phi, {-1, 1}, a).raw_action ==
            sample_action(p, phi, {-1, 1}, b).raw_action);
    }
  }
}

TEST_CASE("invalid inputs") {
  CHECK_THROWS_AS(PolicyParams({{0.0}, 0.0, PolicyFamily::cauchy()}).validate(), ConfigError);
  CHECK_THROWS_AS(PolicyParams({{0.0}, 1.0, PolicyFamily::student_t(0)}).validate(), ConfigError);
  CHECK_THROWS_AS(parse_family("uniform"), ConfigError);
  const std::vector<double> phi{1.0};
  CHECK_THROWS_AS(log_prob({{0.0}, 1.0, PolicyFamily::cauchy()}, phi, NAN), DomainError);
  CHECK(parse_family(family_name(FamilyKind::kStudentT)) == FamilyKind::kStudentT);
}
