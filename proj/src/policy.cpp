#include "htspg/policy.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numbers>

#include "htspg/errors.hpp"

namespace htspg {

std::string family_name(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::kGaussian: return "gaussian";
    case FamilyKind::kCauchy: return "cauchy";
    case FamilyKind::kLaplace: return "laplace";
    case FamilyKind::kStudentT: return "student_t";
  }
  return "?";
}

FamilyKind parse_family(std::string_view name) {
  if (name == "gaussian") return FamilyKind::kGaussian;
  if (name == "cauchy") return FamilyKind::kCauchy;
  if (name == "laplace") return FamilyKind::kLaplace;
  if (name == "student_t") return FamilyKind::kStudentT;
  throw ConfigError("unknown policy family '" + std::string(name) +
                    "' (gaussian | cauchy | laplace | student_t)");
}

void PolicyParams::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw ConfigError("sigma must be a positive finite number");
  if (family.kind == FamilyKind::kStudentT &&
      (!(family.nu > 0.0) || !std::isfinite(family.nu)))
    throw ConfigError("student_t nu must be positive");
  for (double t : theta)
    if (!std::isfinite(t)) throw ConfigError("theta components must be finite");
}

namespace {

void check_dims(const PolicyParams& params, std::span<const double> features) {
  if (features.size() != params.theta.size())
    throw ConfigError("feature dimension " + std::to_string(features.size()) +
                      " does not match theta dimension " +
                      std::to_string(params.theta.size()));
}

}  // namespace

double mean(const PolicyParams& params, std::span<const double> features) {
  check_dims(params, features);
  double m = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i)
    m += params.theta[i] * features[i];
  return m;
}

double quantile(const PolicyFamily& family, double sigma, double u) {
  switch (family.kind) {
    case FamilyKind::kGaussian:
      return sigma * boost::math::quantile(boost::math::normal_distribution<>(), u);
    case FamilyKind::kCauchy:
      return sigma * std::tan(std::numbers::pi * (u - 0.5));
    case FamilyKind::kLaplace:
      return u < 0.5 ? sigma * std::log(2.0 * u) : -sigma * std::log(2.0 * (1.0 - u));
    case FamilyKind::kStudentT:
      return sigma *
             boost::math::quantile(boost::math::students_t_distribution<>(family.nu), u);
  }
  return 0.0;
}

ActionSample sample_action(const PolicyParams& params,
                           std::span<const double> features,
                           ActionInterval interval, RandomStream& rng) {
  if (!(interval.lo < interval.hi))
    throw ContractViolation("action interval must satisfy lo < hi");
  const double location = mean(params, features);
  double raw = location + quantile(params.family, params.sigma, rng.uniform());
  if (raw > kRawActionBound) raw = kRawActionBound;
  if (raw < -kRawActionBound) raw = -kRawActionBound;
  return {raw, interval.clip(raw)};
}

double log_density(const PolicyFamily& family, double sigma, double deviation) {
  const double z = deviation / sigma;
  switch (family.kind) {
    case FamilyKind::kGaussian:
      return -0.5 * z * z - std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
    case FamilyKind::kCauchy:
      return -std::log(sigma * std::numbers::pi) - std::log1p(z * z);
    case FamilyKind::kLaplace:
      return -std::log(2.0 * sigma) - std::abs(z);
    case FamilyKind::kStudentT: {
      const double nu = family.nu;
      return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
             0.5 * std::log(nu * std::numbers::pi) - std::log(sigma) -
             0.5 * (nu + 1.0) * std::log1p(z * z / nu);
    }
  }
  return 0.0;
}

double score_factor(const PolicyFamily& family, double sigma, double deviation) {
  const double z = deviation / sigma;
  switch (family.kind) {
    case FamilyKind::kGaussian:
      return z / sigma;
    case FamilyKind::kCauchy:
      return 2.0 * z / (sigma * (1.0 + z * z));
    case FamilyKind::kLaplace:
      // Subgradient 0 at the kink.
      return z > 0.0 ? 1.0 / sigma : (z < 0.0 ? -1.0 / sigma : 0.0);
    case FamilyKind::kStudentT:
      return (family.nu + 1.0) * z / (sigma * (family.nu + z * z));
  }
  return 0.0;
}

double log_prob(const PolicyParams& params, std::span<const double> features,
                double raw_action) {
  if (!std::isfinite(raw_action)) throw DomainError("log_prob: action is not finite");
  return log_density(params.family, params.sigma, raw_action - mean(params, features));
}

std::vector<double> score(const PolicyParams& params,
                          std::span<const double> features, double raw_action) {
  if (!std::isfinite(raw_action)) throw DomainError("score: action is not finite");
  for (double f : features)
    if (!std::isfinite(f)) throw DomainError("score: features are not finite");
  const double factor =
      score_factor(params.family, params.sigma, raw_action - mean(params, features));
  std::vector<double> out(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) out[i] = factor * features[i];
  return out;
}

}  // namespace htspg
