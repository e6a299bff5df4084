#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "htspg/random.hpp"

namespace htspg {

// Univariate location-scale action distributions. A multivariate action
// would be a product of independent components of the same family; every
// environment here has a scalar action.
enum class FamilyKind { kGaussian, kCauchy, kLaplace, kStudentT };

struct PolicyFamily {
  FamilyKind kind = FamilyKind::kCauchy;
  double nu = 2.0;  // degrees of freedom, Student-t only

  static PolicyFamily gaussian() { return {FamilyKind::kGaussian}; }
  static PolicyFamily cauchy() { return {FamilyKind::kCauchy}; }
  static PolicyFamily laplace() { return {FamilyKind::kLaplace}; }
  static PolicyFamily student_t(double nu) { return {FamilyKind::kStudentT, nu}; }

  friend bool operator==(const PolicyFamily&, const PolicyFamily&) = default;
};

std::string family_name(FamilyKind kind);
FamilyKind parse_family(std::string_view name);  // throws ConfigError

// pi_theta(a|s) = family(location = theta . phi(s), scale = sigma).
struct PolicyParams {
  std::vector<double> theta;
  double sigma = 1.0;
  PolicyFamily family;

  // Throws ConfigError when sigma <= 0, nu <= 0 or theta is not finite.
  void validate() const;
};

struct ActionInterval {
  double lo;
  double hi;

  double clip(double a) const { return a < lo ? lo : (a > hi ? hi : a); }
  bool contains(double a) const { return a >= lo && a <= hi; }
};

struct ActionSample {
  double raw_action;      // unbounded draw, clamped to |a| <= kRawActionBound
  double clipped_action;  // projected into the environment's interval
};

// Extreme Cauchy draws are clamped to this magnitude before being stored.
inline constexpr double kRawActionBound = 1e6;

double mean(const PolicyParams& params, std::span<const double> features);

// Inverse-CDF sampling: consumes exactly one uniform from `rng`, so a pair of
// policies driven by copies of the same stream receive coupled draws.
ActionSample sample_action(const PolicyParams& params,
                           std::span<const double> features,
                           ActionInterval interval, RandomStream& rng);

double log_prob(const PolicyParams& params, std::span<const double> features,
                double raw_action);

std::vector<double> score(const PolicyParams& params,
                          std::span<const double> features, double raw_action);

// d/d(location) log p(action); score() is this factor times phi(s).
// `deviation` is action - location.
double score_factor(const PolicyFamily& family, double sigma, double deviation);

double log_density(const PolicyFamily& family, double sigma, double deviation);

// Location-zero quantile function used by sample_action.
double quantile(const PolicyFamily& family, double sigma, double u);

}  // namespace htspg
