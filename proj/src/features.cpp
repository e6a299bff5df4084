#include "htspg/features.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>

#include "htspg/errors.hpp"

namespace htspg {

FeatureMap::FeatureMap(FeatureKind kind, std::size_t input_dim,
                       std::vector<double> scale)
    : kind_(kind), input_dim_(input_dim), scale_(std::move(scale)) {
  if (input_dim_ == 0) throw ConfigError("feature map input_dim must be positive");
  if (scale_.empty()) scale_.assign(input_dim_, 1.0);
  if (scale_.size() != input_dim_)
    throw ConfigError("feature map scale has " + std::to_string(scale_.size()) +
                      " entries, expected " + std::to_string(input_dim_));
  for (double s : scale_)
    if (!std::isfinite(s)) throw ConfigError("feature map scale must be finite");
}

FeatureMap FeatureMap::identity_with_bias(std::size_t input_dim,
                                          std::vector<double> scale) {
  FeatureMap m(FeatureKind::kIdentityBias, input_dim, std::move(scale));
  m.output_dim_ = input_dim + 1;
  return m;
}

FeatureMap FeatureMap::polynomial_with_bias(std::size_t input_dim, int degree,
                                            std::vector<double> scale) {
  if (degree < 1) throw ConfigError("polynomial degree must be >= 1");
  FeatureMap m(FeatureKind::kPolynomialBias, input_dim, std::move(scale));
  m.degree_ = degree;
  m.output_dim_ = input_dim * static_cast<std::size_t>(degree) + 1;
  return m;
}

FeatureMap FeatureMap::rbf_grid(std::size_t input_dim, int points_per_dim,
                                double bandwidth, std::vector<double> scale) {
  if (points_per_dim < 1) throw ConfigError("rbf grid needs >= 1 point per dimension");
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
    throw ConfigError("rbf bandwidth must be positive");
  FeatureMap m(FeatureKind::kRbfGrid, input_dim, std::move(scale));
  m.points_ = points_per_dim;
  m.bandwidth_ = bandwidth;

  std::size_t n_centers = 1;
  for (std::size_t i = 0; i < input_dim; ++i) {
    n_centers *= static_cast<std::size_t>(points_per_dim);
    if (n_centers > 100000) throw ConfigError("rbf grid too large");
  }
  m.centers_.resize(n_centers * input_dim);
  for (std::size_t c = 0; c < n_centers; ++c) {
    std::size_t rest = c;
    for (std::size_t dim = 0; dim < input_dim; ++dim) {
      const auto idx = rest % static_cast<std::size_t>(points_per_dim);
      rest /= static_cast<std::size_t>(points_per_dim);
      m.centers_[c * input_dim + dim] =
          points_per_dim == 1
              ? 0.0
              : -1.0 + 2.0 * static_cast<double>(idx) / (points_per_dim - 1);
    }
  }
  m.output_dim_ = n_centers + 1;
  return m;
}

namespace {

template <typename T>
bool parse_number(std::string_view text, T& out) {
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace

FeatureMap FeatureMap::parse(std::string_view text, std::size_t input_dim,
                             std::vector<double> scale) {
  if (text == "identity") return identity_with_bias(input_dim, std::move(scale));
  if (text.starts_with("poly:")) {
    int degree = 0;
    if (!parse_number(text.substr(5), degree))
      throw ConfigError("bad polynomial feature spec '" + std::string(text) + "'");
    return polynomial_with_bias(input_dim, degree, std::move(scale));
  }
  if (text.starts_with("rbf:")) {
    auto rest = text.substr(4);
    auto colon = rest.find(':');
    int points = 0;
    double bw = 0.0;
    if (colon == std::string_view::npos || !parse_number(rest.substr(0, colon), points) ||
        !parse_number(rest.substr(colon + 1), bw))
      throw ConfigError("bad rbf feature spec '" + std::string(text) +
                        "', expected rbf:<points>:<bandwidth>");
    return rbf_grid(input_dim, points, bw, std::move(scale));
  }
  throw ConfigError("unknown feature map '" + std::string(text) +
                    "' (identity | poly:<degree> | rbf:<points>:<bandwidth>)");
}

std::string FeatureMap::describe() const {
  switch (kind_) {
    case FeatureKind::kIdentityBias:
      return "identity";
    case FeatureKind::kPolynomialBias:
      return "poly:" + std::to_string(degree_);
    case FeatureKind::kRbfGrid: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "rbf:%d:%.17g", points_, bandwidth_);
      return buf;
    }
  }
  return "?";
}

void FeatureMap::evaluate(std::span<const double> state,
                          std::span<double> out) const {
  if (state.size() != input_dim_)
    throw ConfigError("feature map expects state of dimension " +
                      std::to_string(input_dim_) + ", got " +
                      std::to_string(state.size()));
  if (out.size() != output_dim_)
    throw ConfigError("feature output buffer has wrong size");

  switch (kind_) {
    case FeatureKind::kIdentityBias:
      for (std::size_t i = 0; i < input_dim_; ++i) out[i] = scale_[i] * state[i];
      break;
    case FeatureKind::kPolynomialBias: {
      std::size_t j = 0;
      for (std::size_t i = 0; i < input_dim_; ++i) {
        const double x = scale_[i] * state[i];
        double p = 1.0;
        for (int deg = 1; deg <= degree_; ++deg) {
          p *= x;
          out[j++] = p;
        }
      }
      break;
    }
    case FeatureKind::kRbfGrid: {
      const double inv = 1.0 / (2.0 * bandwidth_ * bandwidth_);
      const std::size_t n_centers = output_dim_ - 1;
      for (std::size_t c = 0; c < n_centers; ++c) {
        double d2 = 0.0;
        for (std::size_t i = 0; i < input_dim_; ++i) {
          const double diff = scale_[i] * state[i] - centers_[c * input_dim_ + i];
          d2 += diff * diff;
        }
        out[c] = std::exp(-d2 * inv);
      }
      break;
    }
  }
  out[output_dim_ - 1] = 1.0;
}

std::vector<double> FeatureMap::operator()(std::span<const double> state) const {
  std::vector<double> out(output_dim_);
  evaluate(state, out);
  return out;
}

}  // namespace htspg
