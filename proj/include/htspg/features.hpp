#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace htspg {

enum class FeatureKind { kIdentityBias, kPolynomialBias, kRbfGrid };

// State feature map phi(s). Inputs are multiplied component-wise by `scale`
// before the kind-specific expansion; every kind ends with a constant 1.
class FeatureMap {
 public:
  static FeatureMap identity_with_bias(std::size_t input_dim,
                                       std::vector<double> scale = {});
  // Per-component powers 1..degree (no cross terms), then the bias.
  static FeatureMap polynomial_with_bias(std::size_t input_dim, int degree,
                                         std::vector<double> scale = {});
  // Gaussian bumps centred on a regular grid over [-1, 1]^input_dim, then
  // the bias. Output dimension is points_per_dim^input_dim + 1.
  static FeatureMap rbf_grid(std::size_t input_dim, int points_per_dim,
                             double bandwidth, std::vector<double> scale = {});

  // Parses "identity", "poly:<degree>" or "rbf:<points>:<bandwidth>", keeping
  // the given input scaling.
  static FeatureMap parse(std::string_view text, std::size_t input_dim,
                          std::vector<double> scale = {});

  FeatureKind kind() const { return kind_; }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return output_dim_; }
  const std::vector<double>& scale() const { return scale_; }

  void evaluate(std::span<const double> state, std::span<double> out) const;
  std::vector<double> operator()(std::span<const double> state) const;

  // Inverse of parse().
  std::string describe() const;

 private:
  FeatureMap(FeatureKind kind, std::size_t input_dim,
             std::vector<double> scale);

  FeatureKind kind_;
  std::size_t input_dim_;
  std::size_t output_dim_ = 0;
  std::vector<double> scale_;
  int degree_ = 1;
  int points_ = 0;
  double bandwidth_ = 1.0;
  std::vector<double> centers_;  // row-major, output_dim-1 rows
};

}  // namespace htspg
