#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gspgs/rng.hpp"

namespace gspgs {

using Vector = std::vector<double>;

/// Measurement noise xi = [theta^T, 1] z with z ~ N(0, sigma^2 I_{d+1}).
/// Conditional on theta, xi ~ N(0, sigma^2 (|theta|^2 + 1)). sigma = 0 gives exactly 0
/// and consumes no variates.
double noise_sample(std::span<const double> theta, double sigma, RngStream& rng);

/// Black-box objective f(theta, xi) = F(theta) + xi with the parameter-dependent
/// Gaussian noise above. Immutable after construction.
class NoisyObjective {
 public:
  using ValueFn = std::function<double(std::span<const double>)>;
  using GradientFn = std::function<Vector(std::span<const double>)>;

  NoisyObjective(std::string name, std::size_t dim, double sigma, ValueFn value,
                 GradientFn gradient = {}, std::optional<Vector> optimum = std::nullopt);

  const std::string& name() const noexcept { return name_; }
  std::size_t dim() const noexcept { return dim_; }
  double noise_sigma() const noexcept { return sigma_; }

  /// One noisy measurement f(theta, xi).
  double evaluate(std::span<const double> theta, RngStream& rng) const;
  /// F(theta).
  double true_value(std::span<const double> theta) const;

  bool has_gradient() const noexcept { return static_cast<bool>(gradient_); }
  /// Throws std::logic_error if no analytic gradient was supplied.
  Vector true_gradient(std::span<const double> theta) const;

  const std::optional<Vector>& optimum() const noexcept { return optimum_; }

  /// Same F, gradient and optimum; different noise level.
  NoisyObjective with_sigma(double sigma) const;

 private:
  std::string name_;
  std::size_t dim_;
  double sigma_;
  ValueFn value_;
  GradientFn gradient_;
  std::optional<Vector> optimum_;
};

/// F = theta^T A theta + 1^T theta with A upper triangular (diagonal included),
/// every stored entry 1/d. Minimiser -(d/(d+1)) 1.
NoisyObjective make_quadratic(std::size_t dim, double sigma);

/// F = 10 d + sum_i [theta_i^2 - 10 cos(2 pi theta_i)]. Minimiser 0.
NoisyObjective make_rastrigin(std::size_t dim, double sigma);

/// F = prod_i theta_i^{e_i}, noiseless test function for bias-order sweeps.
/// No known optimum.
NoisyObjective make_monomial(std::vector<int> exponents);

/// "quadratic" | "rastrigin".
NoisyObjective make_objective(std::string_view id, std::size_t dim, double sigma);

/// Default starting point: zeros for the quadratic, 2 * ones for Rastrigin.
Vector default_initial_point(std::string_view id, std::size_t dim);

}  // namespace gspgs
