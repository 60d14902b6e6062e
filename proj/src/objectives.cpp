#include "gspgs/objectives.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gspgs/errors.hpp"

namespace gspgs {

double noise_sample(std::span<const double> theta, double sigma, RngStream& rng) {
  if (sigma < 0.0) throw ConfigError("noise sigma must be non-negative");
  if (sigma == 0.0) return 0.0;
  double xi = 0.0;
  for (double t : theta) xi += t * (sigma * rng.normal());
  xi += sigma * rng.normal();
  return xi;
}

NoisyObjective::NoisyObjective(std::string name, std::size_t dim, double sigma, ValueFn value,
                               GradientFn gradient, std::optional<Vector> optimum)
    : name_(std::move(name)),
      dim_(dim),
      sigma_(sigma),
      value_(std::move(value)),
      gradient_(std::move(gradient)),
      optimum_(std::move(optimum)) {
  if (dim_ == 0) throw ConfigError("objective dimension must be >= 1");
  if (!(sigma_ >= 0.0) || !std::isfinite(sigma_)) {
    throw ConfigError("noise sigma must be finite and non-negative");
  }
  if (!value_) throw ConfigError("objective requires a value function");
  if (optimum_ && optimum_->size() != dim_) throw ConfigError("optimum has wrong dimension");
}

namespace {
void check_dim(std::span<const double> theta, std::size_t dim) {
  if (theta.size() != dim) {
    throw ConfigError("point has dimension " + std::to_string(theta.size()) + ", objective expects " +
                      std::to_string(dim));
  }
}
}  // namespace

double NoisyObjective::evaluate(std::span<const double> theta, RngStream& rng) const {
  check_dim(theta, dim_);
  return value_(theta) + noise_sample(theta, sigma_, rng);
}

double NoisyObjective::true_value(std::span<const double> theta) const {
  check_dim(theta, dim_);
  return value_(theta);
}

Vector NoisyObjective::true_gradient(std::span<const double> theta) const {
  if (!gradient_) throw std::logic_error("objective '" + name_ + "' has no analytic gradient");
  check_dim(theta, dim_);
  return gradient_(theta);
}

NoisyObjective NoisyObjective::with_sigma(double sigma) const {
  return NoisyObjective(name_, dim_, sigma, value_, gradient_, optimum_);
}

NoisyObjective make_quadratic(std::size_t dim, double sigma) {
  if (dim == 0) throw ConfigError("objective dimension must be >= 1");
  const double inv_d = 1.0 / static_cast<double>(dim);

  // theta^T A theta with A_ij = 1/d for j >= i equals (1/d) sum_{i<=j} theta_i theta_j
  //                                             = (1/(2d)) [(sum theta)^2 + |theta|^2].
  auto value = [dim, inv_d](std::span<const double> theta) {
    double sum = 0.0;
    double sq = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      sum += theta[i];
      sq += theta[i] * theta[i];
    }
    return 0.5 * inv_d * (sum * sum + sq) + sum;
  };
  // (A + A^T) theta + b = (1/d)(J + I) theta + 1
  auto gradient = [dim, inv_d](std::span<const double> theta) {
    double sum = 0.0;
    for (std::size_t i = 0; i < dim; ++i) sum += theta[i];
    Vector g(dim);
    for (std::size_t i = 0; i < dim; ++i) g[i] = inv_d * (sum + theta[i]) + 1.0;
    return g;
  };
  const double d = static_cast<double>(dim);
  return NoisyObjective("quadratic", dim, sigma, value, gradient, Vector(dim, -d / (d + 1.0)));
}

NoisyObjective make_rastrigin(std::size_t dim, double sigma) {
  if (dim == 0) throw ConfigError("objective dimension must be >= 1");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  auto value = [dim](std::span<const double> theta) {
    double f = 10.0 * static_cast<double>(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      f += theta[i] * theta[i] - 10.0 * std::cos(two_pi * theta[i]);
    }
    return f;
  };
  auto gradient = [dim](std::span<const double> theta) {
    Vector g(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      g[i] = 2.0 * theta[i] + 10.0 * two_pi * std::sin(two_pi * theta[i]);
    }
    return g;
  };
  return NoisyObjective("rastrigin", dim, sigma, value, gradient, Vector(dim, 0.0));
}

NoisyObjective make_monomial(std::vector<int> exponents) {
  if (exponents.empty()) throw ConfigError("monomial needs at least one exponent");
  for (int e : exponents) {
    if (e < 0) throw ConfigError("monomial exponents must be non-negative");
  }
  const std::size_t dim = exponents.size();
  auto value = [exponents](std::span<const double> theta) {
    double p = 1.0;
    for (std::size_t i = 0; i < exponents.size(); ++i) p *= std::pow(theta[i], exponents[i]);
    return p;
  };
  auto gradient = [exponents](std::span<const double> theta) {
    Vector g(exponents.size());
    for (std::size_t i = 0; i < exponents.size(); ++i) {
      if (exponents[i] == 0) continue;
      double p = exponents[i] * std::pow(theta[i], exponents[i] - 1);
      for (std::size_t j = 0; j < exponents.size(); ++j) {
        if (j != i) p *= std::pow(theta[j], exponents[j]);
      }
      g[i] = p;
    }
    return g;
  };
  std::string name = "monomial";
  for (int e : exponents) name += ":" + std::to_string(e);
  return NoisyObjective(name, dim, 0.0, value, gradient);
}

NoisyObjective make_objective(std::string_view id, std::size_t dim, double sigma) {
  if (id == "quadratic") return make_quadratic(dim, sigma);
  if (id == "rastrigin") return make_rastrigin(dim, sigma);
  throw ConfigError("unknown objective '" + std::string(id) + "'");
}

Vector default_initial_point(std::string_view id, std::size_t dim) {
  if (id == "quadratic") return Vector(dim, 0.0);
  if (id == "rastrigin") return Vector(dim, 2.0);
  throw ConfigError("unknown objective '" + std::string(id) + "'");
}

}  // namespace gspgs
