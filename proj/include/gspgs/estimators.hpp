#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gspgs/objectives.hpp"
#include "gspgs/perturbations.hpp"
#include "gspgs/rng.hpp"

namespace gspgs {

/// (k1+1)-measurement one-sided estimator.
struct OneSided {
  int k1 = 1;
};
/// 2*k2-measurement balanced estimator.
struct Balanced {
  int k2 = 1;
};
/// Kiefer-Wolfowitz coordinate central differences, 2d measurements.
struct Fdsa {};

using EstimatorSide = std::variant<OneSided, Balanced, Fdsa>;

struct EstimatorConfig {
  EstimatorSide side = OneSided{1};
  PerturbationScheme scheme = SymmetricBernoulli{};  // ignored by Fdsa
  double delta = 0.1;
};

/// Throws ConfigError on delta <= 0, order out of range or bad scheme.
void validate(const EstimatorConfig& config);

std::size_t measurements_per_estimate(const EstimatorSide& side, std::size_t dim);

std::string to_string(const EstimatorSide& side);

struct GradientEstimate {
  Vector g;
  std::size_t measurements = 0;
};

/// g = (1/delta) V sum_l w_l f(theta + l delta U, xi_l) with one (U, V) draw and
/// fresh noise per measurement (including l = 0).
GradientEstimate gspgs_estimate(const NoisyObjective& objective, std::span<const double> theta,
                                const EstimatorConfig& config, RngStream& rng);

/// g = (1/delta) V sum_j b_j (f(theta + (2j+1) delta U) - f(theta - (2j+1) delta U)) / 2.
GradientEstimate bgspgs_estimate(const NoisyObjective& objective, std::span<const double> theta,
                                 const EstimatorConfig& config, RngStream& rng);

/// g_i = (f(theta + delta e_i) - f(theta - delta e_i)) / (2 delta).
GradientEstimate fdsa_estimate(const NoisyObjective& objective, std::span<const double> theta,
                               double delta, RngStream& rng);

/// Dispatches on config.side.
GradientEstimate estimate_gradient(const NoisyObjective& objective, std::span<const double> theta,
                                   const EstimatorConfig& config, RngStream& rng);

/// Scalar part of a simultaneous-perturbation estimate for a fixed direction u:
/// the estimate is V * directional_stencil(...). `f` is evaluated at every stencil
/// point in order. Used by exact-enumeration oracles.
double directional_stencil(const std::function<double(std::span<const double>)>& f,
                           std::span<const double> theta, std::span<const double> u,
                           const EstimatorSide& side, double delta);

/// Reusable estimator with preallocated buffers, for the optimisation loop.
/// Not thread-safe.
class GradientEstimator {
 public:
  GradientEstimator(EstimatorSide side, PerturbationScheme scheme, std::size_t dim);

  const EstimatorSide& side() const noexcept { return side_; }
  const PerturbationScheme& scheme() const noexcept { return scheme_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t measurements() const noexcept { return measurements_; }

  /// Writes the estimate into g (length dim) and returns the measurement count.
  std::size_t estimate(const NoisyObjective& objective, std::span<const double> theta,
                       double delta, RngStream& rng, std::span<double> g);

 private:
  double measure(const NoisyObjective& objective, RngStream& rng);

  EstimatorSide side_;
  PerturbationScheme scheme_;
  std::size_t dim_;
  std::size_t measurements_;
  std::vector<double> weights_;
  Vector u_, v_, point_;
};

}  // namespace gspgs
