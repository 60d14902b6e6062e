#include "gspgs/estimators.hpp"

#include <cmath>

#include "gspgs/coefficients.hpp"
#include "gspgs/errors.hpp"

namespace gspgs {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_delta(double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw ConfigError("perturbation width delta must be finite and > 0");
  }
}

void check_point(std::span<const double> theta, std::size_t dim) {
  if (theta.size() != dim) throw ConfigError("theta has the wrong dimension");
  for (double t : theta) {
    if (!std::isfinite(t)) throw ConfigError("theta must be finite");
  }
}

}  // namespace

void validate(const EstimatorConfig& config) {
  check_delta(config.delta);
  std::visit(overloaded{
                 [](const OneSided& s) { onesided_weights(s.k1); },
                 [](const Balanced& s) { balanced_weights(s.k2); },
                 [](const Fdsa&) {},
             },
             config.side);
  if (!std::holds_alternative<Fdsa>(config.side)) validate(config.scheme);
}

std::size_t measurements_per_estimate(const EstimatorSide& side, std::size_t dim) {
  return std::visit(overloaded{
                        [](const OneSided& s) { return static_cast<std::size_t>(s.k1) + 1; },
                        [](const Balanced& s) { return 2 * static_cast<std::size_t>(s.k2); },
                        [dim](const Fdsa&) { return 2 * dim; },
                    },
                    side);
}

std::string to_string(const EstimatorSide& side) {
  return std::visit(overloaded{
                        [](const OneSided& s) { return "onesided:" + std::to_string(s.k1); },
                        [](const Balanced& s) { return "balanced:" + std::to_string(s.k2); },
                        [](const Fdsa&) { return std::string("fdsa"); },
                    },
                    side);
}

GradientEstimator::GradientEstimator(EstimatorSide side, PerturbationScheme scheme,
                                     std::size_t dim)
    : side_(side),
      scheme_(scheme),
      dim_(dim),
      measurements_(measurements_per_estimate(side, dim)),
      u_(dim),
      v_(dim),
      point_(dim) {
  if (dim == 0) throw ConfigError("estimator dimension must be >= 1");
  std::visit(overloaded{
                 [this](const OneSided& s) { weights_ = onesided_weights(s.k1); },
                 [this](const Balanced& s) { weights_ = balanced_weights(s.k2); },
                 [](const Fdsa&) {},
             },
             side_);
  if (!std::holds_alternative<Fdsa>(side_)) validate(scheme_);
}

double GradientEstimator::measure(const NoisyObjective& objective, RngStream& rng) {
  const double y = objective.evaluate(point_, rng);
  if (!std::isfinite(y)) throw NumericalError("objective returned a non-finite value", point_);
  return y;
}

std::size_t GradientEstimator::estimate(const NoisyObjective& objective,
                                        std::span<const double> theta, double delta,
                                        RngStream& rng, std::span<double> g) {
  check_delta(delta);
  check_point(theta, dim_);
  if (objective.dim() != dim_ || g.size() != dim_) {
    throw ConfigError("objective, estimator and output dimensions disagree");
  }

  if (std::holds_alternative<Fdsa>(side_)) {
    std::copy(theta.begin(), theta.end(), point_.begin());
    for (std::size_t i = 0; i < dim_; ++i) {
      point_[i] = theta[i] + delta;
      const double plus = measure(objective, rng);
      point_[i] = theta[i] - delta;
      const double minus = measure(objective, rng);
      point_[i] = theta[i];
      g[i] = (plus - minus) / (2.0 * delta);
    }
    return measurements_;
  }

  sample_uv_into(scheme_, u_, v_, rng);

  double scalar = 0.0;
  if (std::holds_alternative<OneSided>(side_)) {
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      const double step = static_cast<double>(l) * delta;
      for (std::size_t i = 0; i < dim_; ++i) point_[i] = theta[i] + step * u_[i];
      scalar += weights_[l] * measure(objective, rng);
    }
  } else {
    for (std::size_t j = 0; j < weights_.size(); ++j) {
      const double step = static_cast<double>(2 * j + 1) * delta;
      for (std::size_t i = 0; i < dim_; ++i) point_[i] = theta[i] + step * u_[i];
      const double plus = measure(objective, rng);
      for (std::size_t i = 0; i < dim_; ++i) point_[i] = theta[i] - step * u_[i];
      const double minus = measure(objective, rng);
      scalar += weights_[j] * 0.5 * (plus - minus);
    }
  }
  scalar /= delta;
  for (std::size_t i = 0; i < dim_; ++i) g[i] = v_[i] * scalar;
  return measurements_;
}

namespace {

GradientEstimate run_once(const NoisyObjective& objective, std::span<const double> theta,
                          const EstimatorConfig& config, RngStream& rng) {
  validate(config);
  GradientEstimator est(config.side, config.scheme, objective.dim());
  GradientEstimate out{Vector(objective.dim()), 0};
  out.measurements = est.estimate(objective, theta, config.delta, rng, out.g);
  return out;
}

}  // namespace

GradientEstimate gspgs_estimate(const NoisyObjective& objective, std::span<const double> theta,
                                const EstimatorConfig& config, RngStream& rng) {
  if (!std::holds_alternative<OneSided>(config.side)) {
    throw ConfigError("gspgs_estimate requires a one-sided configuration");
  }
  return run_once(objective, theta, config, rng);
}

GradientEstimate bgspgs_estimate(const NoisyObjective& objective, std::span<const double> theta,
                                 const EstimatorConfig& config, RngStream& rng) {
  if (!std::holds_alternative<Balanced>(config.side)) {
    throw ConfigError("bgspgs_estimate requires a balanced configuration");
  }
  return run_once(objective, theta, config, rng);
}

GradientEstimate fdsa_estimate(const NoisyObjective& objective, std::span<const double> theta,
                               double delta, RngStream& rng) {
  return run_once(objective, theta, EstimatorConfig{Fdsa{}, SymmetricBernoulli{}, delta}, rng);
}

GradientEstimate estimate_gradient(const NoisyObjective& objective, std::span<const double> theta,
                                   const EstimatorConfig& config, RngStream& rng) {
  return run_once(objective, theta, config, rng);
}

double directional_stencil(const std::function<double(std::span<const double>)>& f,
                           std::span<const double> theta, std::span<const double> u,
                           const EstimatorSide& side, double delta) {
  check_delta(delta);
  if (u.size() != theta.size()) throw ConfigError("direction and theta differ in length");
  const std::size_t dim = theta.size();
  Vector point(dim);
  auto at = [&](double step) {
    for (std::size_t i = 0; i < dim; ++i) point[i] = theta[i] + step * u[i];
    return f(point);
  };

  return std::visit(
      overloaded{
          [&](const OneSided& s) {
            const auto& w = onesided_weights(s.k1);
            double acc = 0.0;
            for (std::size_t l = 0; l < w.size(); ++l) acc += w[l] * at(static_cast<double>(l) * delta);
            return acc / delta;
          },
          [&](const Balanced& s) {
            const auto& b = balanced_weights(s.k2);
            double acc = 0.0;
            for (std::size_t j = 0; j < b.size(); ++j) {
              const double step = static_cast<double>(2 * j + 1) * delta;
              acc += b[j] * 0.5 * (at(step) - at(-step));
            }
            return acc / delta;
          },
          [](const Fdsa&) -> double {
            throw ConfigError("FDSA has no simultaneous-perturbation stencil");
          },
      },
      side);
}

}  // namespace gspgs
