#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace gspgs {

/// Invalid parameters (k out of range, non-positive delta, bad scheme string...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An objective returned a non-finite value. Carries the point it was evaluated at.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, std::vector<double> point)
      : std::runtime_error(what), point_(std::move(point)) {}

  const std::vector<double>& point() const noexcept { return point_; }

 private:
  std::vector<double> point_;
};

/// The SGD recursion left the divergence guard or produced a non-finite iterate.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::size_t iteration,
                  std::vector<double> last_finite)
      : std::runtime_error(what),
        iteration_(iteration),
        last_finite_(std::move(last_finite)) {}

  std::size_t iteration() const noexcept { return iteration_; }
  const std::vector<double>& last_finite_theta() const noexcept { return last_finite_; }

 private:
  std::size_t iteration_;
  std::vector<double> last_finite_;
};

/// Metric undefined (e.g. parameter error with theta0 == theta*).
class UndefinedMetricError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace gspgs
