#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gspgs/estimators.hpp"
#include "gspgs/objectives.hpp"

namespace gspgs {

/// a(n) = a0 / (n + A)^gamma_a,  delta(n) = delta0 / n^gamma_d, for n >= 1.
struct DecayingSchedule {
  double a0 = 1.0;
  double A = 0.0;
  double gamma_a = 1.0;
  double delta0 = 1.0;
  double gamma_d = 0.101;
};

/// a(n) = a, delta(n) = delta.
struct ConstantSchedule {
  double a = 0.01;
  double delta = 0.1;
};

using Schedule = std::variant<DecayingSchedule, ConstantSchedule>;

void validate(const Schedule& schedule);
double step_size(const Schedule& schedule, std::size_t n);
double perturbation_width(const Schedule& schedule, std::size_t n);

/// "a0/(n+A)^ga | d0/n^gd" for decaying schedules, "a | d" for constant ones.
std::string to_string(const Schedule& schedule);
Schedule parse_schedule(std::string_view text);

/// Step size and width from the non-asymptotic bound for m iterations of a
/// one-sided order-k1 method on an L-smooth objective:
///   a = min(1/L, m^-((k1+2)/(2k1+2))),  delta = m^-(1/(2k1+2)).
ConstantSchedule theorem2_params(std::size_t m, double L, int k1);

/// |theta_final - theta*|^2 / |theta0 - theta*|^2. Throws UndefinedMetricError if
/// theta0 == theta*.
double parameter_error(std::span<const double> theta_final, std::span<const double> theta0,
                       std::span<const double> theta_star);

struct TraceRecord {
  std::size_t n = 0;
  Vector theta;  // iterate before the update
  double a = 0.0;
  double delta = 0.0;
  double grad_norm = 0.0;  // norm of the gradient estimate g(n)
};

struct RunOptions {
  /// Abort once |theta(n)|_inf exceeds this.
  double divergence_guard = 1e6;
  bool record_trace = false;
};

struct RunResult {
  Vector final_theta;
  std::size_t iterations = 0;
  std::size_t measurements_used = 0;
  /// Present when the objective exposes its optimum.
  std::optional<double> parameter_error;
  std::vector<TraceRecord> trace;
};

/// theta(n+1) = theta(n) - a(n) g(n), with g(n) from the configured estimator at
/// width delta(n); iterates while the next estimate fits in the budget.
/// config.delta is ignored (the schedule supplies it).
/// Throws DivergenceError on a non-finite iterate or on leaving the guard box.
RunResult run_sgd(const NoisyObjective& objective, const EstimatorConfig& estimator,
                  const Schedule& schedule, std::span<const double> theta0, std::size_t budget,
                  std::uint64_t seed, const RunOptions& options = {});

}  // namespace gspgs
