#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gspgs/estimators.hpp"
#include "gspgs/objectives.hpp"

namespace gspgs {

inline constexpr std::size_t kMaxEnumerationDim = 12;
/// Bias norms below this mean the estimator is exact on the test function.
inline constexpr double kExactBiasThreshold = 1e-13;

/// Least-squares fit of log(value) = intercept + slope * log(x).
struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// Root-mean-square residual in log space.
  double residual = 0.0;
};

LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y);

struct SweepReport {
  std::string quantity;  // "bias" or "variance"
  std::vector<double> deltas;
  std::vector<double> values;
  /// Monte-Carlo standard error per delta; empty for exact enumeration.
  std::vector<double> standard_errors;
  /// Unset when the verdict is "exact".
  std::optional<LogLogFit> fit;
  std::string verdict;  // "slope" or "exact"
};

void write_csv(std::ostream& os, const SweepReport& report);
/// {"schema": 1, "quantity", "slope", "intercept", "residual", "verdict", "deltas", "values"}
std::string to_json(const SweepReport& report);

/// E[estimate] - grad F(theta) computed exactly by enumerating every direction
/// pattern of a finite-support scheme (symmetric or asymmetric Bernoulli).
/// Requires sigma = 0, d <= kMaxEnumerationDim and an analytic gradient.
Vector exact_bias_enumerated(const NoisyObjective& objective, std::span<const double> theta,
                             const EstimatorConfig& config);

/// Same, restricted to the symmetric Bernoulli scheme.
Vector exact_bias_bernoulli(const NoisyObjective& objective, std::span<const double> theta,
                            const EstimatorConfig& config);

struct BiasEstimate {
  Vector bias;
  Vector standard_error;
};

/// Monte-Carlo bias of the noiseless estimator. Averages V (s(U) - U^T grad F)
/// where s is the directional stencil; since E[V U^T] = I this has the same mean
/// as estimate - grad F but far smaller variance.
BiasEstimate monte_carlo_bias(const NoisyObjective& objective, std::span<const double> theta,
                              const EstimatorConfig& config, std::size_t samples,
                              std::uint64_t seed);

/// Plain Monte-Carlo bias (no control variate): mean of estimate - grad F.
/// Used to cross-check the enumeration oracle.
BiasEstimate monte_carlo_bias_plain(const NoisyObjective& objective,
                                    std::span<const double> theta, const EstimatorConfig& config,
                                    std::size_t samples, std::uint64_t seed);

/// Bias norm per delta (exact enumeration when possible, else Monte Carlo with
/// mc_samples draws) and its log-log slope. config.delta is ignored.
/// Deltas must be strictly decreasing and lie in (0, 1].
SweepReport bias_order_sweep(const NoisyObjective& objective, std::span<const double> theta,
                             const EstimatorConfig& config, std::span<const double> deltas,
                             std::size_t mc_samples = 1'000'000, std::uint64_t seed = 1);

/// Trace of the covariance of the noisy estimate per delta, and its log-log slope.
SweepReport variance_scaling_sweep(const NoisyObjective& objective,
                                   std::span<const double> theta, const EstimatorConfig& config,
                                   std::span<const double> deltas, std::size_t mc_samples,
                                   std::uint64_t seed = 1);

struct IdentityResult {
  std::string name;  // "harmonic", "alternating", "power", "balanced-linear", "balanced-odd"
  int k = 0;
  int q = 0;  // 0 where not applicable
  bool holds = false;
};

struct IdentityReport {
  std::vector<IdentityResult> entries;
  bool all_hold() const;
};

/// Verifies the combinatorial identities behind the coefficient sum rules, for
/// every k in [1, kmax], by exact rational summation.
IdentityReport identity_check(int kmax);

}  // namespace gspgs
