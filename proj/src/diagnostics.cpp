#include "gspgs/diagnostics.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "gspgs/coefficients.hpp"
#include "gspgs/errors.hpp"
#include "gspgs/parallel.hpp"

namespace gspgs {

LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ConfigError("log-log fit needs at least two paired points");
  }
  const std::size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ConfigError("log-log fit needs positive data");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw ConfigError("log-log fit needs distinct x values");
  LogLogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

void write_csv(std::ostream& os, const SweepReport& report) {
  const auto old = os.precision(std::numeric_limits<double>::max_digits10);
  os << "delta," << report.quantity;
  if (!report.standard_errors.empty()) os << ",stderr";
  os << '\n';
  for (std::size_t i = 0; i < report.deltas.size(); ++i) {
    os << report.deltas[i] << ',' << report.values[i];
    if (!report.standard_errors.empty()) os << ',' << report.standard_errors[i];
    os << '\n';
  }
  os.precision(old);
}

std::string to_json(const SweepReport& report) {
  nlohmann::json j;
  j["schema"] = 1;
  j["quantity"] = report.quantity;
  j["verdict"] = report.verdict;
  j["deltas"] = report.deltas;
  j["values"] = report.values;
  if (!report.standard_errors.empty()) j["standard_errors"] = report.standard_errors;
  if (report.fit) {
    j["slope"] = report.fit->slope;
    j["intercept"] = report.fit->intercept;
    j["residual"] = report.fit->residual;
  } else {
    j["slope"] = nullptr;
    j["intercept"] = nullptr;
    j["residual"] = nullptr;
  }
  return j.dump();
}

namespace {

void require_noiseless(const NoisyObjective& objective) {
  if (objective.noise_sigma() != 0.0) {
    throw ConfigError("bias oracles need a noiseless objective (sigma = 0)");
  }
  if (!objective.has_gradient()) throw ConfigError("bias oracles need an analytic gradient");
}

std::function<double(std::span<const double>)> value_fn(const NoisyObjective& objective) {
  return [&objective](std::span<const double> p) { return objective.true_value(p); };
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void check_grid(std::span<const double> deltas) {
  if (deltas.size() < 2) throw ConfigError("sweep needs at least two deltas");
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] > 0.0) || deltas[i] > 1.0) throw ConfigError("sweep deltas must lie in (0, 1]");
    if (i > 0 && !(deltas[i] < deltas[i - 1])) {
      throw ConfigError("sweep deltas must be strictly decreasing");
    }
  }
}

}  // namespace

Vector exact_bias_enumerated(const NoisyObjective& objective, std::span<const double> theta,
                             const EstimatorConfig& config) {
  validate(config);
  require_noiseless(objective);
  if (std::holds_alternative<Fdsa>(config.side)) {
    throw ConfigError("enumeration oracle applies to simultaneous-perturbation estimators");
  }
  const auto atoms = finite_support(config.scheme);
  if (atoms.empty()) throw ConfigError("scheme " + to_string(config.scheme) + " is not enumerable");
  const std::size_t dim = objective.dim();
  if (dim > kMaxEnumerationDim) {
    throw ConfigError("exact enumeration refused: dimension " + std::to_string(dim) + " > " +
                      std::to_string(kMaxEnumerationDim));
  }
  if (theta.size() != dim) throw ConfigError("theta has the wrong dimension");

  const std::size_t base = atoms.size();
  std::size_t patterns = 1;
  for (std::size_t i = 0; i < dim; ++i) patterns *= base;

  const double scale = weight_scale(config.scheme, dim);
  const auto f = value_fn(objective);
  Vector mean(dim, 0.0);
  Vector u(dim);
  for (std::size_t p = 0; p < patterns; ++p) {
    double prob = 1.0;
    std::size_t code = p;
    for (std::size_t i = 0; i < dim; ++i) {
      const auto& [value, weight] = atoms[code % base];
      code /= base;
      u[i] = value;
      prob *= weight;
    }
    const double s = directional_stencil(f, theta, u, config.side, config.delta);
    for (std::size_t i = 0; i < dim; ++i) mean[i] += prob * scale * u[i] * s;
  }
  const Vector grad = objective.true_gradient(theta);
  for (std::size_t i = 0; i < dim; ++i) mean[i] -= grad[i];
  return mean;
}

Vector exact_bias_bernoulli(const NoisyObjective& objective, std::span<const double> theta,
                            const EstimatorConfig& config) {
  if (!std::holds_alternative<SymmetricBernoulli>(config.scheme)) {
    throw ConfigError("exact_bias_bernoulli requires the symmetric Bernoulli scheme");
  }
  return exact_bias_enumerated(objective, theta, config);
}

namespace {

template <class Sample>
BiasEstimate accumulate_bias(std::size_t dim, std::size_t samples, Sample&& sample) {
  if (samples < 2) throw ConfigError("Monte-Carlo bias needs at least two samples");
  Vector mean(dim, 0.0), m2(dim, 0.0), x(dim);
  for (std::size_t n = 1; n <= samples; ++n) {
    sample(x);
    for (std::size_t i = 0; i < dim; ++i) {
      const double d = x[i] - mean[i];
      mean[i] += d / static_cast<double>(n);
      m2[i] += d * (x[i] - mean[i]);
    }
  }
  BiasEstimate out{mean, Vector(dim)};
  for (std::size_t i = 0; i < dim; ++i) {
    out.standard_error[i] = std::sqrt(m2[i] / static_cast<double>(samples - 1) / samples);
  }
  return out;
}

}  // namespace

BiasEstimate monte_carlo_bias(const NoisyObjective& objective, std::span<const double> theta,
                              const EstimatorConfig& config, std::size_t samples,
                              std::uint64_t seed) {
  validate(config);
  require_noiseless(objective);
  const std::size_t dim = objective.dim();
  const Vector grad = objective.true_gradient(theta);
  const auto f = value_fn(objective);
  RngStream rng(seed);
  Vector u(dim), v(dim);
  return accumulate_bias(dim, samples, [&](Vector& out) {
    sample_uv_into(config.scheme, u, v, rng);
    const double s = directional_stencil(f, theta, u, config.side, config.delta);
    const double linear = std::inner_product(u.begin(), u.end(), grad.begin(), 0.0);
    for (std::size_t i = 0; i < dim; ++i) out[i] = v[i] * (s - linear);
  });
}

BiasEstimate monte_carlo_bias_plain(const NoisyObjective& objective,
                                    std::span<const double> theta, const EstimatorConfig& config,
                                    std::size_t samples, std::uint64_t seed) {
  validate(config);
  require_noiseless(objective);
  const std::size_t dim = objective.dim();
  const Vector grad = objective.true_gradient(theta);
  const auto f = value_fn(objective);
  RngStream rng(seed);
  Vector u(dim), v(dim);
  return accumulate_bias(dim, samples, [&](Vector& out) {
    sample_uv_into(config.scheme, u, v, rng);
    const double s = directional_stencil(f, theta, u, config.side, config.delta);
    for (std::size_t i = 0; i < dim; ++i) out[i] = v[i] * s - grad[i];
  });
}

SweepReport bias_order_sweep(const NoisyObjective& objective, std::span<const double> theta,
                             const EstimatorConfig& config, std::span<const double> deltas,
                             std::size_t mc_samples, std::uint64_t seed) {
  check_grid(deltas);
  require_noiseless(objective);
  const bool enumerable =
      !finite_support(config.scheme).empty() && objective.dim() <= kMaxEnumerationDim;

  SweepReport report;
  report.quantity = "bias";
  report.deltas.assign(deltas.begin(), deltas.end());
  report.values.resize(deltas.size());
  if (!enumerable) report.standard_errors.resize(deltas.size());

  parallel_for(deltas.size(), 0, [&](std::size_t i) {
    EstimatorConfig c = config;
    c.delta = deltas[i];
    if (enumerable) {
      report.values[i] = norm2(exact_bias_enumerated(objective, theta, c));
    } else {
      // Same seed for every delta: common random numbers keep the fit smooth.
      const auto est = monte_carlo_bias(objective, theta, c, mc_samples, seed);
      report.values[i] = norm2(est.bias);
      report.standard_errors[i] = norm2(est.standard_error);
    }
  });

  bool exact = false;
  for (double v : report.values) exact = exact || v < kExactBiasThreshold;
  if (exact) {
    report.verdict = "exact";
  } else {
    report.verdict = "slope";
    report.fit = fit_loglog(report.deltas, report.values);
  }
  return report;
}

SweepReport variance_scaling_sweep(const NoisyObjective& objective,
                                   std::span<const double> theta, const EstimatorConfig& config,
                                   std::span<const double> deltas, std::size_t mc_samples,
                                   std::uint64_t seed) {
  check_grid(deltas);
  if (mc_samples < 2) throw ConfigError("variance sweep needs at least two samples");
  const std::size_t dim = objective.dim();

  SweepReport report;
  report.quantity = "variance";
  report.deltas.assign(deltas.begin(), deltas.end());
  report.values.resize(deltas.size());

  parallel_for(deltas.size(), 0, [&](std::size_t k) {
    GradientEstimator est(config.side, config.scheme, dim);
    RngStream rng(seed, k);
    Vector g(dim), mean(dim, 0.0), m2(dim, 0.0);
    for (std::size_t n = 1; n <= mc_samples; ++n) {
      est.estimate(objective, theta, deltas[k], rng, g);
      for (std::size_t i = 0; i < dim; ++i) {
        const double d = g[i] - mean[i];
        mean[i] += d / static_cast<double>(n);
        m2[i] += d * (g[i] - mean[i]);
      }
    }
    double trace = 0.0;
    for (double x : m2) trace += x / static_cast<double>(mc_samples - 1);
    report.values[k] = trace;
  });

  report.verdict = "slope";
  report.fit = fit_loglog(report.deltas, report.values);
  return report;
}

bool IdentityReport::all_hold() const {
  for (const auto& e : entries) {
    if (!e.holds) return false;
  }
  return !entries.empty();
}

IdentityReport identity_check(int kmax) {
  if (kmax < 1 || kmax > kMaxOneSidedOrder) {
    throw ConfigError("identity_check: kmax must be in [1, " + std::to_string(kMaxOneSidedOrder) +
                      "]");
  }
  auto sign = [](int e) { return e % 2 == 0 ? Rational(1) : Rational(-1); };
  auto power = [](int base, int e) {
    Rational r = 1;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
  };

  IdentityReport report;
  for (int k = 1; k <= kmax; ++k) {
    Rational harmonic = 0, lhs = 0;
    for (int j = 1; j <= k; ++j) {
      harmonic += Rational(1, j);
      lhs += sign(j + 1) * binomial(k, j) / j;
    }
    report.entries.push_back({"harmonic", k, 0, lhs == harmonic});

    Rational alt = 0;
    for (int j = 1; j <= k; ++j) alt += sign(j + 1) * binomial(k, j);
    report.entries.push_back({"alternating", k, 0, alt == 1});

    for (int q = 1; q < k; ++q) {
      Rational s = 0;
      for (int j = 0; j <= k; ++j) s += sign(k - j) * binomial(k, j) * power(j, q);
      report.entries.push_back({"power", k, q, s == 0});
    }

    Rational lin = 0;
    for (int i = 0; i <= k; ++i) lin += sign(i) * binomial(2 * k + 1, k - i) * (2 * i + 1);
    report.entries.push_back({"balanced-linear", k, 0, lin == 0});

    for (int q = 3; q <= 2 * k + 1; q += 2) {
      Rational s = 0;
      for (int j = 0; j <= k; ++j) {
        Rational inner = 0;
        for (int i = j; i <= k; ++i) inner += balanced_series_term(i) * binomial(2 * i + 1, i - j);
        s += sign(j) * inner * power(2 * j + 1, q);
      }
      report.entries.push_back({"balanced-odd", k, q, s == 0});
    }
  }
  return report;
}

}  // namespace gspgs
