#include "gspgs/optimizer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <regex>
#include <sstream>

#include "gspgs/errors.hpp"

namespace gspgs {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool positive(double x) { return x > 0.0 && std::isfinite(x); }

double parse_number(const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw ConfigError("invalid number '" + text + "'");
  return v;
}

}  // namespace

void validate(const Schedule& schedule) {
  std::visit(overloaded{
                 [](const DecayingSchedule& s) {
                   if (!positive(s.a0) || !positive(s.delta0)) {
                     throw ConfigError("schedule constants a0 and delta0 must be > 0");
                   }
                   if (!(s.A >= 0.0) || !std::isfinite(s.A)) {
                     throw ConfigError("schedule offset A must be >= 0");
                   }
                   if (!std::isfinite(s.gamma_a) || !std::isfinite(s.gamma_d)) {
                     throw ConfigError("schedule exponents must be finite");
                   }
                 },
                 [](const ConstantSchedule& s) {
                   if (!positive(s.a) || !positive(s.delta)) {
                     throw ConfigError("constant schedule requires a > 0 and delta > 0");
                   }
                 },
             },
             schedule);
}

double step_size(const Schedule& schedule, std::size_t n) {
  return std::visit(overloaded{
                        [n](const DecayingSchedule& s) {
                          return s.a0 / std::pow(static_cast<double>(n) + s.A, s.gamma_a);
                        },
                        [](const ConstantSchedule& s) { return s.a; },
                    },
                    schedule);
}

double perturbation_width(const Schedule& schedule, std::size_t n) {
  return std::visit(overloaded{
                        [n](const DecayingSchedule& s) {
                          return s.delta0 / std::pow(static_cast<double>(n), s.gamma_d);
                        },
                        [](const ConstantSchedule& s) { return s.delta; },
                    },
                    schedule);
}

std::string to_string(const Schedule& schedule) {
  std::ostringstream os;
  os.precision(12);
  std::visit(overloaded{
                 [&os](const DecayingSchedule& s) {
                   os << s.a0 << "/(n+" << s.A << ")^" << s.gamma_a << " | " << s.delta0 << "/n^"
                      << s.gamma_d;
                 },
                 [&os](const ConstantSchedule& s) { os << s.a << " | " << s.delta; },
             },
             schedule);
  return os.str();
}

Schedule parse_schedule(std::string_view text) {
  static const std::string num = R"(\s*([-+0-9.eE]+)\s*)";
  static const std::regex decaying("^" + num + R"(/\s*\(\s*n\s*\+)" + num + R"(\)\s*\^)" + num +
                                   R"(\|)" + num + R"(/\s*n\s*\^)" + num + "$");
  static const std::regex constant("^" + num + R"(\|)" + num + "$");

  const std::string s(text);
  std::smatch m;
  Schedule out;
  if (std::regex_match(s, m, decaying)) {
    out = DecayingSchedule{parse_number(m[1]), parse_number(m[2]), parse_number(m[3]),
                           parse_number(m[4]), parse_number(m[5])};
  } else if (std::regex_match(s, m, constant)) {
    out = ConstantSchedule{parse_number(m[1]), parse_number(m[2])};
  } else {
    throw ConfigError("cannot parse schedule '" + s + "'");
  }
  validate(out);
  return out;
}

ConstantSchedule theorem2_params(std::size_t m, double L, int k1) {
  if (m < 1) throw ConfigError("theorem-2 schedule requires m >= 1");
  if (!positive(L)) throw ConfigError("smoothness constant L must be > 0");
  if (k1 < 1) throw ConfigError("order k1 must be >= 1");
  const double md = static_cast<double>(m);
  const double denom = 2.0 * k1 + 2.0;
  const double a = std::min(1.0 / L, std::pow(md, -(k1 + 2.0) / denom));
  const double delta = std::pow(md, -1.0 / denom);
  return ConstantSchedule{a, delta};
}

double parameter_error(std::span<const double> theta_final, std::span<const double> theta0,
                       std::span<const double> theta_star) {
  if (theta_final.size() != theta_star.size() || theta0.size() != theta_star.size()) {
    throw ConfigError("parameter_error: vectors differ in length");
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < theta_star.size(); ++i) {
    num += (theta_final[i] - theta_star[i]) * (theta_final[i] - theta_star[i]);
    den += (theta0[i] - theta_star[i]) * (theta0[i] - theta_star[i]);
  }
  if (den == 0.0) throw UndefinedMetricError("parameter error undefined: theta0 equals theta*");
  return num / den;
}

RunResult run_sgd(const NoisyObjective& objective, const EstimatorConfig& estimator,
                  const Schedule& schedule, std::span<const double> theta0, std::size_t budget,
                  std::uint64_t seed, const RunOptions& options) {
  validate(schedule);
  if (!(options.divergence_guard > 0.0)) throw ConfigError("divergence guard must be > 0");
  const std::size_t dim = objective.dim();
  if (theta0.size() != dim) throw ConfigError("theta0 has the wrong dimension");

  GradientEstimator est(estimator.side, estimator.scheme, dim);
  const std::size_t per_iter = est.measurements();
  if (budget < per_iter) {
    throw ConfigError("budget " + std::to_string(budget) + " is smaller than one estimate (" +
                      std::to_string(per_iter) + " measurements)");
  }

  RngStream rng(seed);
  RunResult result;
  Vector theta(theta0.begin(), theta0.end());
  Vector g(dim);
  Vector previous(dim);
  const std::size_t iterations = budget / per_iter;
  if (options.record_trace) result.trace.reserve(iterations);

  for (std::size_t n = 1; n <= iterations; ++n) {
    const double a = step_size(schedule, n);
    const double delta = perturbation_width(schedule, n);
    result.measurements_used += est.estimate(objective, theta, delta, rng, g);

    if (options.record_trace) {
      double norm2 = 0.0;
      for (double x : g) norm2 += x * x;
      result.trace.push_back({n, theta, a, delta, std::sqrt(norm2)});
    }

    std::copy(theta.begin(), theta.end(), previous.begin());
    double sup = 0.0;
    bool finite = true;
    for (std::size_t i = 0; i < dim; ++i) {
      theta[i] -= a * g[i];
      finite = finite && std::isfinite(theta[i]);
      sup = std::max(sup, std::abs(theta[i]));
    }
    if (!finite || sup > options.divergence_guard) {
      std::ostringstream msg;
      msg << "iterate diverged at n=" << n << (finite ? " (|theta|_inf = " : " (non-finite")
          << (finite ? std::to_string(sup) : std::string()) << ")";
      throw DivergenceError(msg.str(), n, previous);
    }
    result.iterations = n;
  }

  result.final_theta = std::move(theta);
  if (const auto& opt = objective.optimum();
      opt && !std::equal(theta0.begin(), theta0.end(), opt->begin())) {
    result.parameter_error = parameter_error(result.final_theta, theta0, *opt);
  }
  return result;
}

}  // namespace gspgs
