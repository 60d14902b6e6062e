#include "gspgs/perturbations.hpp"

#include <charconv>
#include <cmath>
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

double parse_positive(std::string_view name, std::string_view text) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError("invalid " + std::string(name) + " parameter '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

void validate(const PerturbationScheme& scheme) {
  std::visit(overloaded{
                 [](const IntervalUniform& s) {
                   if (!(s.eta > 0.0) || !std::isfinite(s.eta)) {
                     throw ConfigError("uniform perturbation requires eta > 0");
                   }
                 },
                 [](const AsymmetricBernoulli& s) {
                   if (!(s.epsilon > 0.0) || !std::isfinite(s.epsilon)) {
                     throw ConfigError("asymmetric Bernoulli perturbation requires epsilon > 0");
                   }
                 },
                 [](const auto&) {},
             },
             scheme);
}

double weight_scale(const PerturbationScheme& scheme, std::size_t dim) {
  return std::visit(overloaded{
                        [](const SymmetricBernoulli&) { return 1.0; },
                        [](const Gaussian&) { return 1.0; },
                        [dim](const SphereUniform&) { return static_cast<double>(dim); },
                        [](const IntervalUniform& s) { return 3.0 / (s.eta * s.eta); },
                        [](const AsymmetricBernoulli& s) { return 1.0 / (1.0 + s.epsilon); },
                    },
                    scheme);
}

PerturbationScheme parse_scheme(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  const std::string_view arg =
      colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);

  PerturbationScheme scheme;
  if (head == "bernoulli" && arg.empty()) {
    scheme = SymmetricBernoulli{};
  } else if (head == "gaussian" && arg.empty()) {
    scheme = Gaussian{};
  } else if (head == "sphere" && arg.empty()) {
    scheme = SphereUniform{};
  } else if (head == "uniform") {
    scheme = IntervalUniform{arg.empty() ? 1.0 : parse_positive("eta", arg)};
  } else if (head == "asym-bernoulli") {
    scheme = AsymmetricBernoulli{arg.empty() ? 0.1 : parse_positive("epsilon", arg)};
  } else {
    throw ConfigError("unknown perturbation scheme '" + std::string(text) + "'");
  }
  validate(scheme);
  return scheme;
}

std::string to_string(const PerturbationScheme& scheme) {
  return std::visit(overloaded{
                        [](const SymmetricBernoulli&) -> std::string { return "bernoulli"; },
                        [](const Gaussian&) -> std::string { return "gaussian"; },
                        [](const SphereUniform&) -> std::string { return "sphere"; },
                        [](const IntervalUniform& s) {
                          std::ostringstream os;
                          os << "uniform:" << s.eta;
                          return os.str();
                        },
                        [](const AsymmetricBernoulli& s) {
                          std::ostringstream os;
                          os << "asym-bernoulli:" << s.epsilon;
                          return os.str();
                        },
                    },
                    scheme);
}

void sample_uv_into(const PerturbationScheme& scheme, std::span<double> u, std::span<double> v,
                    RngStream& rng) {
  const std::size_t dim = u.size();
  if (dim == 0) throw ConfigError("perturbation dimension must be >= 1");
  if (v.size() != dim) throw ConfigError("U and V buffers differ in length");
  validate(scheme);

  std::visit(overloaded{
                 [&](const SymmetricBernoulli&) {
                   for (auto& x : u) x = rng.bernoulli(0.5) ? 1.0 : -1.0;
                 },
                 [&](const Gaussian&) {
                   for (auto& x : u) x = rng.normal();
                 },
                 [&](const SphereUniform&) {
                   double norm2 = 0.0;
                   do {
                     norm2 = 0.0;
                     for (auto& x : u) {
                       x = rng.normal();
                       norm2 += x * x;
                     }
                   } while (norm2 == 0.0);
                   const double inv = 1.0 / std::sqrt(norm2);
                   for (auto& x : u) x *= inv;
                 },
                 [&](const IntervalUniform& s) {
                   for (auto& x : u) x = rng.uniform(-s.eta, s.eta);
                 },
                 [&](const AsymmetricBernoulli& s) {
                   const double p_neg = (1.0 + s.epsilon) / (2.0 + s.epsilon);
                   for (auto& x : u) x = rng.bernoulli(p_neg) ? -1.0 : 1.0 + s.epsilon;
                 },
             },
             scheme);

  const double c = weight_scale(scheme, dim);
  for (std::size_t i = 0; i < dim; ++i) v[i] = c * u[i];
}

PerturbationSample sample_uv(const PerturbationScheme& scheme, std::size_t dim, RngStream& rng) {
  if (dim == 0) throw ConfigError("perturbation dimension must be >= 1");
  PerturbationSample s{std::vector<double>(dim), std::vector<double>(dim)};
  sample_uv_into(scheme, s.u, s.v, rng);
  return s;
}

std::vector<std::pair<double, double>> finite_support(const PerturbationScheme& scheme) {
  return std::visit(overloaded{
                        [](const SymmetricBernoulli&) -> std::vector<std::pair<double, double>> {
                          return {{-1.0, 0.5}, {1.0, 0.5}};
                        },
                        [](const AsymmetricBernoulli& s) -> std::vector<std::pair<double, double>> {
                          const double e = s.epsilon;
                          return {{-1.0, (1.0 + e) / (2.0 + e)}, {1.0 + e, 1.0 / (2.0 + e)}};
                        },
                        [](const auto&) { return std::vector<std::pair<double, double>>{}; },
                    },
                    scheme);
}

}  // namespace gspgs
