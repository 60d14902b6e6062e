#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "gspgs/rng.hpp"

namespace gspgs {

// Perturbation families. Each defines how the direction U is drawn; the
// weight vector V is always a fixed scalar multiple of U chosen so that
// E[V U^T] = I and E[V] = 0.

/// U_i = +-1 with probability 1/2, V = U.
struct SymmetricBernoulli {};
/// U ~ N(0, I), V = U.
struct Gaussian {};
/// U uniform on the unit sphere, V = d U.
struct SphereUniform {};
/// U_i ~ Uniform[-eta, eta], V = (3 / eta^2) U.
struct IntervalUniform {
  double eta = 1.0;
};
/// U_i in {-1, 1 + eps} with P(-1) = (1+eps)/(2+eps), V = U / (1 + eps).
struct AsymmetricBernoulli {
  double epsilon = 0.1;
};

using PerturbationScheme =
    std::variant<SymmetricBernoulli, Gaussian, SphereUniform, IntervalUniform, AsymmetricBernoulli>;

/// Throws ConfigError if eta <= 0 or epsilon <= 0 (or non-finite).
void validate(const PerturbationScheme& scheme);

/// Scalar c with V = c U for this scheme in dimension d.
double weight_scale(const PerturbationScheme& scheme, std::size_t dim);

/// "bernoulli", "gaussian", "sphere", "uniform:<eta>", "asym-bernoulli:<eps>".
/// "uniform" alone means eta = 1.
PerturbationScheme parse_scheme(std::string_view text);
std::string to_string(const PerturbationScheme& scheme);

struct PerturbationSample {
  std::vector<double> u;
  std::vector<double> v;
};

PerturbationSample sample_uv(const PerturbationScheme& scheme, std::size_t dim, RngStream& rng);

/// Allocation-free variant; u and v must both have the target dimension.
void sample_uv_into(const PerturbationScheme& scheme, std::span<double> u, std::span<double> v,
                    RngStream& rng);

/// Per-coordinate law as (value, probability) atoms, for schemes whose
/// coordinates are i.i.d. with finite support. Empty for continuous schemes.
std::vector<std::pair<double, double>> finite_support(const PerturbationScheme& scheme);

}  // namespace gspgs
