#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <iosfwd>
#include <string>
#include <vector>

namespace gspgs {

using Rational = boost::multiprecision::cpp_rational;

inline constexpr int kMaxOneSidedOrder = 12;
inline constexpr int kMaxBalancedOrder = 8;

/// Weights w_0..w_k of the one-sided (k+1)-point stencil along a direction:
/// D = (1/delta) * sum_l w_l F(theta + l delta U).
///
///   w_l = (-1)^(1-l) C_l / l!,  C_0 = H_k,  C_l = (1/l) k (k-1) ... (k-l+1).
///
/// The weights annihilate constants and monomials l^q for 2 <= q <= k and give
/// unit weight to the linear term, so the stencil is exact for polynomials of
/// degree <= k.
struct OneSidedCoefficients {
  int order = 0;
  std::vector<Rational> exact;
  std::vector<double> weights;
};

/// Weights b_0..b_{k-1} of the balanced 2k-point stencil:
/// D = (1/delta) * sum_j b_j (F(theta + (2j+1) delta U) - F(theta - (2j+1) delta U)) / 2,
///
///   b_j = (-1)^j sum_{i=j}^{k-1} K_i binom(2i+1, i-j),  K_i = (2i)! / (16^i (i!)^2 (2i+1)).
///
/// Exact for polynomials of degree <= 2k.
struct BalancedCoefficients {
  int order = 0;
  std::vector<Rational> exact;
  std::vector<double> weights;
};

/// Throws ConfigError unless 1 <= k1 <= kMaxOneSidedOrder.
OneSidedCoefficients onesided_coefficients(int k1);
/// Throws ConfigError unless 1 <= k2 <= kMaxBalancedOrder.
BalancedCoefficients balanced_coefficients(int k2);

/// Cached double tables (same values as the *_coefficients functions).
const std::vector<double>& onesided_weights(int k1);
const std::vector<double>& balanced_weights(int k2);

Rational binomial(int n, int k);
Rational factorial(int n);
/// K_i of the balanced expansion.
Rational balanced_series_term(int i);

std::string to_string(const Rational& r);

/// CSV rows "kind,k,index,exact,value" for every order up to the given maxima.
void write_coefficients_csv(std::ostream& os, int max_onesided, int max_balanced);

}  // namespace gspgs
