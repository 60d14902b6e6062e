#include "gspgs/coefficients.hpp"

#include <array>
#include <iomanip>
#include <limits>
#include <ostream>

#include "gspgs/errors.hpp"

namespace gspgs {

Rational factorial(int n) {
  Rational r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

Rational binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  Rational r = 1;
  for (int i = 1; i <= k; ++i) {
    r *= n - k + i;
    r /= i;
  }
  return r;
}

Rational balanced_series_term(int i) {
  // (2i)! / (2^(4i) (i!)^2 (2i+1)) = binom(2i, i) / (16^i (2i+1))
  Rational denom = 2 * i + 1;
  for (int t = 0; t < i; ++t) denom *= 16;
  return binomial(2 * i, i) / denom;
}

std::string to_string(const Rational& r) {
  const auto num = boost::multiprecision::numerator(r);
  const auto den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

OneSidedCoefficients onesided_coefficients(int k1) {
  if (k1 < 1 || k1 > kMaxOneSidedOrder) {
    throw ConfigError("one-sided order k1 must be in [1, " + std::to_string(kMaxOneSidedOrder) +
                      "], got " + std::to_string(k1));
  }
  OneSidedCoefficients out;
  out.order = k1;
  out.exact.reserve(k1 + 1);

  Rational harmonic = 0;
  for (int j = 1; j <= k1; ++j) harmonic += Rational(1, j);
  out.exact.push_back(-harmonic);  // (-1)^(1-0) * C_0 / 0!

  for (int l = 1; l <= k1; ++l) {
    Rational falling = 1;
    for (int j = 0; j < l; ++j) falling *= k1 - j;
    const Rational c = falling / l;
    const Rational w = c / factorial(l);
    out.exact.push_back((l % 2 == 1) ? w : Rational(-w));
  }

  out.weights.reserve(out.exact.size());
  for (const auto& w : out.exact) out.weights.push_back(static_cast<double>(w));
  return out;
}

BalancedCoefficients balanced_coefficients(int k2) {
  if (k2 < 1 || k2 > kMaxBalancedOrder) {
    throw ConfigError("balanced order k2 must be in [1, " + std::to_string(kMaxBalancedOrder) +
                      "], got " + std::to_string(k2));
  }
  BalancedCoefficients out;
  out.order = k2;
  out.exact.reserve(k2);
  for (int j = 0; j < k2; ++j) {
    Rational b = 0;
    for (int i = j; i < k2; ++i) b += balanced_series_term(i) * binomial(2 * i + 1, i - j);
    out.exact.push_back(j % 2 == 0 ? b : Rational(-b));
  }
  out.weights.reserve(out.exact.size());
  for (const auto& w : out.exact) out.weights.push_back(static_cast<double>(w));
  return out;
}

namespace {

template <int N, class Make>
const std::vector<double>& cached(int k, Make make) {
  static const std::array<std::vector<double>, N> tables = [&] {
    std::array<std::vector<double>, N> t;
    for (int i = 0; i < N; ++i) t[i] = make(i + 1).weights;
    return t;
  }();
  if (k < 1 || k > N) make(k);  // throws the usual ConfigError
  return tables[k - 1];
}

}  // namespace

const std::vector<double>& onesided_weights(int k1) {
  return cached<kMaxOneSidedOrder>(k1, onesided_coefficients);
}

const std::vector<double>& balanced_weights(int k2) {
  return cached<kMaxBalancedOrder>(k2, balanced_coefficients);
}

void write_coefficients_csv(std::ostream& os, int max_onesided, int max_balanced) {
  os << "kind,k,index,exact,value\n";
  const auto old_precision = os.precision(std::numeric_limits<double>::max_digits10);
  for (int k = 1; k <= max_onesided; ++k) {
    const auto c = onesided_coefficients(k);
    for (std::size_t l = 0; l < c.exact.size(); ++l) {
      os << "onesided," << k << ',' << l << ',' << to_string(c.exact[l]) << ',' << c.weights[l]
         << '\n';
    }
  }
  for (int k = 1; k <= max_balanced; ++k) {
    const auto c = balanced_coefficients(k);
    for (std::size_t j = 0; j < c.exact.size(); ++j) {
      os << "balanced," << k << ',' << j << ',' << to_string(c.exact[j]) << ',' << c.weights[j]
         << '\n';
    }
  }
  os.precision(old_precision);
}

}  // namespace gspgs
