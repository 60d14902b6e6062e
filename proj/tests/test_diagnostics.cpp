#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numeric>
#include <sstream>
#include <vector>

#include "gspgs/diagnostics.hpp"
#include "gspgs/errors.hpp"

using namespace gspgs;

namespace {

double norm(const Vector& v) { return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0)); }

const std::vector<double> kGrid{0.2, 0.1, 0.05, 0.025};

EstimatorConfig bernoulli(EstimatorSide side) { return {side, SymmetricBernoulli{}, 0.1}; }

}  // namespace

TEST_CASE("log-log fit") {
  const std::vector<double> x{0.1, 0.2, 0.4, 0.8};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * v * v);
  const auto fit = fit_loglog(x, y);
  CHECK(fit.slope == doctest::Approx(2.0));
  CHECK(std::exp(fit.intercept) == doctest::Approx(3.0));
  CHECK(fit.residual <= 1e-12);
  CHECK_THROWS_AS(fit_loglog(std::vector<double>{1.0}, std::vector<double>{1.0}), ConfigError);
  CHECK_THROWS_AS(fit_loglog(std::vector<double>{1.0, 2.0}, std::vector<double>{0.0, 1.0}),
                  ConfigError);
  CHECK_THROWS_AS(fit_loglog(std::vector<double>{1.0, 1.0}, std::vector<double>{1.0, 2.0}),
                  ConfigError);
}

TEST_CASE("linear functions have zero bias") {
  const NoisyObjective lin(
      "linear", 3, 0.0, [](std::span<const double> x) { return x[0] - 2 * x[1] + 0.5 * x[2]; },
      [](std::span<const double>) { return Vector{1.0, -2.0, 0.5}; });
  const Vector theta{0.3, 0.1, -0.4};
  for (int k = 1; k <= 6; ++k) {
    CHECK(norm(exact_bias_enumerated(lin, theta, bernoulli(OneSided{k}))) <= 1e-12);
    CHECK(norm(exact_bias_enumerated(lin, theta, {OneSided{k}, AsymmetricBernoulli{0.2}, 0.3})) <=
          1e-12);
  }
}

TEST_CASE("second-order exactness on the quadratic") {
  const auto q = make_quadratic(4, 0.0);
  const Vector theta{0.5, -1.0, 2.0, 0.25};
  for (double delta : {0.01, 0.3, 1.0}) {
    for (EstimatorSide side : {EstimatorSide{OneSided{2}}, EstimatorSide{OneSided{4}},
                               EstimatorSide{Balanced{1}}, EstimatorSide{Balanced{2}}}) {
      CHECK(norm(exact_bias_enumerated(q, theta, {side, SymmetricBernoulli{}, delta})) <= 1e-10);
      CHECK(norm(exact_bias_enumerated(q, theta, {side, AsymmetricBernoulli{0.1}, delta})) <= 1e-10);
    }
  }
  // One-sided first order keeps an O(delta) curvature term, unless the direction law
  // has vanishing third moments (symmetric Bernoulli), where it cancels exactly.
  CHECK(norm(exact_bias_enumerated(q, theta, {OneSided{1}, AsymmetricBernoulli{0.5}, 0.1})) > 1e-3);
  CHECK(norm(exact_bias_enumerated(q, theta, bernoulli(OneSided{1}))) <= 1e-10);
}

TEST_CASE("enumeration agrees with the Bernoulli-only oracle") {
  const auto m = make_monomial({2, 1, 1});
  const Vector theta{0.7, -0.3, 1.2};
  for (EstimatorSide side : {EstimatorSide{OneSided{1}}, EstimatorSide{OneSided{3}},
                             EstimatorSide{Balanced{1}}}) {
    const auto a = exact_bias_enumerated(m, theta, bernoulli(side));
    const auto b = exact_bias_bernoulli(m, theta, bernoulli(side));
    for (std::size_t i = 0; i < 3; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
  }
  CHECK_THROWS_AS(exact_bias_bernoulli(m, theta, {OneSided{1}, AsymmetricBernoulli{0.1}, 0.1}),
                  ConfigError);
}

TEST_CASE("enumeration agrees with Monte Carlo") {
  const auto m = make_monomial({2, 1, 0});
  const Vector theta{1.0, 1.0, 1.0};
  const EstimatorConfig cfg{OneSided{1}, AsymmetricBernoulli{0.3}, 0.2};
  const auto exact = exact_bias_enumerated(m, theta, cfg);
  const auto plain = monte_carlo_bias_plain(m, theta, cfg, 200'000, 5);
  const auto cv = monte_carlo_bias(m, theta, cfg, 200'000, 6);
  for (std::size_t i = 0; i < 3; ++i) {
    CAPTURE(i);
    CHECK(std::abs(plain.bias[i] - exact[i]) <= 4 * plain.standard_error[i] + 1e-12);
    CHECK(std::abs(cv.bias[i] - exact[i]) <= 4 * cv.standard_error[i] + 1e-12);
    // The control variate removes the direction noise of the linear part.
    CHECK(cv.standard_error[i] <= plain.standard_error[i]);
  }
}

TEST_CASE("enumeration preconditions") {
  CHECK_THROWS_AS(exact_bias_enumerated(make_quadratic(13, 0.0), Vector(13, 0.0),
                                        bernoulli(OneSided{1})),
                  ConfigError);
  CHECK_THROWS_AS(exact_bias_enumerated(make_quadratic(2, 0.1), Vector(2, 0.0),
                                        bernoulli(OneSided{1})),
                  ConfigError);
  CHECK_THROWS_AS(exact_bias_enumerated(make_quadratic(2, 0.0), Vector(2, 0.0),
                                        {OneSided{1}, Gaussian{}, 0.1}),
                  ConfigError);
  CHECK_THROWS_AS(exact_bias_enumerated(make_quadratic(2, 0.0), Vector(2, 0.0),
                                        {Fdsa{}, SymmetricBernoulli{}, 0.1}),
                  ConfigError);
  CHECK_THROWS_AS(exact_bias_enumerated(make_quadratic(2, 0.0), Vector(3, 0.0),
                                        bernoulli(OneSided{1})),
                  ConfigError);
  CHECK_NOTHROW(exact_bias_enumerated(make_quadratic(12, 0.0), Vector(12, 0.0),
                                      bernoulli(OneSided{1})));
}

TEST_CASE("bias order sweeps") {
  SUBCASE("first order on theta_1^2 theta_2") {
    const std::vector<double> grid{0.1, 0.05, 0.025};
    const auto r = bias_order_sweep(make_monomial({2, 1}), Vector{1.0, 1.0},
                                    bernoulli(OneSided{1}), grid);
    REQUIRE(r.verdict == "slope");
    CHECK(r.fit->slope >= 0.8);
    CHECK(r.standard_errors.empty());
  }
  SUBCASE("second order on a cubic") {
    const auto r = bias_order_sweep(make_monomial({2, 1, 0}), Vector(3, 1.0),
                                    bernoulli(OneSided{2}), kGrid);
    REQUIRE(r.verdict == "slope");
    CHECK(r.fit->slope == doctest::Approx(2.0).epsilon(0.1));
  }
  SUBCASE("balanced second order on a quintic") {
    const auto r = bias_order_sweep(make_monomial({4, 1, 0}), Vector(3, 1.0),
                                    bernoulli(Balanced{2}), kGrid);
    REQUIRE(r.verdict == "slope");
    CHECK(std::abs(r.fit->slope - 4.0) <= 0.3);
  }
  SUBCASE("first order is exact on a pure quadratic in one dimension") {
    const auto r = bias_order_sweep(make_monomial({2}), Vector{0.7}, bernoulli(OneSided{1}), kGrid);
    CHECK(r.verdict == "exact");
    CHECK_FALSE(r.fit.has_value());
  }
  SUBCASE("continuous schemes fall back to Monte Carlo") {
    // Symmetric Gaussian directions cancel the delta^1 term; delta^2 leads.
    const auto r = bias_order_sweep(make_monomial({2, 1}), Vector{1.0, 1.0},
                                    {OneSided{1}, Gaussian{}, 0.1}, kGrid, 200'000, 3);
    REQUIRE(r.verdict == "slope");
    CHECK(r.standard_errors.size() == kGrid.size());
    CHECK(std::abs(r.fit->slope - 2.0) <= 0.3);
  }
}

TEST_CASE("sweep grid validation") {
  const auto m = make_monomial({2, 1});
  const Vector theta{1.0, 1.0};
  const auto cfg = bernoulli(OneSided{1});
  CHECK_THROWS_AS(bias_order_sweep(m, theta, cfg, std::vector<double>{0.1}), ConfigError);
  CHECK_THROWS_AS(bias_order_sweep(m, theta, cfg, std::vector<double>{0.1, 0.2}), ConfigError);
  CHECK_THROWS_AS(bias_order_sweep(m, theta, cfg, std::vector<double>{2.0, 0.1}), ConfigError);
  CHECK_THROWS_AS(bias_order_sweep(m, theta, cfg, std::vector<double>{0.1, 0.0}), ConfigError);
}

TEST_CASE("variance scaling") {
  const std::vector<double> grid{0.1, 0.05, 0.025};
  const auto q = make_quadratic(5, 0.1);
  const auto r = variance_scaling_sweep(q, *q.optimum(), bernoulli(OneSided{1}), grid, 20'000, 2);
  REQUIRE(r.fit.has_value());
  CHECK(r.quantity == "variance");
  CHECK(std::abs(r.fit->slope + 2.0) <= 0.3);

  // Noiseless linear: only direction randomness, no delta dependence.
  const NoisyObjective lin(
      "linear", 2, 0.0, [](std::span<const double> x) { return x[0] + x[1]; },
      [](std::span<const double>) { return Vector{1.0, 1.0}; });
  const auto flat = variance_scaling_sweep(lin, Vector{0.0, 0.0}, {OneSided{2}, Gaussian{}, 0.1},
                                           grid, 20'000, 2);
  CHECK(std::abs(flat.fit->slope) <= 0.1);
  CHECK_THROWS_AS(variance_scaling_sweep(q, *q.optimum(), bernoulli(OneSided{1}), grid, 1),
                  ConfigError);
}

TEST_CASE("sweep report output") {
  const auto r = bias_order_sweep(make_monomial({2, 1, 0}), Vector(3, 1.0), bernoulli(OneSided{2}),
                                  kGrid);
  std::ostringstream os;
  write_csv(os, r);
  const std::string csv = os.str();
  CHECK(csv.rfind("delta,bias\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);

  const auto j = nlohmann::json::parse(to_json(r));
  CHECK(j["schema"] == 1);
  CHECK(j["quantity"] == "bias");
  CHECK(j["verdict"] == "slope");
  CHECK(j["deltas"].size() == 4);
  CHECK(j["slope"].get<double>() == doctest::Approx(r.fit->slope));

  const auto exact = bias_order_sweep(make_monomial({2}), Vector{0.7}, bernoulli(OneSided{1}), kGrid);
  const auto je = nlohmann::json::parse(to_json(exact));
  CHECK(je["verdict"] == "exact");
  CHECK(je["slope"].is_null());
}

TEST_CASE("coefficient identities") {
  const auto report = identity_check(12);
  CHECK(report.all_hold());
  for (const char* name : {"harmonic", "alternating", "power", "balanced-linear", "balanced-odd"}) {
    CAPTURE(name);
    CHECK(std::any_of(report.entries.begin(), report.entries.end(),
                      [&](const IdentityResult& e) { return e.name == name; }));
  }
  const auto small = identity_check(1);
  CHECK(small.all_hold());
  CHECK_FALSE(small.entries.empty());
  for (const auto& e : small.entries) CHECK(e.k == 1);

  // k = 3, q = 2 power identity is among the entries and holds.
  CHECK(std::any_of(report.entries.begin(), report.entries.end(), [](const IdentityResult& e) {
    return e.name == "power" && e.k == 3 && e.q == 2 && e.holds;
  }));
  CHECK_THROWS_AS(identity_check(0), ConfigError);
  CHECK_THROWS_AS(identity_check(13), ConfigError);
}
