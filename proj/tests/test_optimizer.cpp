#include <doctest.h>

#include <cmath>
#include <vector>

#include "gspgs/errors.hpp"
#include "gspgs/estimators.hpp"
#include "gspgs/optimizer.hpp"

using namespace gspgs;

TEST_CASE("decaying schedule values") {
  const Schedule s = DecayingSchedule{3.0, 50.0, 1.0, 2.9, 0.101};
  CHECK(step_size(s, 1) == doctest::Approx(3.0 / 51.0));
  CHECK(step_size(s, 950) == doctest::Approx(3.0 / 1000.0));
  CHECK(perturbation_width(s, 1) == doctest::Approx(2.9));
  CHECK(perturbation_width(s, 1000) == doctest::Approx(2.9 / std::pow(1000.0, 0.101)));
  const Schedule c = ConstantSchedule{0.01, 0.2};
  CHECK(step_size(c, 7) == 0.01);
  CHECK(perturbation_width(c, 7) == 0.2);
}

TEST_CASE("schedule strings round-trip") {
  for (const Schedule& s : {Schedule{DecayingSchedule{3.0, 50.0, 1.0, 2.9, 0.101}},
                            Schedule{DecayingSchedule{1.0, 65.0, 0.602, 26.8, 0.101}},
                            Schedule{ConstantSchedule{0.001953125, 0.125}}}) {
    const std::string text = to_string(s);
    CAPTURE(text);
    CHECK(to_string(parse_schedule(text)) == text);
  }
  CHECK(to_string(Schedule{DecayingSchedule{3.0, 50.0, 1.0, 2.9, 0.101}}) ==
        "3/(n+50)^1 | 2.9/n^0.101");
  CHECK_THROWS_AS(parse_schedule("3/(n+50)"), ConfigError);
  CHECK_THROWS_AS(parse_schedule("0 | 0.1"), ConfigError);
}

TEST_CASE("schedule validation") {
  CHECK_THROWS_AS(validate(Schedule{DecayingSchedule{0.0, 1.0, 1.0, 1.0, 0.1}}), ConfigError);
  CHECK_THROWS_AS(validate(Schedule{DecayingSchedule{1.0, -1.0, 1.0, 1.0, 0.1}}), ConfigError);
  CHECK_THROWS_AS(validate(Schedule{DecayingSchedule{1.0, 1.0, NAN, 1.0, 0.1}}), ConfigError);
  CHECK_THROWS_AS(validate(Schedule{ConstantSchedule{0.1, 0.0}}), ConfigError);
  CHECK_THROWS_AS(validate(Schedule{ConstantSchedule{INFINITY, 0.1}}), ConfigError);
}

TEST_CASE("theorem-2 parameters") {
  auto p = theorem2_params(1, 2.0, 1);
  CHECK(p.a == 0.5);
  CHECK(p.delta == 1.0);

  p = theorem2_params(4096, 1.0, 1);
  CHECK(p.a == doctest::Approx(1.0 / 512).epsilon(1e-14));
  CHECK(p.delta == doctest::Approx(1.0 / 8).epsilon(1e-14));

  p = theorem2_params(1'000'000, 1.0, 4);
  CHECK(p.a == doctest::Approx(std::pow(10.0, -3.6)).epsilon(1e-12));
  CHECK(p.delta == doctest::Approx(std::pow(10.0, -0.6)).epsilon(1e-12));

  // Small m: the 1/L cap binds.
  CHECK(theorem2_params(2, 4.0, 1).a == 0.25);
  CHECK_THROWS_AS(theorem2_params(0, 1.0, 1), ConfigError);
  CHECK_THROWS_AS(theorem2_params(10, 0.0, 1), ConfigError);
  CHECK_THROWS_AS(theorem2_params(10, 1.0, 0), ConfigError);
}

TEST_CASE("parameter error") {
  const std::vector<double> star{0.0, 0.0}, start{2.0, 2.0};
  CHECK(parameter_error(star, start, star) == 0.0);
  CHECK(parameter_error(start, start, star) == 1.0);
  CHECK(parameter_error(std::vector<double>{1.0, 1.0}, start, star) == doctest::Approx(0.25));
  CHECK_THROWS_AS(parameter_error(start, star, star), UndefinedMetricError);
  CHECK_THROWS_AS(parameter_error(std::vector<double>{1.0}, start, star), ConfigError);
}

TEST_CASE("FDSA gradient descent on the noiseless quadratic") {
  const auto q = make_quadratic(2, 0.0);
  const auto run = run_sgd(q, {Fdsa{}, SymmetricBernoulli{}, 0.01}, ConstantSchedule{0.1, 0.01},
                           std::vector<double>(2, 0.0), 4000, 1);
  CHECK(run.iterations == 1000);
  CHECK(run.measurements_used == 4000);
  REQUIRE(run.parameter_error.has_value());
  CHECK(*run.parameter_error <= 1e-6);
}

TEST_CASE("budget accounting") {
  const auto q = make_quadratic(3, 0.001);
  const Schedule s = DecayingSchedule{1.0, 50.0, 1.0, 7.9, 0.101};
  const std::vector<double> theta0(3, 0.0);
  auto run = run_sgd(q, {OneSided{4}, SymmetricBernoulli{}, 0.1}, s, theta0, 1000, 1);
  CHECK(run.iterations == 200);
  CHECK(run.measurements_used == 1000);

  // Leftover measurements that cannot fund a whole estimate are not spent.
  run = run_sgd(q, {Balanced{2}, SymmetricBernoulli{}, 0.1}, s, theta0, 1003, 1);
  CHECK(run.iterations == 250);
  CHECK(run.measurements_used == 1000);

  run = run_sgd(q, {Fdsa{}, SymmetricBernoulli{}, 0.1}, s, theta0, 13, 1);
  CHECK(run.iterations == 2);

  CHECK_THROWS_AS(run_sgd(q, {OneSided{4}, SymmetricBernoulli{}, 0.1}, s, theta0, 4, 1),
                  ConfigError);
}

TEST_CASE("a single iteration applies one update") {
  const auto q = make_quadratic(4, 0.01);
  const std::vector<double> theta0{0.5, -1.0, 0.0, 2.0};
  const EstimatorConfig cfg{OneSided{2}, Gaussian{}, 0.3};
  const Schedule s = ConstantSchedule{0.05, 0.3};
  const auto run = run_sgd(q, cfg, s, theta0, 3, 99);
  REQUIRE(run.iterations == 1);

  RngStream rng(99);
  const auto g = estimate_gradient(q, theta0, cfg, rng).g;
  std::vector<double> expected(4);
  for (std::size_t i = 0; i < 4; ++i) expected[i] = theta0[i] - 0.05 * g[i];
  CHECK(run.final_theta == expected);
  REQUIRE(run.parameter_error.has_value());
  CHECK(*run.parameter_error == parameter_error(expected, theta0, *q.optimum()));
}

TEST_CASE("runs are reproducible and seeds matter") {
  const auto r = make_rastrigin(5, 0.001);
  const Schedule s = DecayingSchedule{3.0, 50.0, 1.0, 2.9, 0.101};
  const EstimatorConfig cfg{OneSided{2}, SymmetricBernoulli{}, 0.1};
  const std::vector<double> theta0(5, 2.0);
  const auto a = run_sgd(r, cfg, s, theta0, 3000, 7);
  const auto b = run_sgd(r, cfg, s, theta0, 3000, 7);
  const auto c = run_sgd(r, cfg, s, theta0, 3000, 8);
  CHECK(a.final_theta == b.final_theta);
  CHECK(a.final_theta != c.final_theta);
}

TEST_CASE("trace records every iteration") {
  const auto q = make_quadratic(2, 0.0);
  RunOptions opts;
  opts.record_trace = true;
  const std::vector<double> theta0{1.0, 1.0};
  const auto run = run_sgd(q, {OneSided{1}, SymmetricBernoulli{}, 0.1},
                           DecayingSchedule{1.0, 10.0, 1.0, 0.5, 0.101}, theta0, 20, 3, opts);
  REQUIRE(run.trace.size() == 10);
  CHECK(run.trace.front().n == 1);
  CHECK(run.trace.front().theta == theta0);
  CHECK(run.trace.front().a == doctest::Approx(1.0 / 11.0));
  CHECK(run.trace.back().n == 10);
  CHECK(run.trace.back().delta == doctest::Approx(0.5 / std::pow(10.0, 0.101)));
  for (const auto& t : run.trace) CHECK(t.grad_norm >= 0.0);
}

TEST_CASE("divergence guard aborts with a diagnostic") {
  const auto q = make_quadratic(3, 0.0);
  const std::vector<double> theta0{1.0, 1.0, 1.0};
  // Step 10 on curvature 4/3 expands by ~12 per iteration.
  try {
    run_sgd(q, {Fdsa{}, SymmetricBernoulli{}, 0.01}, ConstantSchedule{10.0, 0.01}, theta0, 6000, 1);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.iteration() > 1);
    CHECK(e.iteration() < 20);
    REQUIRE(e.last_finite_theta().size() == 3);
    for (double x : e.last_finite_theta()) CHECK(std::abs(x) <= 1e6);
  }

  // A larger guard lets the same run continue further.
  RunOptions loose;
  loose.divergence_guard = 1e12;
  try {
    run_sgd(q, {Fdsa{}, SymmetricBernoulli{}, 0.01}, ConstantSchedule{10.0, 0.01}, theta0, 6000, 1,
            loose);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.iteration() > 8);
  }

  RunOptions bad;
  bad.divergence_guard = 0.0;
  CHECK_THROWS_AS(run_sgd(q, {Fdsa{}, SymmetricBernoulli{}, 0.01}, ConstantSchedule{0.1, 0.01},
                          theta0, 60, 1, bad),
                  ConfigError);
}

TEST_CASE("no parameter error when starting at the optimum") {
  const auto q = make_quadratic(2, 0.0);
  const auto run = run_sgd(q, {Fdsa{}, SymmetricBernoulli{}, 0.01}, ConstantSchedule{0.1, 0.01},
                           *q.optimum(), 40, 1);
  CHECK_FALSE(run.parameter_error.has_value());
  CHECK_THROWS_AS(run_sgd(q, {Fdsa{}, SymmetricBernoulli{}, 0.01}, ConstantSchedule{0.1, 0.01},
                          std::vector<double>{1.0}, 40, 1),
                  ConfigError);
}
