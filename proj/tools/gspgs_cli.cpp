// gspgs: command-line harness for the estimator, optimiser and diagnostics.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gspgs/coefficients.hpp"
#include "gspgs/diagnostics.hpp"
#include "gspgs/errors.hpp"
#include "gspgs/estimators.hpp"
#include "gspgs/experiment.hpp"
#include "gspgs/objectives.hpp"
#include "gspgs/optimizer.hpp"

namespace {

using nlohmann::json;
using namespace gspgs;

int fail(const std::string& type, const std::string& message, int code = 1) {
  json j;
  j["schema"] = 1;
  j["error"] = {{"type", type}, {"message", message}};
  std::cout << j.dump() << std::endl;
  return code;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ConfigError("invalid number '" + item + "' in list '" + text + "'");
    }
    if (used != item.size()) throw ConfigError("invalid number '" + item + "' in list '" + text + "'");
    out.push_back(v);
  }
  return out;
}

// Reads "key = value" lines ('#' comments) and turns them into "--key=value"
// tokens. They are placed before the command-line flags so explicit flags win.
std::vector<std::string> config_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::vector<std::string> tokens;
  std::string line;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line without '=': " + line);
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.rfind("--", 0) != 0) key = "--" + key;
    if (value == "true") {
      tokens.push_back(key);
    } else if (value != "false") {
      tokens.push_back(key + "=" + value);
    }
  }
  return tokens;
}

struct ProblemFlags {
  std::string method = "gspsa";
  int k = 1;
  std::string objective = "rastrigin";
  std::size_t dim = 10;
  double sigma = kPaperSigma;
  double eta = 1.0;
  double epsilon = 0.1;
  std::string scheme;
  std::string theta;

  void add(CLI::App* app) {
    app->add_option("--method", method, "gspsa | gsf | grdsa | bgspsa | fdsa")
        ->check(CLI::IsMember({"gspsa", "gsf", "grdsa", "bgspsa", "fdsa"}));
    app->add_option("--k", k, "order: k1 (one-sided methods) or k2 (bgspsa)");
    app->add_option("--objective", objective, "quadratic | rastrigin")
        ->check(CLI::IsMember({"quadratic", "rastrigin"}));
    app->add_option("--dim", dim, "dimension");
    app->add_option("--sigma", sigma, "noise level");
    app->add_option("--eta", eta, "half-width of the uniform (grdsa) perturbation");
    app->add_option("--epsilon", epsilon, "skew used with --scheme asym-bernoulli");
    app->add_option("--scheme", scheme,
                    "override the perturbation: bernoulli | gaussian | sphere | uniform:eta | "
                    "asym-bernoulli:eps");
    app->add_option("--theta", theta, "comma-separated point (default: objective's start point)");
  }

  std::optional<PerturbationScheme> scheme_override() const {
    if (scheme.empty()) return std::nullopt;
    if (scheme == "asym-bernoulli") return AsymmetricBernoulli{epsilon};
    if (scheme == "uniform") return IntervalUniform{eta};
    return parse_scheme(scheme);
  }

  EstimatorConfig estimator(double delta) const {
    auto c = make_estimator(method, k, eta);
    if (auto s = scheme_override(); s && method != "fdsa") c.scheme = *s;
    c.delta = delta;
    validate(c);
    return c;
  }

  Vector point(const NoisyObjective& obj) const {
    if (theta.empty()) return default_initial_point(objective, dim);
    if (theta == "optimum") return *obj.optimum();
    auto v = parse_list(theta);
    if (v.size() != dim) throw ConfigError("--theta must have --dim entries");
    return v;
  }
};

struct ScheduleFlags {
  std::optional<double> a0, A, gamma_a, delta0, gamma_d;
  std::optional<std::size_t> m;
  double L = 1.0;

  void add(CLI::App* app) {
    app->add_option("--a0", a0, "step-size numerator");
    app->add_option("--A", A, "step-size offset");
    app->add_option("--gamma-a", gamma_a, "step-size exponent");
    app->add_option("--delta0", delta0, "perturbation-width numerator");
    app->add_option("--gamma-d", gamma_d, "perturbation-width exponent");
    app->add_option("--m", m, "constant-schedule mode: number of iterations m");
    app->add_option("--L", L, "constant-schedule mode: smoothness constant");
  }

  bool any_decaying() const { return a0 || A || gamma_a || delta0 || gamma_d; }

  std::optional<Schedule> resolve(const std::string& objective, const std::string& method,
                                  int k) const {
    if (m) {
      if (any_decaying()) throw ConfigError("--m cannot be combined with decaying-schedule flags");
      return theorem2_params(*m, L, k);
    }
    if (!any_decaying()) return std::nullopt;
    DecayingSchedule s = default_schedule(objective, method);
    if (a0) s.a0 = *a0;
    if (A) s.A = *A;
    if (gamma_a) s.gamma_a = *gamma_a;
    if (delta0) s.delta0 = *delta0;
    if (gamma_d) s.gamma_d = *gamma_d;
    return s;
  }
};

json vec(const Vector& v) { return json(v); }

json sweep_summary(const SweepReport& r) { return json::parse(to_json(r)); }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized simultaneous-perturbation gradient estimators and SGD"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 1;
  std::size_t jobs = 0;

  // identities
  auto* identities = app.add_subcommand("identities", "check coefficient identities exactly");
  int kmax = 8;
  identities->add_option("--kmax", kmax, "largest order to check")->check(CLI::Range(1, 12));

  // coefficients
  auto* coefficients = app.add_subcommand("coefficients", "print coefficient tables as CSV");
  int kmax_onesided = kMaxOneSidedOrder;
  int kmax_balanced = kMaxBalancedOrder;
  coefficients->add_option("--kmax-onesided", kmax_onesided)->check(CLI::Range(1, kMaxOneSidedOrder));
  coefficients->add_option("--kmax-balanced", kmax_balanced)->check(CLI::Range(1, kMaxBalancedOrder));

  // estimate
  auto* estimate = app.add_subcommand("estimate", "one gradient estimate");
  ProblemFlags est_flags;
  est_flags.add(estimate);
  double est_delta = 0.1;
  estimate->add_option("--delta", est_delta, "perturbation width");

  // optimize
  auto* optimize = app.add_subcommand("optimize", "one SGD run");
  ProblemFlags opt_flags;
  opt_flags.add(optimize);
  ScheduleFlags opt_schedule;
  opt_schedule.add(optimize);
  std::optional<std::size_t> opt_budget;
  bool trace = false;
  double guard = 1e6;
  optimize->add_option("--budget", opt_budget, "measurement budget");
  optimize->add_flag("--trace", trace, "record the per-iteration trace");
  optimize->add_option("--guard", guard, "divergence guard on |theta|_inf");

  // experiment
  auto* experiment = app.add_subcommand("experiment", "seeded replications of one configuration");
  ProblemFlags exp_flags;
  exp_flags.add(experiment);
  ScheduleFlags exp_schedule;
  exp_schedule.add(experiment);
  std::size_t exp_budget = kPaperBudget;
  std::size_t exp_reps = kPaperReplications;
  experiment->add_option("--budget", exp_budget, "measurement budget per replication");
  experiment->add_option("--reps", exp_reps, "replications")->check(CLI::PositiveNumber);
  experiment->add_option("--guard", guard, "divergence guard on |theta|_inf");

  // table
  auto* table = app.add_subcommand("table", "reproduce one of the benchmark grids");
  std::string table_id = "gspsa-rastrigin";
  double scale = 1.0;
  std::size_t table_reps = kPaperReplications;
  double table_sigma = kPaperSigma;
  std::string table_dims;
  table->add_option("--id", table_id, "gspsa-rastrigin | gspsa-quadratic | grdsa | gsf | bgspsa")
      ->check(CLI::IsMember(table_ids()));
  table->add_option("--scale", scale, "budget multiplier in (0, 1]");
  table->add_option("--reps", table_reps, "replications per cell")->check(CLI::PositiveNumber);
  table->add_option("--guard", guard, "divergence guard on |theta|_inf");
  table->add_option("--sigma", table_sigma, "noise level");
  table->add_option("--dims", table_dims, "comma-separated dimensions (default 5,10,50,100)");

  // bias-sweep
  auto* bias = app.add_subcommand("bias-sweep", "bias norm vs delta and its log-log slope");
  ProblemFlags bias_flags;
  bias_flags.method = "gspsa";
  bias_flags.objective = "quadratic";
  bias_flags.dim = 3;
  bias_flags.add(bias);
  std::string monomial;
  std::string bias_deltas = "0.2,0.1,0.05,0.025";
  std::size_t mc_samples = 1'000'000;
  bias->add_option("--monomial", monomial,
                   "use prod theta_i^e_i as test function, exponents comma-separated");
  bias->add_option("--deltas", bias_deltas, "strictly decreasing grid in (0, 1]");
  bias->add_option("--mc-samples", mc_samples, "Monte-Carlo draws for continuous schemes");

  // variance-sweep
  auto* variance = app.add_subcommand("variance-sweep", "estimator variance vs delta");
  ProblemFlags var_flags;
  var_flags.objective = "quadratic";
  var_flags.dim = 5;
  var_flags.sigma = 0.1;
  var_flags.theta = "optimum";
  var_flags.add(variance);
  std::string var_deltas = "0.1,0.05,0.025";
  std::size_t var_samples = 100'000;
  variance->add_option("--deltas", var_deltas, "strictly decreasing grid in (0, 1]");
  variance->add_option("--samples", var_samples, "estimates per delta");

  for (auto* sub : {identities, coefficients, estimate, optimize, experiment, table, bias, variance}) {
    sub->add_option("--seed", seed, "base seed");
    sub->add_option("--jobs", jobs, "worker threads (0 = all cores)");
    sub->add_option("--out", out_path, "output file (CSV)");
    sub->add_option("--config", config_path, "flat key=value file mirroring the flags");
  }

  // Splice config-file flags in front of the explicit ones.
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    for (std::size_t i = 0; i < args.size(); ++i) {
      std::string path;
      if (args[i] == "--config" && i + 1 < args.size()) {
        path = args[i + 1];
      } else if (args[i].rfind("--config=", 0) == 0) {
        path = args[i].substr(9);
      }
      if (!path.empty() && !args.empty()) {
        auto tokens = config_tokens(path);
        args.insert(args.begin() + 1, tokens.begin(), tokens.end());
        break;
      }
    }
  } catch (const std::exception& e) {
    return fail("config", e.what(), 2);
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());

  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    if (*identities) {
      const auto report = identity_check(kmax);
      json failures = json::array();
      for (const auto& e : report.entries) {
        if (!e.holds) failures.push_back({{"name", e.name}, {"k", e.k}, {"q", e.q}});
      }
      json j{{"schema", 1},
             {"kmax", kmax},
             {"checked", report.entries.size()},
             {"all_hold", report.all_hold()},
             {"failures", failures}};
      std::cout << j.dump() << std::endl;
      return report.all_hold() ? 0 : 1;
    }

    if (*coefficients) {
      std::ostringstream os;
      write_coefficients_csv(os, kmax_onesided, kmax_balanced);
      if (out_path.empty()) {
        std::cout << os.str();
      } else {
        write_text(out_path, os.str());
      }
      return 0;
    }

    if (*estimate) {
      const auto obj = make_objective(est_flags.objective, est_flags.dim, est_flags.sigma);
      const auto config = est_flags.estimator(est_delta);
      const auto theta = est_flags.point(obj);
      RngStream rng(seed);
      const auto g = estimate_gradient(obj, theta, config, rng);
      json j{{"schema", 1},
             {"method", est_flags.method},
             {"estimator", to_string(config.side)},
             {"scheme", std::holds_alternative<Fdsa>(config.side) ? "none" : to_string(config.scheme)},
             {"delta", est_delta},
             {"seed", seed},
             {"theta", vec(theta)},
             {"g", vec(g.g)},
             {"measurements", g.measurements}};
      std::cout << j.dump() << std::endl;
      return 0;
    }

    if (*optimize) {
      const auto obj = make_objective(opt_flags.objective, opt_flags.dim, opt_flags.sigma);
      const auto config = opt_flags.estimator(1.0);
      const auto theta0 = opt_flags.point(obj);
      const Schedule schedule =
          opt_schedule.resolve(opt_flags.objective, opt_flags.method, opt_flags.k)
              .value_or(default_schedule(opt_flags.objective, opt_flags.method));
      const std::size_t per_iter = measurements_per_estimate(config.side, obj.dim());
      std::size_t budget = opt_budget.value_or(kPaperBudget);
      if (!opt_budget && opt_schedule.m) budget = *opt_schedule.m * per_iter;

      RunOptions options;
      options.record_trace = trace;
      options.divergence_guard = guard;
      RunResult run;
      try {
        run = run_sgd(obj, config, schedule, theta0, budget, seed, options);
      } catch (const DivergenceError& e) {
        json j{{"schema", 1},
               {"error",
                {{"type", "divergence"},
                 {"message", e.what()},
                 {"iteration", e.iteration()},
                 {"last_finite_theta", vec(e.last_finite_theta())}}}};
        std::cout << j.dump() << std::endl;
        return 3;
      }

      json j{{"schema", 1},
             {"method", opt_flags.method},
             {"k", opt_flags.method == "fdsa" ? 0 : opt_flags.k},
             {"objective", opt_flags.objective},
             {"dim", opt_flags.dim},
             {"sigma", opt_flags.sigma},
             {"schedule", to_string(schedule)},
             {"budget", budget},
             {"seed", seed},
             {"iterations", run.iterations},
             {"measurements_used", run.measurements_used},
             {"final_theta", vec(run.final_theta)}};
      j["parameter_error"] = run.parameter_error ? json(*run.parameter_error) : json(nullptr);
      if (trace) {
        std::ostringstream os;
        os.precision(17);
        os << "n,a,delta,grad_norm,theta\n";
        for (const auto& t : run.trace) {
          os << t.n << ',' << t.a << ',' << t.delta << ',' << t.grad_norm << ",\"";
          for (std::size_t i = 0; i < t.theta.size(); ++i) os << (i ? ";" : "") << t.theta[i];
          os << "\"\n";
        }
        if (out_path.empty()) {
          j["trace_csv"] = os.str();
        } else {
          write_text(out_path, os.str());
        }
      }
      std::cout << j.dump() << std::endl;
      return 0;
    }

    if (*experiment) {
      ExperimentConfig c;
      c.objective = exp_flags.objective;
      c.dim = exp_flags.dim;
      c.sigma = exp_flags.sigma;
      c.method = exp_flags.method;
      c.k = exp_flags.k;
      c.eta = exp_flags.eta;
      c.scheme = exp_flags.scheme_override();
      c.schedule = exp_schedule.resolve(c.objective, c.method, c.k);
      c.budget = exp_budget;
      c.replications = exp_reps;
      c.divergence_guard = guard;
      c.base_seed = seed;
      c.jobs = jobs;
      if (!exp_flags.theta.empty()) {
        c.theta0 = exp_flags.point(make_objective(c.objective, c.dim, c.sigma));
      }
      const auto result = run_experiment(c);
      if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw ConfigError("cannot write '" + out_path + "'");
        out << kExperimentCsvHeader << '\n';
        write_experiment_csv(out, result);
      }
      std::cout << experiment_json(result) << std::endl;
      return 0;
    }

    if (*table) {
      TableOptions options;
      options.scale = scale;
      options.replications = table_reps;
      options.divergence_guard = guard;
      options.base_seed = seed;
      options.sigma = table_sigma;
      options.jobs = jobs;
      for (double d : parse_list(table_dims)) {
        if (d < 1 || d != static_cast<double>(static_cast<std::size_t>(d))) {
          throw ConfigError("--dims entries must be positive integers");
        }
        options.dims.push_back(static_cast<std::size_t>(d));
      }
      const auto result = run_table(table_id, options);
      std::cout << format_table(result);
      if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw ConfigError("cannot write '" + out_path + "'");
        write_table_csv(out, result);
      }
      return 0;
    }

    if (*bias) {
      std::optional<NoisyObjective> obj;
      if (!monomial.empty()) {
        std::vector<int> exps;
        for (double e : parse_list(monomial)) exps.push_back(static_cast<int>(e));
        obj = make_monomial(exps);
        bias_flags.dim = exps.size();
      } else {
        obj = make_objective(bias_flags.objective, bias_flags.dim, 0.0);
      }
      Vector theta = bias_flags.theta.empty() ? Vector(obj->dim(), 1.0)
                                              : parse_list(bias_flags.theta);
      if (theta.size() != obj->dim()) throw ConfigError("--theta must match the dimension");
      const auto config = bias_flags.estimator(1.0);
      const auto deltas = parse_list(bias_deltas);
      const auto report = bias_order_sweep(*obj, theta, config, deltas, mc_samples, seed);
      if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw ConfigError("cannot write '" + out_path + "'");
        write_csv(out, report);
      }
      auto j = sweep_summary(report);
      j["test_function"] = obj->name();
      j["estimator"] = to_string(config.side);
      j["scheme"] = to_string(config.scheme);
      std::cout << j.dump() << std::endl;
      return 0;
    }

    if (*variance) {
      const auto obj = make_objective(var_flags.objective, var_flags.dim, var_flags.sigma);
      const auto config = var_flags.estimator(1.0);
      const auto theta = var_flags.point(obj);
      const auto deltas = parse_list(var_deltas);
      const auto report = variance_scaling_sweep(obj, theta, config, deltas, var_samples, seed);
      if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw ConfigError("cannot write '" + out_path + "'");
        write_csv(out, report);
      }
      auto j = sweep_summary(report);
      j["estimator"] = to_string(config.side);
      j["scheme"] = std::holds_alternative<Fdsa>(config.side) ? "none" : to_string(config.scheme);
      std::cout << j.dump() << std::endl;
      return 0;
    }
  } catch (const ConfigError& e) {
    return fail("config", e.what(), 2);
  } catch (const NumericalError& e) {
    return fail("numerical", e.what());
  } catch (const std::exception& e) {
    return fail("runtime", e.what());
  }
  return fail("usage", "no subcommand given", 2);
}
