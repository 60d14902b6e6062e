#include "gspgs/experiment.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "gspgs/errors.hpp"
#include "gspgs/objectives.hpp"
#include "gspgs/parallel.hpp"

namespace gspgs {

bool is_known_method(std::string_view method) {
  return method == "gspsa" || method == "gsf" || method == "grdsa" || method == "bgspsa" ||
         method == "fdsa";
}

EstimatorConfig make_estimator(std::string_view method, int k, double eta) {
  EstimatorConfig c;
  if (method == "gspsa") {
    c.side = OneSided{k};
    c.scheme = SymmetricBernoulli{};
  } else if (method == "gsf") {
    c.side = OneSided{k};
    c.scheme = Gaussian{};
  } else if (method == "grdsa") {
    c.side = OneSided{k};
    c.scheme = IntervalUniform{eta};
  } else if (method == "bgspsa") {
    c.side = Balanced{k};
    c.scheme = SymmetricBernoulli{};
  } else if (method == "fdsa") {
    c.side = Fdsa{};
  } else {
    throw ConfigError("unknown method '" + std::string(method) + "'");
  }
  validate(c);
  return c;
}

DecayingSchedule default_schedule(std::string_view objective, std::string_view method) {
  // {a0, A, gamma_a, delta0, gamma_d}
  if (objective == "quadratic") {
    if (method == "gspsa" || method == "fdsa") return {1.0, 50.0, 1.0, 7.9, 0.101};
    if (method == "grdsa") return {1.0, 65.0, 1.0, 26.8, 0.101};
    if (method == "gsf") return {1.0, 50.0, 1.0, 5.9, 0.101};
    if (method == "bgspsa") return {1.0, 65.0, 1.0, 26.8, 0.101};
  } else if (objective == "rastrigin") {
    if (method == "gspsa" || method == "fdsa") return {3.0, 50.0, 1.0, 2.9, 0.101};
    if (method == "grdsa") return {1.0, 50.0, 1.0, 26.4, 0.101};
    if (method == "gsf") return {1.0, 50.0, 1.0, 26.8, 0.101};
    if (method == "bgspsa") return {2.0, 20.0, 1.0, 2.9, 0.101};
  } else {
    throw ConfigError("unknown objective '" + std::string(objective) + "'");
  }
  throw ConfigError("unknown method '" + std::string(method) + "'");
}

void validate(const ExperimentConfig& config) {
  if (config.objective != "quadratic" && config.objective != "rastrigin") {
    throw ConfigError("unknown objective '" + config.objective + "'");
  }
  if (!is_known_method(config.method)) throw ConfigError("unknown method '" + config.method + "'");
  if (config.dim == 0) throw ConfigError("dim must be >= 1");
  if (!(config.sigma >= 0.0)) throw ConfigError("sigma must be >= 0");
  if (config.replications < 1) throw ConfigError("replications must be >= 1");
  if (!(config.divergence_guard > 0.0)) throw ConfigError("divergence guard must be > 0");
  if (config.theta0 && config.theta0->size() != config.dim) {
    throw ConfigError("theta0 has the wrong dimension");
  }
  auto est = make_estimator(config.method, config.k, config.eta);
  if (config.scheme) {
    est.scheme = *config.scheme;
    validate(est);
  }
  const std::size_t per_iter = measurements_per_estimate(est.side, config.dim);
  if (config.budget < per_iter) {
    throw ConfigError("budget " + std::to_string(config.budget) +
                      " is below the measurements per iteration (" + std::to_string(per_iter) +
                      ")");
  }
  validate(resolved_schedule(config));
}

EstimatorConfig resolved_estimator(const ExperimentConfig& config) {
  auto est = make_estimator(config.method, config.k, config.eta);
  if (config.scheme && !std::holds_alternative<Fdsa>(est.side)) est.scheme = *config.scheme;
  return est;
}

Schedule resolved_schedule(const ExperimentConfig& config) {
  if (config.schedule) return *config.schedule;
  return default_schedule(config.objective, config.method);
}

void summarise(AggregateResult& result) {
  double sum = 0.0;
  std::size_t n = 0;
  result.excluded = 0;
  for (const auto& r : result.replications) {
    if (r.failed) {
      ++result.excluded;
    } else {
      sum += r.error;
      ++n;
    }
  }
  if (n == 0) {
    result.mean = std::numeric_limits<double>::quiet_NaN();
    result.standard_error = std::numeric_limits<double>::quiet_NaN();
    return;
  }
  result.mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (const auto& r : result.replications) {
    if (!r.failed) ss += (r.error - result.mean) * (r.error - result.mean);
  }
  result.standard_error =
      n > 1 ? std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
}

namespace {

ReplicationResult run_replication(const ExperimentConfig& config, const NoisyObjective& objective,
                                  const EstimatorConfig& estimator, const Schedule& schedule,
                                  const Vector& theta0, std::size_t rep) {
  ReplicationResult r;
  r.replication = rep;
  r.seed = config.base_seed + rep;
  RunOptions options;
  options.divergence_guard = config.divergence_guard;
  try {
    const auto run = run_sgd(objective, estimator, schedule, theta0, config.budget, r.seed, options);
    r.iterations = run.iterations;
    r.measurements = run.measurements_used;
    r.error = run.parameter_error.value_or(std::numeric_limits<double>::quiet_NaN());
  } catch (const DivergenceError& e) {
    r.failed = true;
    r.failure = e.what();
    r.iterations = e.iteration();
    r.error = std::numeric_limits<double>::quiet_NaN();
  } catch (const NumericalError& e) {
    r.failed = true;
    r.failure = e.what();
    r.error = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

struct PreparedExperiment {
  NoisyObjective objective;
  EstimatorConfig estimator;
  Schedule schedule;
  Vector theta0;
};

PreparedExperiment prepare(const ExperimentConfig& config) {
  validate(config);
  return PreparedExperiment{
      make_objective(config.objective, config.dim, config.sigma),
      resolved_estimator(config),
      resolved_schedule(config),
      config.theta0 ? *config.theta0 : default_initial_point(config.objective, config.dim)};
}

}  // namespace

AggregateResult run_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const auto prepared = prepare(config);

  AggregateResult result;
  result.config = config;
  result.replications.resize(config.replications);
  parallel_for(config.replications, config.jobs, [&](std::size_t rep) {
    result.replications[rep] = run_replication(config, prepared.objective, prepared.estimator,
                                               prepared.schedule, prepared.theta0, rep);
  });
  summarise(result);
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

void write_experiment_csv(std::ostream& os, const AggregateResult& result) {
  const auto& c = result.config;
  const std::string schedule = to_string(resolved_schedule(c));
  const int k = c.method == "fdsa" ? 0 : c.k;
  const auto est = resolved_estimator(c);
  const std::string scheme = c.method == "fdsa" ? "none" : to_string(est.scheme);
  const auto old = os.precision(std::numeric_limits<double>::max_digits10);
  for (const auto& r : result.replications) {
    os << c.method << ',' << k << ',' << scheme << ',' << c.objective << ',' << c.dim << ',' << c.sigma << ",\""
       << schedule << "\"," << c.budget << ',' << r.replication << ',' << r.seed << ',';
    if (r.failed) {
      os << "nan";
    } else {
      os << r.error;
    }
    os << ',' << r.iterations << ',' << r.measurements << ',' << (r.failed ? 1 : 0) << '\n';
  }
  os.precision(old);
}

namespace {

nlohmann::json number_or_null(double x) {
  return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

}  // namespace

std::string experiment_json(const AggregateResult& result) {
  const auto& c = result.config;
  nlohmann::json j;
  j["schema"] = 1;
  j["method"] = c.method;
  j["k"] = c.method == "fdsa" ? 0 : c.k;
  j["scheme"] = c.method == "fdsa" ? "none" : to_string(resolved_estimator(c).scheme);
  j["objective"] = c.objective;
  j["dim"] = c.dim;
  j["sigma"] = c.sigma;
  j["schedule"] = to_string(resolved_schedule(c));
  j["budget"] = c.budget;
  j["replications"] = c.replications;
  j["base_seed"] = c.base_seed;
  j["mean_error"] = number_or_null(result.mean);
  j["standard_error"] = number_or_null(result.standard_error);
  j["excluded"] = result.excluded;
  j["wall_seconds"] = result.wall_seconds;
  auto errors = nlohmann::json::array();
  for (const auto& r : result.replications) errors.push_back(number_or_null(r.error));
  j["errors"] = errors;
  return j.dump();
}

TableSpec table_spec(std::string_view id) {
  const std::vector<std::size_t> dims{5, 10, 50, 100};
  if (id == "gspsa-rastrigin") return {std::string(id), "gspsa", {"rastrigin"}, dims, {1, 2, 3, 4}};
  if (id == "gspsa-quadratic") return {std::string(id), "gspsa", {"quadratic"}, dims, {1, 2, 3, 4}};
  if (id == "grdsa") return {std::string(id), "grdsa", {"rastrigin", "quadratic"}, dims, {1, 4}};
  if (id == "gsf") return {std::string(id), "gsf", {"rastrigin", "quadratic"}, dims, {1, 4}};
  if (id == "bgspsa") return {std::string(id), "bgspsa", {"rastrigin", "quadratic"}, dims, {1, 2}};
  throw ConfigError("unknown table '" + std::string(id) + "'");
}

std::vector<std::string> table_ids() {
  return {"gspsa-rastrigin", "gspsa-quadratic", "grdsa", "gsf", "bgspsa"};
}

const TableCell& TableResult::cell(std::string_view objective, std::size_t dim, int k) const {
  for (const auto& c : cells) {
    if (c.objective == objective && c.dim == dim && c.k == k) return c;
  }
  throw ConfigError("no table cell for " + std::string(objective) + " d=" + std::to_string(dim) +
                    " k=" + std::to_string(k));
}

TableResult run_table(std::string_view id, const TableOptions& options) {
  if (!(options.scale > 0.0) || options.scale > 1.0) throw ConfigError("scale must lie in (0, 1]");
  TableResult table;
  table.spec = table_spec(id);
  if (!options.dims.empty()) table.spec.dims = options.dims;
  table.scale = options.scale;

  const auto scaled = static_cast<std::size_t>(
      std::llround(options.scale * static_cast<double>(kPaperBudget)));

  std::vector<PreparedExperiment> prepared;
  for (const auto& objective : table.spec.objectives) {
    for (std::size_t dim : table.spec.dims) {
      for (int k : table.spec.orders) {
        TableCell cell;
        cell.objective = objective;
        cell.dim = dim;
        cell.k = k;
        auto& c = cell.result.config;
        c.objective = objective;
        c.dim = dim;
        c.sigma = options.sigma;
        c.method = table.spec.method;
        c.k = k;
        c.replications = options.replications;
        c.base_seed = options.base_seed;
        c.jobs = options.jobs;
        c.divergence_guard = options.divergence_guard;
        const auto est = make_estimator(c.method, k);
        c.budget = std::max(scaled, measurements_per_estimate(est.side, dim));
        prepared.push_back(prepare(c));
        cell.result.replications.resize(c.replications);
        table.cells.push_back(std::move(cell));
      }
    }
  }

  // Flatten (cell, replication) so long and short cells share the workers.
  const std::size_t reps = options.replications;
  const auto start = std::chrono::steady_clock::now();
  parallel_for(table.cells.size() * reps, options.jobs, [&](std::size_t task) {
    const std::size_t ci = task / reps;
    const std::size_t rep = task % reps;
    auto& cell = table.cells[ci];
    const auto& p = prepared[ci];
    cell.result.replications[rep] =
        run_replication(cell.result.config, p.objective, p.estimator, p.schedule, p.theta0, rep);
  });
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (auto& cell : table.cells) {
    summarise(cell.result);
    cell.result.wall_seconds = wall;
  }
  return table;
}

std::string format_table(const TableResult& table) {
  const bool balanced = table.spec.method == "bgspsa";
  const std::string kname = balanced ? "k2" : "k1";
  std::ostringstream os;
  for (const auto& objective : table.spec.objectives) {
    os << table.spec.method << " on " << objective << " (sigma "
       << table.cells.front().result.config.sigma << ", budget "
       << table.cells.front().result.config.budget << ", "
       << table.cells.front().result.config.replications << " replications)\n";
    os << std::left << std::setw(8) << "d";
    for (int k : table.spec.orders) {
      os << std::setw(24) << (kname + "=" + std::to_string(k));
    }
    os << '\n';
    for (std::size_t dim : table.spec.dims) {
      os << std::left << std::setw(8) << dim;
      for (int k : table.spec.orders) {
        const auto& r = table.cell(objective, dim, k).result;
        std::ostringstream cell;
        cell << std::scientific << std::setprecision(2) << r.mean << " (" << r.standard_error
             << ")";
        if (r.excluded > 0) cell << '*' << r.excluded;
        os << std::setw(24) << cell.str();
      }
      os << '\n';
    }
    os << '\n';
  }
  return os.str();
}

void write_table_csv(std::ostream& os, const TableResult& table) {
  os << kExperimentCsvHeader << '\n';
  for (const auto& cell : table.cells) write_experiment_csv(os, cell.result);
}

}  // namespace gspgs
