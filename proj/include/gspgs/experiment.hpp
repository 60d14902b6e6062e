#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gspgs/estimators.hpp"
#include "gspgs/optimizer.hpp"

namespace gspgs {

inline constexpr std::size_t kPaperBudget = 200'000;
inline constexpr std::size_t kPaperReplications = 20;
inline constexpr double kPaperSigma = 0.001;

/// Method ids: gspsa (Bernoulli), gsf (Gaussian), grdsa (uniform[-eta, eta]),
/// bgspsa (balanced Bernoulli), fdsa (coordinate central differences).
bool is_known_method(std::string_view method);

/// Builds the estimator for a method id and order. k is k2 for bgspsa, k1 for
/// the other simultaneous-perturbation methods, ignored for fdsa.
EstimatorConfig make_estimator(std::string_view method, int k, double eta = 1.0);

/// Tuned step-size / width schedule for (objective, method). fdsa reuses the
/// gspsa constants.
DecayingSchedule default_schedule(std::string_view objective, std::string_view method);

struct ExperimentConfig {
  std::string objective = "rastrigin";
  std::size_t dim = 10;
  double sigma = kPaperSigma;
  std::string method = "gspsa";
  int k = 1;
  /// Unset: default_schedule(objective, method).
  std::optional<Schedule> schedule;
  /// Half-width for grdsa.
  double eta = 1.0;
  /// Replaces the method's perturbation scheme (ignored by fdsa).
  std::optional<PerturbationScheme> scheme;
  std::size_t budget = kPaperBudget;
  std::size_t replications = kPaperReplications;
  std::uint64_t base_seed = 1;
  /// Unset: default_initial_point(objective, dim).
  std::optional<Vector> theta0;
  double divergence_guard = 1e6;
  /// Worker threads for replications; 0 = hardware concurrency.
  std::size_t jobs = 0;
};

/// Throws ConfigError on an invalid combination.
void validate(const ExperimentConfig& config);
Schedule resolved_schedule(const ExperimentConfig& config);
EstimatorConfig resolved_estimator(const ExperimentConfig& config);

struct ReplicationResult {
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string failure;
  double error = 0.0;
  std::size_t iterations = 0;
  std::size_t measurements = 0;
};

struct AggregateResult {
  ExperimentConfig config;
  std::vector<ReplicationResult> replications;
  /// Arithmetic mean of the non-failed replications (NaN if all failed).
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t excluded = 0;
  double wall_seconds = 0.0;
};

/// Runs config.replications independent runs with seeds base_seed + r.
AggregateResult run_experiment(const ExperimentConfig& config);

/// Recompute mean / standard error / exclusion count from the stored replications.
void summarise(AggregateResult& result);

inline constexpr std::string_view kExperimentCsvHeader =
    "method,k,scheme,objective,dim,sigma,schedule,budget,rep,seed,error,iterations,measurements,failed";

/// One row per replication (no header), full provenance on every row.
void write_experiment_csv(std::ostream& os, const AggregateResult& result);
/// Schema-versioned JSON summary.
std::string experiment_json(const AggregateResult& result);

// Paper-style grids.

struct TableSpec {
  std::string id;
  std::string method;
  std::vector<std::string> objectives;
  std::vector<std::size_t> dims;
  std::vector<int> orders;
};

/// gspsa-rastrigin, gspsa-quadratic, grdsa, gsf, bgspsa.
TableSpec table_spec(std::string_view id);
std::vector<std::string> table_ids();

struct TableCell {
  std::string objective;
  std::size_t dim = 0;
  int k = 0;
  AggregateResult result;
};

struct TableResult {
  TableSpec spec;
  double scale = 1.0;
  std::vector<TableCell> cells;

  const TableCell& cell(std::string_view objective, std::size_t dim, int k) const;
};

struct TableOptions {
  double scale = 1.0;
  std::size_t replications = kPaperReplications;
  std::uint64_t base_seed = 1;
  double sigma = kPaperSigma;
  double divergence_guard = 1e6;
  std::size_t jobs = 0;
  /// Overrides the spec's dims when non-empty.
  std::vector<std::size_t> dims;
};

/// Runs the whole grid with budget = scale * 2e5 (at least one estimate).
TableResult run_table(std::string_view id, const TableOptions& options = {});

/// Aligned text table: one block per objective, rows = dims, columns = orders,
/// cells "mean (stderr)".
std::string format_table(const TableResult& table);
void write_table_csv(std::ostream& os, const TableResult& table);

}  // namespace gspgs
