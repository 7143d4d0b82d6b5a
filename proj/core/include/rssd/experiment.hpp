#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rssd/problems.hpp"
#include "rssd/solver.hpp"

namespace rssd {

enum class ProblemKind { kFsv, kOdl };

std::string_view ToString(ProblemKind kind);

struct ExperimentConfig {
  ProblemKind kind = ProblemKind::kFsv;
  // FSV: (n, m) pairs. ODL: (n, m) with m <= 0 meaning floor(10 n^1.5).
  std::vector<std::pair<int, int>> sizes;
  // Exponents; p = 1 is the l1 model.
  std::vector<double> ps = {1.0};
  std::vector<double> taus = {1e-8};
  int trials = 50;
  std::uint64_t seed = 1;
  SolverConfig solver;
  // More than one pair runs the schedule grid and keeps the best run.
  std::vector<SchedulePair> grid;
  InitDistribution init = InitDistribution::kGaussian;
  double bernoulli = 0.5;
  std::optional<int> budget_iters;
  std::optional<double> budget_seconds;
  int jobs = 1;
  bool keep_points = false;
  // ODL only: record (elapsed, sparsity) every this many iterations; 0 disables.
  int trajectory_every = 0;
  // Run the solver constants on f~ / (lambda p): alpha_bar is divided and
  // delta0 multiplied by lambda p. The ODL objective carries lambda p = p/m,
  // which otherwise leaves steps and gradient tolerances far off scale.
  bool scale_steps = false;

  /// Throws kConfig on any invalid field.
  void Validate() const;
  /// Solver settings after budgets are applied.
  SolverConfig EffectiveSolver() const;
  /// EffectiveSolver() with step scaling applied for one (m, p) cell.
  SolverConfig TrialSolver(int m, double p) const;
  /// Schedule label written to reports: "0.5/0.5" or "grid".
  std::string ScheduleLabel() const;
};

struct TrajectorySample {
  double seconds;
  int iteration;
  std::vector<double> sparsity;  // one entry per tau
};

struct ScheduleRun {
  SchedulePair schedule;
  std::string status;
  int iterations = 0;
  double seconds = 0.0;
  double f = 0.0;
  double metric = 0.0;
};

struct TrialRecord {
  int cell = 0;  // index into sizes
  int n = 0;
  int m = 0;
  double p = 1.0;
  std::string schedule;
  int trial = 0;
  std::uint64_t instance_seed = 0;
  std::uint64_t init_seed = 0;

  std::string status;  // a SolveStatus name, or "Error: <message>"
  int iterations = 0;
  int shrinks = 0;
  double seconds = 0.0;
  double final_f = 0.0;
  double final_f_smoothed = 0.0;
  double grad_norm = 0.0;
  double mu = 0.0;
  double delta = 0.0;

  // Per tau, aligned with ExperimentConfig::taus.
  std::vector<long> support;     // FSV: truncated ||Q x||_0; ODL: truncated nnz of Y^T X
  std::vector<double> metric;    // FSV: 1 for success, 0 otherwise; ODL: sparsity level
  std::vector<double> truth;     // ODL: sparsity level of S*^T

  std::vector<ScheduleRun> schedule_runs;  // grid runs only
  std::vector<TrajectorySample> trajectory;
  std::vector<double> final_point;  // column-major, when keep_points is set

  bool failed() const { return status.rfind("Error", 0) == 0; }
};

struct CellSummary {
  int n = 0;
  int m = 0;
  double p = 1.0;
  double tau = 0.0;
  std::string schedule;
  int trials = 0;
  // FSV: number of successes; ODL: mean sparsity level.
  double value = 0.0;
  double mean_truth = 0.0;  // ODL only
  double mean_iters = 0.0;
  double median_iters = 0.0;
  double mean_seconds = 0.0;
  double median_seconds = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<TrialRecord> trials;  // ordered by (cell, p, trial)
  std::vector<CellSummary> cells;   // ordered by (cell, p, tau)
  std::string version;
};

/// Seeds for trial `trial` of size cell `cell`; independent of p, so every
/// model in a cell sees the same instances and initial points.
std::uint64_t InstanceSeed(std::uint64_t base, int cell, int trial);
std::uint64_t InitSeed(std::uint64_t base, int cell, int trial);

/// Runs a single trial. Solver failures become an "Error: ..." status.
TrialRecord RunTrial(const ExperimentConfig& config, int cell, double p, int trial);

/// Every (cell, p, trial), spread over config.jobs threads. The output is
/// identical for any number of jobs apart from timing fields.
ExperimentReport RunExperiment(const ExperimentConfig& config);

/// Deterministic fold over trials in index order.
std::vector<CellSummary> Aggregate(const ExperimentConfig& config,
                                   const std::vector<TrialRecord>& trials);

inline constexpr const char* kSummaryCsvHeader =
    "n,m,p,tau,schedule,trials,successes_or_mean_sparsity,mean_iters,mean_seconds";

void WriteSummaryCsv(std::ostream& out, const ExperimentReport& report);
/// Columns elapsed_s,sparsity for the tau at `tau_index`.
void WriteTrajectoryCsv(std::ostream& out, const TrialRecord& trial, std::size_t tau_index);

nlohmann::json ConfigToJson(const ExperimentConfig& config);
/// Full report. Without timing the output depends only on the config.
nlohmann::json ReportToJson(const ExperimentReport& report, bool include_timing = true);

struct EmittedFiles {
  std::filesystem::path summary_csv;
  std::filesystem::path report_json;
  std::vector<std::filesystem::path> trajectories;
};

/// Writes <kind>_summary.csv, <kind>_report.json and, for ODL runs with
/// trajectories, trajectories/<kind>_n<n>_m<m>_p<p>_tau<tau>_trial<k>.csv
/// under `dir`.
/// Throws kIo on failure.
EmittedFiles EmitReport(const ExperimentReport& report, const std::filesystem::path& dir);

}  // namespace rssd
