#include "rssd/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <thread>

#include "rssd/version.hpp"

namespace rssd {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string Fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

double Median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

template <class P>
std::vector<double> ColumnMajor(const P& point) {
  const auto& a = point.ambient();
  return std::vector<double>(a.data(), a.data() + a.size());
}

// A run stopped by a step error still reports its last iterate.
template <class M, class F>
SolveResult<M> RunKeepingPartial(F&& run) {
  try {
    return run();
  } catch (const SolveAborted<M>& e) {
    return e.partial();
  }
}

template <class M>
void FillFromResult(TrialRecord& rec, const SolveResult<M>& r) {
  rec.status = r.status == SolveStatus::kAborted ? "Error: " + r.error
                                                 : std::string(ToString(r.status));
  rec.iterations = r.iterations;
  rec.shrinks = r.shrinks;
  rec.final_f = r.f;
  rec.final_f_smoothed = r.f_smoothed;
  rec.grad_norm = r.grad_norm;
  rec.mu = r.mu;
  rec.delta = r.delta;
}

template <class M>
void FillScheduleRuns(TrialRecord& rec, const GridResult<M>& g) {
  for (std::size_t i = 0; i < g.runs.size(); ++i) {
    const auto& r = g.runs[i];
    rec.schedule_runs.push_back(
        {g.schedules[i], std::string(ToString(r.status)), r.iterations, r.seconds, r.f, g.metrics[i]});
  }
}

std::pair<int, int> CellSize(const ExperimentConfig& config, int cell) {
  auto [n, m] = config.sizes.at(static_cast<std::size_t>(cell));
  if (config.kind == ProblemKind::kOdl && m <= 0) m = OdlSampleCount(n);
  return {n, m};
}

void RunFsv(const ExperimentConfig& config, const SolverConfig& solver, double p, double min_tau,
            TrialRecord& rec) {
  const FsvInstance inst = GenerateFsv(rec.n, rec.m, rec.instance_seed);
  const auto obj = MakeFsvObjective(inst, p);
  Rng rng = MakeRng(rec.init_seed);
  const SpherePoint x0 = Sphere::Random(rec.n, rng, config.init);

  std::optional<SolveResult<Sphere>> result;
  if (config.grid.size() > 1) {
    const SelectionMetric<Sphere> metric = [&](const SolveResult<Sphere>& r) {
      return static_cast<double>(FsvSupport(inst, r.x, min_tau));
    };
    GridResult<Sphere> g = RssdGrid(obj, x0, solver, config.grid, metric);
    FillScheduleRuns(rec, g);
    result = std::move(g.runs[g.best]);
  } else {
    result = RunKeepingPartial<Sphere>([&] { return RssdRun(obj, x0, solver); });
  }
  FillFromResult(rec, *result);
  for (std::size_t k = 0; k < config.taus.size(); ++k) {
    rec.support[k] = FsvSupport(inst, result->x, config.taus[k]);
    rec.metric[k] = rec.support[k] == inst.n ? 1.0 : 0.0;
  }
  if (config.keep_points) rec.final_point = ColumnMajor(result->x);
}

void RunOdl(const ExperimentConfig& config, const SolverConfig& solver, double p, double min_tau,
            TrialRecord& rec) {
  const OdlInstance inst = GenerateOdl(rec.n, rec.instance_seed, config.bernoulli, rec.m);
  for (std::size_t k = 0; k < config.taus.size(); ++k)
    rec.truth[k] = GroundTruthSparsity(inst, config.taus[k]);
  const auto obj = MakeOdlObjective(inst, p);
  Rng rng = MakeRng(rec.init_seed);
  const StiefelPoint x0 = Stiefel::Random(rec.n, rng, config.init);

  auto sample = [&](const StiefelPoint& x, double seconds, int iter) {
    TrajectorySample s{seconds, iter, {}};
    for (double tau : config.taus) s.sparsity.push_back(SparsityLevel(inst, x, tau));
    rec.trajectory.push_back(std::move(s));
  };

  std::optional<SolveResult<Stiefel>> result;
  if (config.grid.size() > 1) {
    const SelectionMetric<Stiefel> metric = [&](const SolveResult<Stiefel>& r) {
      return -SparsityLevel(inst, r.x, min_tau);
    };
    GridResult<Stiefel> g = RssdGrid(obj, x0, solver, config.grid, metric);
    FillScheduleRuns(rec, g);
    result = std::move(g.runs[g.best]);
  } else if (config.trajectory_every > 0) {
    const auto start = Clock::now();
    sample(x0, 0.0, 0);
    const Observer<Stiefel> observer = [&](const SolverState<Stiefel>& state) {
      if (state.iter % config.trajectory_every == 0) sample(state.x, Seconds(start), state.iter);
    };
    result = RunKeepingPartial<Stiefel>([&] { return RssdRun(obj, x0, solver, observer); });
    if (rec.trajectory.back().iteration != result->iterations)
      sample(result->x, Seconds(start), result->iterations);
  } else {
    result = RunKeepingPartial<Stiefel>([&] { return RssdRun(obj, x0, solver); });
  }
  FillFromResult(rec, *result);
  for (std::size_t k = 0; k < config.taus.size(); ++k) {
    const Eigen::MatrixXd z = inst.y.transpose() * result->x.ambient();
    rec.support[k] = TruncatedNnz(z, config.taus[k]);
    rec.metric[k] = SparsityLevel(inst, result->x, config.taus[k]);
  }
  if (config.keep_points) rec.final_point = ColumnMajor(result->x);
}

}  // namespace

std::string_view ToString(ProblemKind kind) { return kind == ProblemKind::kFsv ? "fsv" : "odl"; }

void ExperimentConfig::Validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kConfig, what); };
  if (sizes.empty()) fail("no problem sizes given");
  for (auto [n, m] : sizes) {
    if (kind == ProblemKind::kFsv && !(n >= 2 && m > n))
      fail("FSV size needs m > n >= 2 (n=" + std::to_string(n) + ", m=" + std::to_string(m) + ")");
    if (kind == ProblemKind::kOdl && n < 2) fail("ODL size needs n >= 2");
  }
  if (ps.empty()) fail("no exponents given");
  for (double p : ps)
    if (!(p > 0.0 && p <= 1.0)) fail("p must lie in (0, 1], got " + Fmt("%g", p));
  if (taus.empty()) fail("no truncation tolerances given");
  for (double tau : taus)
    if (!(tau > 0.0)) fail("tau must be positive, got " + Fmt("%g", tau));
  if (trials < 1) fail("trials must be >= 1");
  if (jobs < 1) fail("jobs must be >= 1");
  if (budget_iters && *budget_iters < 1) fail("iteration budget must be >= 1");
  if (budget_seconds && !(*budget_seconds > 0.0)) fail("time budget must be positive");
  if (!(bernoulli > 0.0 && bernoulli <= 1.0)) fail("Bernoulli parameter must lie in (0, 1]");
  if (trajectory_every < 0) fail("trajectory interval must be >= 0");
  for (const SchedulePair& s : grid)
    if (!(s.theta_mu > 0.0 && s.theta_mu < 1.0 && s.theta_delta > 0.0 && s.theta_delta < 1.0))
      fail("schedule grid entries must lie in (0, 1)");
  try {
    EffectiveSolver().Validate();
  } catch (const Error& e) {
    fail(e.what());
  }
}

SolverConfig ExperimentConfig::EffectiveSolver() const {
  SolverConfig s = solver;
  if (budget_iters) s.max_iters = *budget_iters;
  if (budget_seconds) s.max_seconds = *budget_seconds;
  if (grid.size() == 1) {
    s.theta_mu = grid[0].theta_mu;
    s.theta_delta = grid[0].theta_delta;
  }
  return s;
}

SolverConfig ExperimentConfig::TrialSolver(int m, double p) const {
  SolverConfig s = EffectiveSolver();
  if (scale_steps) {
    const double scale = (kind == ProblemKind::kOdl ? 1.0 / m : 1.0) * p;
    s.alpha_bar /= scale;
    s.delta0 *= scale;
  }
  return s;
}

std::string ExperimentConfig::ScheduleLabel() const {
  if (grid.size() > 1) return "grid";
  const SolverConfig s = EffectiveSolver();
  return Fmt("%g", s.theta_mu) + "/" + Fmt("%g", s.theta_delta);
}

std::uint64_t InstanceSeed(std::uint64_t base, int cell, int trial) {
  return DeriveSeed(base, {static_cast<std::uint64_t>(cell), static_cast<std::uint64_t>(trial),
                           static_cast<std::uint64_t>(Stream::kInstance)});
}

std::uint64_t InitSeed(std::uint64_t base, int cell, int trial) {
  return DeriveSeed(base, {static_cast<std::uint64_t>(cell), static_cast<std::uint64_t>(trial),
                           static_cast<std::uint64_t>(Stream::kInitialPoint)});
}

TrialRecord RunTrial(const ExperimentConfig& config, int cell, double p, int trial) {
  TrialRecord rec;
  rec.cell = cell;
  std::tie(rec.n, rec.m) = CellSize(config, cell);
  rec.p = p;
  rec.schedule = config.ScheduleLabel();
  rec.trial = trial;
  rec.instance_seed = InstanceSeed(config.seed, cell, trial);
  rec.init_seed = InitSeed(config.seed, cell, trial);
  rec.support.assign(config.taus.size(), 0);
  rec.metric.assign(config.taus.size(), 0.0);
  if (config.kind == ProblemKind::kOdl) rec.truth.assign(config.taus.size(), 0.0);

  const SolverConfig solver = config.TrialSolver(rec.m, p);
  const double min_tau = *std::min_element(config.taus.begin(), config.taus.end());
  const auto start = Clock::now();
  try {
    if (config.kind == ProblemKind::kFsv)
      RunFsv(config, solver, p, min_tau, rec);
    else
      RunOdl(config, solver, p, min_tau, rec);
  } catch (const std::exception& e) {
    rec.status = std::string("Error: ") + e.what();
    std::fill(rec.support.begin(), rec.support.end(), 0);
    std::fill(rec.metric.begin(), rec.metric.end(), 0.0);
  }
  rec.seconds = Seconds(start);
  return rec;
}

ExperimentReport RunExperiment(const ExperimentConfig& config) {
  config.Validate();
  const int cells = static_cast<int>(config.sizes.size());
  const int models = static_cast<int>(config.ps.size());
  const std::size_t total = static_cast<std::size_t>(cells) * models * config.trials;

  ExperimentReport report;
  report.config = config;
  report.version = std::string(kVersion);
  report.trials.resize(total);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      const int trial = static_cast<int>(i % config.trials);
      const int model = static_cast<int>((i / config.trials) % models);
      const int cell = static_cast<int>(i / (static_cast<std::size_t>(config.trials) * models));
      report.trials[i] = RunTrial(config, cell, config.ps[model], trial);
    }
  };
  const int threads = std::min<int>(config.jobs, static_cast<int>(total));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  report.cells = Aggregate(config, report.trials);
  return report;
}

std::vector<CellSummary> Aggregate(const ExperimentConfig& config,
                                   const std::vector<TrialRecord>& trials) {
  std::vector<CellSummary> out;
  const std::string schedule = config.ScheduleLabel();
  for (int cell = 0; cell < static_cast<int>(config.sizes.size()); ++cell) {
    const auto [n, m] = CellSize(config, cell);
    for (double p : config.ps) {
      std::vector<const TrialRecord*> members;
      for (const TrialRecord& t : trials)
        if (t.cell == cell && t.p == p) members.push_back(&t);
      std::vector<double> iters, secs;
      for (const TrialRecord* t : members) {
        iters.push_back(t->iterations);
        secs.push_back(t->seconds);
      }
      for (std::size_t k = 0; k < config.taus.size(); ++k) {
        CellSummary s;
        s.n = n;
        s.m = m;
        s.p = p;
        s.tau = config.taus[k];
        s.schedule = schedule;
        s.trials = static_cast<int>(members.size());
        double value = 0.0, truth = 0.0;
        for (const TrialRecord* t : members) {
          value += t->metric[k];
          if (!t->truth.empty()) truth += t->truth[k];
        }
        if (config.kind == ProblemKind::kOdl && !members.empty()) {
          value /= static_cast<double>(members.size());
          truth /= static_cast<double>(members.size());
        }
        s.value = value;
        s.mean_truth = truth;
        if (!members.empty()) {
          double si = 0.0, ss = 0.0;
          for (double v : iters) si += v;
          for (double v : secs) ss += v;
          s.mean_iters = si / static_cast<double>(members.size());
          s.mean_seconds = ss / static_cast<double>(members.size());
        }
        s.median_iters = Median(iters);
        s.median_seconds = Median(secs);
        out.push_back(s);
      }
    }
  }
  return out;
}

void WriteSummaryCsv(std::ostream& out, const ExperimentReport& report) {
  out << kSummaryCsvHeader << '\n';
  const bool fsv = report.config.kind == ProblemKind::kFsv;
  for (const CellSummary& s : report.cells) {
    out << s.n << ',' << s.m << ',' << Fmt("%g", s.p) << ',' << Fmt("%g", s.tau) << ','
        << s.schedule << ',' << s.trials << ','
        << (fsv ? Fmt("%.0f", s.value) : Fmt("%.6f", s.value)) << ',' << Fmt("%.2f", s.mean_iters)
        << ',' << Fmt("%.6f", s.mean_seconds) << '\n';
  }
}

void WriteTrajectoryCsv(std::ostream& out, const TrialRecord& trial, std::size_t tau_index) {
  out << "elapsed_s,sparsity\n";
  for (const TrajectorySample& s : trial.trajectory)
    out << Fmt("%.6f", s.seconds) << ',' << Fmt("%.6f", s.sparsity.at(tau_index)) << '\n';
}

nlohmann::json ConfigToJson(const ExperimentConfig& config) {
  using nlohmann::json;
  const SolverConfig& s = config.solver;
  json solver = {{"mu0", s.mu0},
                 {"delta0", s.delta0},
                 {"theta_mu", s.theta_mu},
                 {"theta_delta", s.theta_delta},
                 {"beta", s.beta},
                 {"alpha_bar", s.alpha_bar},
                 {"sigma", s.sigma},
                 {"mu_opt", s.mu_opt},
                 {"delta_opt", s.delta_opt},
                 {"max_iters", s.max_iters},
                 {"max_backtracks", s.max_backtracks}};
  solver["mu_stop"] = s.mu_stop ? json(*s.mu_stop) : json(nullptr);
  solver["delta_stop"] = s.delta_stop ? json(*s.delta_stop) : json(nullptr);

  json sizes = json::array();
  for (auto [n, m] : config.sizes) sizes.push_back({n, m});
  json grid = json::array();
  for (const SchedulePair& g : config.grid) grid.push_back({g.theta_mu, g.theta_delta});

  return {{"kind", ToString(config.kind)},
          {"sizes", sizes},
          {"p", config.ps},
          {"tau", config.taus},
          {"trials", config.trials},
          {"seed", config.seed},
          {"solver", solver},
          {"grid", grid},
          {"init", config.init == InitDistribution::kGaussian ? "gaussian" : "uniform"},
          {"bernoulli", config.bernoulli},
          {"budget_iters", config.budget_iters ? json(*config.budget_iters) : json(nullptr)},
          {"budget_seconds", config.budget_seconds ? json(*config.budget_seconds) : json(nullptr)},
          {"keep_points", config.keep_points},
          {"trajectory_every", config.trajectory_every},
          {"scale_steps", config.scale_steps}};
}

nlohmann::json ReportToJson(const ExperimentReport& report, bool include_timing) {
  using nlohmann::json;
  json config = ConfigToJson(report.config);
  if (include_timing) config["jobs"] = report.config.jobs;

  json cells = json::array();
  for (const CellSummary& s : report.cells) {
    json c = {{"n", s.n},         {"m", s.m},
              {"p", s.p},         {"tau", s.tau},
              {"schedule", s.schedule}, {"trials", s.trials},
              {"mean_iters", s.mean_iters}, {"median_iters", s.median_iters}};
    if (report.config.kind == ProblemKind::kFsv) {
      c["successes"] = static_cast<int>(s.value);
    } else {
      c["mean_sparsity"] = s.value;
      c["mean_truth_sparsity"] = s.mean_truth;
    }
    if (include_timing) {
      c["mean_seconds"] = s.mean_seconds;
      c["median_seconds"] = s.median_seconds;
    }
    cells.push_back(std::move(c));
  }

  json trials = json::array();
  for (const TrialRecord& t : report.trials) {
    json j = {{"cell", t.cell},
              {"n", t.n},
              {"m", t.m},
              {"p", t.p},
              {"schedule", t.schedule},
              {"trial", t.trial},
              {"instance_seed", t.instance_seed},
              {"init_seed", t.init_seed},
              {"status", t.status},
              {"iterations", t.iterations},
              {"shrinks", t.shrinks},
              {"final_f", t.final_f},
              {"final_f_smoothed", t.final_f_smoothed},
              {"grad_norm", t.grad_norm},
              {"mu", t.mu},
              {"delta", t.delta},
              {"support", t.support}};
    if (report.config.kind == ProblemKind::kFsv) {
      std::vector<bool> success;
      for (double v : t.metric) success.push_back(v > 0.5);
      j["success"] = success;
    } else {
      j["sparsity"] = t.metric;
      j["truth_sparsity"] = t.truth;
    }
    if (include_timing) j["seconds"] = t.seconds;
    if (!t.schedule_runs.empty()) {
      json runs = json::array();
      for (const ScheduleRun& r : t.schedule_runs) {
        json rj = {{"theta_mu", r.schedule.theta_mu},
                   {"theta_delta", r.schedule.theta_delta},
                   {"status", r.status},
                   {"iterations", r.iterations},
                   {"final_f", r.f},
                   {"metric", r.metric}};
        if (include_timing) rj["seconds"] = r.seconds;
        runs.push_back(std::move(rj));
      }
      j["schedule_runs"] = std::move(runs);
    }
    if (!t.trajectory.empty()) {
      json traj = json::array();
      for (const TrajectorySample& s : t.trajectory) {
        json sj = {{"iteration", s.iteration}, {"sparsity", s.sparsity}};
        if (include_timing) sj["elapsed_s"] = s.seconds;
        traj.push_back(std::move(sj));
      }
      j["trajectory"] = std::move(traj);
    }
    if (!t.final_point.empty()) j["final_point"] = t.final_point;
    trials.push_back(std::move(j));
  }

  return {{"tool", "rssd"},
          {"version", report.version},
          {"config", config},
          {"cells", cells},
          {"trials", trials}};
}

EmittedFiles EmitReport(const ExperimentReport& report, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  auto open = [](const fs::path& path) {
    std::ofstream out(path);
    Require(static_cast<bool>(out), ErrorCode::kIo, "cannot open " + path.string());
    return out;
  };
  auto close = [](std::ofstream& out, const fs::path& path) {
    out.close();
    Require(!out.fail(), ErrorCode::kIo, "write failed: " + path.string());
  };

  EmittedFiles files;
  const std::string kind(ToString(report.config.kind));
  try {
    fs::create_directories(dir);
  } catch (const fs::filesystem_error& e) {
    throw Error(ErrorCode::kIo, e.what());
  }

  files.summary_csv = dir / (kind + "_summary.csv");
  {
    std::ofstream out = open(files.summary_csv);
    WriteSummaryCsv(out, report);
    close(out, files.summary_csv);
  }
  files.report_json = dir / (kind + "_report.json");
  {
    std::ofstream out = open(files.report_json);
    out << ReportToJson(report).dump(2) << '\n';
    close(out, files.report_json);
  }

  bool any_trajectory = false;
  for (const TrialRecord& t : report.trials) any_trajectory |= !t.trajectory.empty();
  if (report.config.kind == ProblemKind::kOdl && any_trajectory) {
    const fs::path tdir = dir / "trajectories";
    try {
      fs::create_directories(tdir);
    } catch (const fs::filesystem_error& e) {
      throw Error(ErrorCode::kIo, e.what());
    }
    for (const TrialRecord& t : report.trials) {
      if (t.trajectory.empty()) continue;
      for (std::size_t k = 0; k < report.config.taus.size(); ++k) {
        const fs::path path =
            tdir / (kind + "_n" + std::to_string(t.n) + "_m" + std::to_string(t.m) + "_p" +
                    Fmt("%g", t.p) + "_tau" + Fmt("%g", report.config.taus[k]) + "_trial" +
                    std::to_string(t.trial) + ".csv");
        std::ofstream out = open(path);
        WriteTrajectoryCsv(out, t, k);
        close(out, path);
        files.trajectories.push_back(path);
      }
    }
  }
  return files;
}

}  // namespace rssd
