// rssd: batch runner for the sparse-vector (fsv) and dictionary-learning
// (odl) experiments, plus the numerical self-checks (check).

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli_config.hpp"
#include "rssd/experiment.hpp"
#include "rssd/numcheck.hpp"
#include "rssd/problems.hpp"

namespace {

using namespace rssd;
using namespace rssd::cli;

// Flags land in `flags`; only options actually given on the command line are
// copied so they override the config file.
struct RunFlags {
  std::string config;
  std::vector<int> n, m;
  std::vector<double> m_ratio, p, tau;
  int trials = 0, budget_iters = 0, jobs = 0, trajectory_every = 0;
  std::uint64_t seed = 0;
  double budget_seconds = 0.0;
  std::string out, init;
  double mu0 = 0, delta0 = 0, theta_mu = 0, theta_delta = 0, beta = 0, alpha_bar = 0, sigma = 0;
  int max_iters = 0, max_backtracks = 0;
  bool scale_steps = false;

  struct Opts {
    CLI::Option *config, *n, *m, *m_ratio, *p, *tau, *trials, *seed, *grid, *budget_iters,
        *budget_seconds, *out, *jobs, *init, *trajectory_every, *keep_points, *save_instances,
        *mu0, *delta0, *theta_mu, *theta_delta, *beta, *alpha_bar, *sigma, *max_iters,
        *max_backtracks, *scale_steps;
  } opt{};

  void Register(CLI::App* app) {
    opt.config = app->add_option("--config", config, "TOML config file (flags override it)");
    opt.n = app->add_option("--n", n, "Problem dimension(s), comma separated")->delimiter(',');
    opt.m = app->add_option("--m", m, "Ambient/sample size(s), comma separated")->delimiter(',');
    opt.m_ratio = app->add_option("--m-ratio", m_ratio, "FSV: m = ratio * n for each ratio")
                      ->delimiter(',');
    opt.p = app->add_option("--p", p, "Exponent(s) in (0,1]; 1 is the l1 model")->delimiter(',');
    opt.tau = app->add_option("--tau", tau, "Truncation tolerance(s)")->delimiter(',');
    opt.trials = app->add_option("--trials", trials, "Trials per cell");
    opt.seed = app->add_option("--seed", seed, "Base seed");
    opt.grid = app->add_flag("--grid", "Search the five-schedule (theta_mu, theta_delta) grid");
    opt.budget_iters = app->add_option("--budget-iters", budget_iters, "Iteration budget");
    opt.budget_seconds = app->add_option("--budget-seconds", budget_seconds, "Wall-clock budget");
    opt.out = app->add_option("--out", out, "Output directory");
    opt.jobs = app->add_option("--jobs", jobs, "Parallel trials");
    opt.init = app->add_option("--init", init, "Initial points: gaussian or uniform");
    opt.trajectory_every = app->add_option("--trajectory-every", trajectory_every,
                                           "ODL: sample sparsity every k iterations (0 = off)");
    opt.keep_points = app->add_flag("--keep-points", "Store final points in the JSON report");
    opt.save_instances = app->add_flag("--save-instances", "Write instances to <out>/instances");
    opt.mu0 = app->add_option("--mu0", mu0, "Initial smoothing parameter");
    opt.delta0 = app->add_option("--delta0", delta0, "Initial gradient tolerance");
    opt.theta_mu = app->add_option("--theta-mu", theta_mu, "mu shrink factor");
    opt.theta_delta = app->add_option("--theta-delta", theta_delta, "delta shrink factor");
    opt.beta = app->add_option("--beta", beta, "Backtracking factor");
    opt.alpha_bar = app->add_option("--alpha-bar", alpha_bar, "Initial trial step");
    opt.sigma = app->add_option("--sigma", sigma, "Armijo constant");
    opt.max_iters = app->add_option("--max-iters", max_iters, "Iteration cap");
    opt.max_backtracks = app->add_option("--max-backtracks", max_backtracks, "Backtrack cap");
    opt.scale_steps = app->add_option("--scale-steps", scale_steps,
                                      "Scale alpha_bar and delta0 to the objective (default: odl only)");
  }

  RunSettings ToSettings() const {
    RunSettings s;
    auto set = [](CLI::Option* o, auto& field, const auto& value) {
      if (o->count() > 0) field = value;
    };
    set(opt.n, s.n, n);
    set(opt.m, s.m, m);
    set(opt.m_ratio, s.m_ratio, m_ratio);
    set(opt.p, s.p, p);
    set(opt.tau, s.tau, tau);
    set(opt.trials, s.trials, trials);
    set(opt.seed, s.seed, seed);
    set(opt.grid, s.grid, true);
    set(opt.budget_iters, s.budget_iters, budget_iters);
    set(opt.budget_seconds, s.budget_seconds, budget_seconds);
    set(opt.out, s.out, out);
    set(opt.jobs, s.jobs, jobs);
    set(opt.init, s.init, init);
    set(opt.trajectory_every, s.trajectory_every, trajectory_every);
    set(opt.keep_points, s.keep_points, true);
    set(opt.save_instances, s.save_instances, true);
    set(opt.mu0, s.mu0, mu0);
    set(opt.delta0, s.delta0, delta0);
    set(opt.theta_mu, s.theta_mu, theta_mu);
    set(opt.theta_delta, s.theta_delta, theta_delta);
    set(opt.beta, s.beta, beta);
    set(opt.alpha_bar, s.alpha_bar, alpha_bar);
    set(opt.sigma, s.sigma, sigma);
    set(opt.max_iters, s.max_iters, max_iters);
    set(opt.max_backtracks, s.max_backtracks, max_backtracks);
    set(opt.scale_steps, s.scale_steps, scale_steps);
    return s;
  }
};

void SaveInstances(const Resolved& r) {
  const auto dir = std::filesystem::path(r.out_dir) / "instances";
  std::filesystem::create_directories(dir);
  const ExperimentConfig& c = r.config;
  const double tau = c.taus.front();
  for (int cell = 0; cell < static_cast<int>(c.sizes.size()); ++cell) {
    auto [n, m] = c.sizes[cell];
    for (int t = 0; t < c.trials; ++t) {
      const std::uint64_t seed = InstanceSeed(c.seed, cell, t);
      const std::string name = std::string(ToString(c.kind)) + "_n" + std::to_string(n) +
                               "_cell" + std::to_string(cell) + "_trial" + std::to_string(t) + ".txt";
      if (c.kind == ProblemKind::kFsv)
        SaveInstance((dir / name).string(), GenerateFsv(n, m, seed), tau);
      else
        SaveInstance((dir / name).string(), GenerateOdl(n, seed, c.bernoulli, m), tau);
    }
  }
}

int RunBatch(ProblemKind kind, const RunFlags& flags) {
  RunSettings settings;
  if (!flags.config.empty()) settings = LoadSettingsFile(flags.config);
  settings.MergeFrom(flags.ToSettings());
  const Resolved resolved = Resolve(kind, settings);

  const ExperimentReport report = RunExperiment(resolved.config);
  const EmittedFiles files = EmitReport(report, resolved.out_dir);
  if (resolved.save_instances) {
    try {
      SaveInstances(resolved);
    } catch (const std::filesystem::filesystem_error& e) {
      throw Error(ErrorCode::kIo, e.what());
    }
  }

  WriteSummaryCsv(std::cout, report);
  int failed = 0;
  for (const TrialRecord& t : report.trials) failed += t.failed() ? 1 : 0;
  if (failed > 0) std::cerr << failed << " trial(s) ended with a solver error\n";
  std::cerr << "wrote " << files.summary_csv.string() << " and " << files.report_json.string();
  if (!files.trajectories.empty())
    std::cerr << " (+" << files.trajectories.size() << " trajectory files)";
  std::cerr << '\n';
  return kExitOk;
}

struct CheckFlags {
  int samples = 40;
  std::uint64_t seed = 7;
  std::vector<double> probe_p = {0.5};
  std::vector<double> probe_v = {1.0, -3.0, 10.0};
  int probe_kmax = 30;
};

int RunChecks(const CheckFlags& flags) {
  std::vector<CheckReport> reports;

  GradientSweepOptions sweep;
  sweep.samples = flags.samples;
  sweep.seed = flags.seed;
  const std::vector<CheckReport> fd = GradientSweep(sweep);
  std::vector<CheckReport> fsv, odl;
  for (std::size_t i = 0; i < fd.size(); ++i) (i % 2 == 0 ? fsv : odl).push_back(fd[i]);
  reports.push_back(CombineReports("fd_gradient/sphere", fsv));
  reports.push_back(CombineReports("fd_gradient/stiefel", odl));

  const std::vector<double> mus = {1.0, 0.5, 0.1, 0.01};
  const std::vector<double> ps = {1.0, 0.9, 0.8, 0.5, 0.1, 0.001};
  const std::vector<double> ts = UniformGrid(-5.0, 5.0, 1e-3);
  reports.push_back(SmoothingBoundAudit(mus, ps, ts));

  const std::vector<double> seq = DyadicSequence(10, flags.probe_kmax);
  for (double p : flags.probe_p)
    for (double v : flags.probe_v) reports.push_back(ConsistencyProbe(p, v, seq).report);

  bool ok = true;
  for (const CheckReport& r : reports) {
    std::cout << r.Summary() << '\n';
    ok = ok && r.pass;
  }
  return ok ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Riemannian smoothing steepest descent: experiments and numerical checks"};
  app.require_subcommand(1);

  RunFlags fsv_flags, odl_flags;
  CLI::App* fsv = app.add_subcommand("fsv", "Sparsest vector in a subspace (sphere)");
  fsv_flags.Register(fsv);
  CLI::App* odl = app.add_subcommand("odl", "Orthogonal dictionary learning (Stiefel)");
  odl_flags.Register(odl);

  CheckFlags check_flags;
  CLI::App* check = app.add_subcommand("check", "Finite-difference and smoothing self-checks");
  check->add_option("--samples", check_flags.samples, "Random gradient checks")
      ->check(CLI::PositiveNumber);
  check->add_option("--seed", check_flags.seed, "Seed for the gradient checks");
  check->add_option("--probe-p", check_flags.probe_p, "Exponents for the consistency probe")
      ->delimiter(',');
  check->add_option("--probe-v", check_flags.probe_v, "Target limits for the probe")
      ->delimiter(',');
  check->add_option("--probe-kmax", check_flags.probe_kmax, "Last k in mu_k = 2^-k")
      ->check(CLI::Range(10, 1000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (fsv->parsed()) return RunBatch(ProblemKind::kFsv, fsv_flags);
    if (odl->parsed()) return RunBatch(ProblemKind::kOdl, odl_flags);
    return RunChecks(check_flags);
  } catch (const Error& e) {
    std::cerr << "rssd: " << e.what() << '\n';
    if (e.code() == ErrorCode::kIo) return kExitIo;
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "rssd: " << e.what() << '\n';
    return kExitConfig;
  }
}
