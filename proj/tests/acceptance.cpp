// End-to-end acceptance run: one PASS/FAIL line per criterion, exit status 1
// if any failed.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "rssd/experiment.hpp"
#include "rssd/numcheck.hpp"
#include "rssd/problems.hpp"
#include "rssd/solver.hpp"

using namespace rssd;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

bool RunCriterion(int id, const char* name, double limit_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = secs < limit_s;
  const bool pass = out.pass && in_time;
  std::printf("%s criterion %d (%s): %s [%.1fs%s]\n", pass ? "PASS" : "FAIL", id, name,
              out.detail.c_str(), secs, in_time ? "" : ", over time limit");
  std::fflush(stdout);
  return pass;
}

Outcome GradientCheck() {
  GradientSweepOptions opt;
  opt.samples = 200;
  const auto reports = GradientSweep(opt);
  int seam = 0, failed = 0;
  for (const auto& r : reports) {
    seam += r.near_seam;
    failed += !r.pass;
  }
  const CheckReport all = CombineReports("fd", reports);
  std::ostringstream os;
  os << reports.size() << " samples, " << failed << " failed, " << seam
     << " near a seam, worst rel err " << all.max_rel_err;
  return {all.pass && reports.size() == 200 && failed == 0, os.str()};
}

Outcome SmoothingBounds() {
  const std::vector<double> mus = {1.0, 0.5, 0.1, 0.01, 1e-4};
  const std::vector<double> ps = {1.0, 0.9, 0.8, 0.5, 0.1, 0.001};
  const std::vector<double> ts = UniformGrid(-5.0, 5.0, 1e-3);
  const CheckReport r = SmoothingBoundAudit(mus, ps, ts);
  double worst_t0 = 0.0;
  for (double mu : mus) worst_t0 = std::max(worst_t0, std::abs(SmoothAbs(0.0, mu) - mu / 4));
  std::ostringstream os;
  os << "max excess " << r.max_abs_err << ", t=0 gap error " << worst_t0;
  return {r.pass && worst_t0 <= 1e-14, os.str()};
}

Outcome Probe() {
  const std::vector<double> seq = DyadicSequence(10, 30);
  bool ok = true;
  std::ostringstream os;
  for (double p : {0.5, 0.9})
    for (double v : {1.0, -3.0, 10.0}) {
      const ProbeResult r = ConsistencyProbe(p, v, seq);
      ok = ok && r.report.pass;
      os << "p=" << p << ",v=" << v << ":" << (r.limit - v) << " ";
    }
  return {ok, "limit - v " + os.str()};
}

Outcome SolverInvariants() {
  const SolverConfig c;
  int violations = 0, schedule = 0, max_iters = 0;
  std::ostringstream why;
  auto flag = [&](int run, const std::string& what) {
    if (violations++ < 3) why << " run " << run << ": " << what << ";";
  };
  for (int run = 0; run < 20; ++run) {
    const int n = run % 2 == 0 ? 5 : 10;
    const double p = run % 3 == 0 ? 1.0 : (run % 3 == 1 ? 0.8 : 0.5);
    const FsvInstance inst = GenerateFsv(n, 10 * n, 500 + run);
    const auto obj = MakeFsvObjective(inst, p);
    Rng rng = MakeRng(900 + run);
    double worst_norm = 0.0;
    Observer<Sphere> watch = [&](const SolverState<Sphere>& s) {
      worst_norm = std::max(worst_norm, std::abs(s.x.ambient().norm() - 1.0));
    };
    SolveResult<Sphere> r = [&] {
      try {
        return RssdRun(obj, Sphere::Random(n, rng), c, watch);
      } catch (const SolveAborted<Sphere>& e) {
        flag(run, std::string("aborted: ") + e.what());
        return e.partial();
      }
    }();
    if (worst_norm > 1e-10) flag(run, "off the sphere");
    int k = 0;
    for (std::size_t i = 0; i < r.history.size(); ++i) {
      const auto& h = r.history[i];
      const double mu_k = c.mu0 * std::pow(c.theta_mu, k);
      const double delta_k = c.delta0 * std::pow(c.theta_delta, k);
      if (std::abs(h.mu - mu_k) > 1e-15 * mu_k || std::abs(h.delta - delta_k) > 1e-15 * delta_k)
        flag(run, "schedule off at iteration " + std::to_string(i));
      if (i + 1 < r.history.size()) {
        const double rm = r.history[i + 1].mu / h.mu;
        const double rd = r.history[i + 1].delta / h.delta;
        const bool shrink = h.event == StepEvent::kShrink;
        const bool ok = shrink ? std::abs(rm - c.theta_mu) < 1e-15 && std::abs(rd - c.theta_delta) < 1e-15
                               : rm == 1.0 && rd == 1.0;
        if (!ok) flag(run, "ratio not in {1, theta}");
      }
      if (h.event == StepEvent::kShrink) ++k;
      if (h.event == StepEvent::kDescend && !(h.change < 0.0)) flag(run, "non-descent step");
    }
    if (r.status == SolveStatus::kConvergedSchedule && r.mu < 1e-6 && r.delta < 1e-4 &&
        r.iterations <= c.max_iters)
      ++schedule;
    else if (r.status == SolveStatus::kMaxIters)
      ++max_iters;
    else
      flag(run, std::string("terminated with ") + std::string(ToString(r.status)));
  }
  std::ostringstream os;
  os << schedule << " reached the schedule, " << max_iters << " hit MaxIters, " << violations
     << " violations" << why.str();
  return {violations == 0 && schedule + max_iters == 20, os.str()};
}

ExperimentConfig FsvConfig(int jobs) {
  ExperimentConfig c;
  c.kind = ProblemKind::kFsv;
  c.sizes = {{5, 50}};
  c.ps = {1.0, 0.8};
  c.taus = {1e-5, 1e-8};
  c.trials = 50;
  c.seed = 1;
  c.jobs = jobs;
  return c;
}

ExperimentConfig OdlConfig(int jobs) {
  ExperimentConfig c;
  c.kind = ProblemKind::kOdl;
  c.sizes = {{10, 0}};
  c.ps = {0.001};
  c.taus = {1e-4};
  c.trials = 10;
  c.seed = 1;
  c.budget_iters = 2000;
  c.scale_steps = true;
  c.jobs = jobs;
  return c;
}

// cell value for (p, tau) in a single-size report
double Cell(const ExperimentReport& r, double p, double tau) {
  for (const auto& cell : r.cells)
    if (cell.p == p && cell.tau == tau) return cell.value;
  return std::nan("");
}

}  // namespace

int main() {
  bool all = true;
  all &= RunCriterion(1, "gradient correctness", 30, GradientCheck);
  all &= RunCriterion(2, "smoothing bounds", 5, SmoothingBounds);
  all &= RunCriterion(3, "consistency probe", 1, Probe);
  all &= RunCriterion(4, "solver invariants", 60, SolverInvariants);

  ExperimentReport fsv;
  all &= RunCriterion(5, "FSV (5,50) success", 600, [&] {
    fsv = RunExperiment(FsvConfig(1));
    const double l1 = Cell(fsv, 1.0, 1e-8), lp = Cell(fsv, 0.8, 1e-8);
    std::ostringstream os;
    os << "l1 " << l1 << "/50 (need 40), p=0.8 " << lp << "/50 (need 44)";
    return Outcome{l1 >= 40 && lp >= 44, os.str()};
  });

  all &= RunCriterion(6, "FSV tau robustness", 1, [&] {
    bool ok = true;
    std::ostringstream os;
    for (double p : {1.0, 0.8}) {
      const double hi = Cell(fsv, p, 1e-5), lo = Cell(fsv, p, 1e-8);
      ok = ok && lo >= 0.9 * hi;
      os << "p=" << p << ": " << lo << " at 1e-8 vs " << hi << " at 1e-5; ";
    }
    return Outcome{ok, os.str()};
  });

  ExperimentReport odl;
  all &= RunCriterion(7, "ODL n=10 sparsity", 900, [&] {
    odl = RunExperiment(OdlConfig(1));
    const auto& cell = odl.cells.at(0);
    std::ostringstream os;
    os << "mean sparsity " << cell.value << ", truth " << cell.mean_truth << ", m=" << cell.m;
    return Outcome{std::abs(cell.value - cell.mean_truth) <= 0.02 && cell.m == 316, os.str()};
  });

  all &= RunCriterion(8, "determinism across jobs", 1800, [&] {
    const ExperimentReport fsv3 = RunExperiment(FsvConfig(3));
    const ExperimentReport odl3 = RunExperiment(OdlConfig(3));
    const bool same_fsv = ReportToJson(fsv, false).dump() == ReportToJson(fsv3, false).dump();
    const bool same_odl = ReportToJson(odl, false).dump() == ReportToJson(odl3, false).dump();
    std::ostringstream os;
    os << "FSV " << (same_fsv ? "identical" : "differs") << ", ODL "
       << (same_odl ? "identical" : "differs") << " (jobs 1 vs 3)";
    return Outcome{same_fsv && same_odl, os.str()};
  });

  return all ? 0 : 1;
}
