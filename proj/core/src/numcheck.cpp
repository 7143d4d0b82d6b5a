#include "rssd/numcheck.hpp"

#include "rssd/problems.hpp"

#include <cmath>
#include <algorithm>
#include <cstdio>
#include <sstream>

namespace rssd {

std::string CheckReport::Summary() const {
  char buf[512];
  std::snprintf(buf, sizeof buf, "[%s] %-28s max_abs=%.3e max_rel=%.3e tol=%.1e%s worst=%s",
                pass ? "PASS" : "FAIL", name.c_str(), max_abs_err, max_rel_err, tolerance,
                near_seam ? " (seam)" : "", worst_input.c_str());
  return buf;
}

template <class M>
CheckReport FdGradientCheck(const SmoothedObjective<M>& obj, const typename M::Ambient& x, double mu,
                            const FdOptions& options) {
  using Ambient = typename M::Ambient;
  const double h = options.h > 0.0 ? options.h : 1e-6 * (1.0 + x.norm());

  CheckReport report;
  report.name = std::string("fd_gradient/") + std::string(M::kName);
  report.tolerance = options.tolerance;

  if (obj.lambda() > 0.0) {
    const Eigen::MatrixXd z = obj.Apply(x);
    const Eigen::VectorXd row_norms = obj.op().rowwise().norm();
    for (Eigen::Index j = 0; j < z.cols() && !report.near_seam; ++j)
      for (Eigen::Index i = 0; i < z.rows(); ++i)
        if (std::abs(std::abs(z(i, j)) - 0.5 * mu) <= options.seam_window * h * row_norms(i)) {
          report.near_seam = true;
          break;
        }
  }
  if (report.near_seam) report.tolerance = options.seam_tolerance;

  const Ambient analytic = obj.EuclideanGradientAt(x, mu);
  const double denom = std::max(1.0, analytic.norm());
  Ambient probe = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double saved = probe(k);
    probe(k) = saved + h;
    const double fp = obj.ValueAt(probe, mu);
    probe(k) = saved - h;
    const double fm = obj.ValueAt(probe, mu);
    probe(k) = saved;
    const double fd = (fp - fm) / (2.0 * h);
    const double err = std::abs(fd - analytic(k));
    if (err > report.max_abs_err) {
      report.max_abs_err = err;
      std::ostringstream os;
      os << "coord=" << k << " mu=" << mu << " fd=" << fd << " analytic=" << analytic(k);
      report.worst_input = os.str();
    }
  }
  report.max_rel_err = report.max_abs_err / denom;
  report.pass = report.max_rel_err <= report.tolerance;
  return report;
}

template CheckReport FdGradientCheck<Sphere>(const SmoothedObjective<Sphere>&,
                                             const Eigen::VectorXd&, double, const FdOptions&);
template CheckReport FdGradientCheck<Stiefel>(const SmoothedObjective<Stiefel>&,
                                              const Eigen::MatrixXd&, double, const FdOptions&);

CheckReport CombineReports(std::string name, std::span<const CheckReport> reports) {
  CheckReport out;
  out.name = std::move(name);
  double worst = -1.0;
  for (const CheckReport& r : reports) {
    out.max_abs_err = std::max(out.max_abs_err, r.max_abs_err);
    out.pass = out.pass && r.pass;
    out.near_seam = out.near_seam || r.near_seam;
    const double ratio = r.tolerance > 0.0 ? r.max_rel_err / r.tolerance : r.max_rel_err;
    if (ratio > worst) {
      worst = ratio;
      out.max_rel_err = r.max_rel_err;
      out.tolerance = r.tolerance;
      out.worst_input = r.name + " " + r.worst_input;
    }
  }
  return out;
}

std::vector<CheckReport> GradientSweep(const GradientSweepOptions& options) {
  constexpr double kMus[] = {1.0, 0.1, 0.01};
  constexpr double kPs[] = {1.0, 0.8, 0.5, 0.1};
  Rng rng = MakeRng(options.seed);
  std::vector<CheckReport> reports;
  for (int i = 0; i < options.samples; ++i) {
    const double mu = kMus[i % 3];
    const double p = kPs[(i / 3) % 4];
    const std::uint64_t seed = rng();
    std::ostringstream tag;
    if (i % 2 == 0) {
      std::uniform_int_distribution<int> pick_n(2, options.max_fsv_n);
      const int n = pick_n(rng);
      std::uniform_int_distribution<int> pick_m(n + 1, 4 * n);
      const int m = pick_m(rng);
      const FsvInstance inst = GenerateFsv(n, m, seed);
      const SpherePoint x = Sphere::Random(n, rng);
      reports.push_back(FdGradientCheck(MakeFsvObjective(inst, p), x.ambient(), mu, options.fd));
      tag << " [fsv n=" << n << " m=" << m;
    } else {
      std::uniform_int_distribution<int> pick_n(2, options.max_odl_n);
      const int n = pick_n(rng);
      const OdlInstance inst = GenerateOdl(n, seed);
      const StiefelPoint x = Stiefel::Random(n, rng);
      reports.push_back(FdGradientCheck(MakeOdlObjective(inst, p), x.ambient(), mu, options.fd));
      tag << " [odl n=" << n << " m=" << inst.m;
    }
    tag << " p=" << p << " seed=" << seed << "]";
    reports.back().worst_input += tag.str();
  }
  return reports;
}

std::vector<double> UniformGrid(double lo, double hi, double spacing) {
  Require(spacing > 0.0 && hi >= lo, ErrorCode::kInvalidArgument, "bad grid");
  const auto count = static_cast<long>(std::floor((hi - lo) / spacing + 0.5));
  std::vector<double> ts;
  ts.reserve(static_cast<std::size_t>(count) + 1);
  for (long i = 0; i <= count; ++i) ts.push_back(lo + static_cast<double>(i) * spacing);
  return ts;
}

CheckReport SmoothingBoundAudit(std::span<const double> mus, std::span<const double> ps,
                                std::span<const double> ts, double tolerance) {
  CheckReport report;
  report.name = "smoothing_bound";
  report.tolerance = tolerance;

  // worst_input names the point with the largest gap/bound ratio.
  double worst_ratio = -1.0;
  auto consider = [&](double gap, double bound, const char* what, double mu, double p, double t) {
    // Gap must lie in [0, bound]; record the excess relative to the bound.
    const double excess = std::max({0.0, gap - bound, -gap});
    const double rel = excess / bound;
    if (gap / bound > worst_ratio || rel > report.max_rel_err) {
      worst_ratio = std::max(worst_ratio, gap / bound);
      std::ostringstream os;
      os << what << " mu=" << mu << " p=" << p << " t=" << t << " gap=" << gap;
      report.worst_input = os.str();
    }
    report.max_abs_err = std::max(report.max_abs_err, excess);
    report.max_rel_err = std::max(report.max_rel_err, rel);
  };

  for (double mu : mus) {
    for (double t : ts) {
      consider(SmoothAbs(t, mu) - std::abs(t), 0.25 * mu, "abs", mu, 1.0, t);
      for (double p : ps)
        consider(SmoothAbsPow(t, mu, p) - AbsPow(t, p), std::pow(0.25 * mu, p), "pow", mu, p, t);
    }
  }
  report.pass = report.max_rel_err <= report.tolerance;
  return report;
}

ProbeResult ConsistencyProbe(double p, double v, std::span<const double> mus, double tolerance) {
  Require(p > 0.0 && p < 1.0, ErrorCode::kInvalidArgument, "probe needs p in (0, 1)");
  Require(!mus.empty(), ErrorCode::kInvalidArgument, "probe needs a mu sequence");
  for (std::size_t k = 0; k < mus.size(); ++k) {
    Require(mus[k] > 0.0, ErrorCode::kInvalidArgument, "mu sequence must be positive");
    if (k > 0)
      Require(mus[k] < mus[k - 1], ErrorCode::kInvalidArgument,
              "mu sequence must be strictly decreasing");
  }

  const double a = std::pow(4.0, p - 1.0) * v / (2.0 * p);
  ProbeResult out;
  out.sequence.reserve(mus.size());
  for (double mu : mus) out.sequence.push_back(SmoothAbsPowDeriv(a * std::pow(mu, 2.0 - p), mu, p));
  out.limit = out.sequence.back();

  CheckReport& r = out.report;
  std::ostringstream name;
  name << "consistency_probe p=" << p << " v=" << v;
  r.name = name.str();
  // Absolute error against v; the relative field mirrors it (denominator 1).
  r.max_abs_err = std::abs(out.limit - v);
  r.max_rel_err = r.max_abs_err;
  r.tolerance = tolerance;
  std::ostringstream worst;
  worst << "mu=" << mus.back() << " limit=" << out.limit;
  r.worst_input = worst.str();
  r.pass = r.max_rel_err <= tolerance;
  return out;
}

std::vector<double> DyadicSequence(int first, int last) {
  Require(first <= last, ErrorCode::kInvalidArgument, "empty dyadic range");
  std::vector<double> mus;
  for (int k = first; k <= last; ++k) mus.push_back(std::ldexp(1.0, -k));
  return mus;
}

}  // namespace rssd
