#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rssd/manifolds.hpp"
#include "rssd/smoothing.hpp"

namespace rssd {

/// Outcome of one numerical check. pass == (max_rel_err <= tolerance).
struct CheckReport {
  std::string name{};
  double max_abs_err = 0.0;
  double max_rel_err = 0.0;
  std::string worst_input{};
  double tolerance = 0.0;
  bool pass = true;
  // Set when a sampled point sits close enough to a smoothing seam that the
  // wider seam tolerance was applied.
  bool near_seam = false;

  std::string Summary() const;
};

struct FdOptions {
  /// Central-difference step; <= 0 selects 1e-6 (1 + ||x||).
  double h = 0.0;
  double tolerance = 1e-5;
  double seam_tolerance = 1e-3;
  /// A term counts as near the seam when ||(B x)_i| - mu/2| <= seam_window * h * ||A_i||.
  double seam_window = 10.0;
};

/// Compares the analytic Euclidean gradient with central differences of
/// f~(., mu) in every ambient coordinate. The oracle side only evaluates
/// objective values. Relative error uses the denominator max(1, ||analytic||).
template <class M>
CheckReport FdGradientCheck(const SmoothedObjective<M>& obj, const typename M::Ambient& x, double mu,
                            const FdOptions& options = {});

extern template CheckReport FdGradientCheck<Sphere>(const SmoothedObjective<Sphere>&,
                                                    const Eigen::VectorXd&, double,
                                                    const FdOptions&);
extern template CheckReport FdGradientCheck<Stiefel>(const SmoothedObjective<Stiefel>&,
                                                     const Eigen::MatrixXd&, double,
                                                     const FdOptions&);

/// Folds several reports into one: worst errors, pass only if all passed.
CheckReport CombineReports(std::string name, std::span<const CheckReport> reports);

struct GradientSweepOptions {
  int samples = 200;
  std::uint64_t seed = 7;
  int max_fsv_n = 10;
  int max_odl_n = 8;
  FdOptions fd;
};

/// Finite-difference checks on random instances: even samples are FSV
/// (2 <= n <= max_fsv_n, n < m <= 4n), odd samples ODL (2 <= n <= max_odl_n).
/// mu cycles through {1, 0.1, 0.01} and p through {1, 0.8, 0.5, 0.1}; the
/// point is a random manifold point.
std::vector<CheckReport> GradientSweep(const GradientSweepOptions& options);

/// Grid of t values from lo to hi (inclusive) with the given spacing.
std::vector<double> UniformGrid(double lo, double hi, double spacing);

/// Audits |s_mu(t) - |t|| <= mu/4 and |(s_mu(t))^p - |t|^p| <= (mu/4)^p over
/// every (mu, p, t). max_abs_err holds the largest violation (0 when none),
/// max_rel_err that violation relative to its bound.
CheckReport SmoothingBoundAudit(std::span<const double> mus, std::span<const double> ps,
                                std::span<const double> ts, double tolerance = 1e-14);

struct ProbeResult {
  double limit = 0.0;             // derivative at the last (t_k, mu_k)
  std::vector<double> sequence;   // derivative at every k
  CheckReport report;
};

/// Evaluates d/dt (s_mu(t))^p at t_k = a mu_k^{2-p}, a = 4^{p-1} v / (2p),
/// along a decreasing mu sequence. The derivative tends to v, so every real
/// number is a limit of smoothed gradients at t = 0.
/// Requires p in (0,1) and a strictly decreasing positive sequence.
ProbeResult ConsistencyProbe(double p, double v, std::span<const double> mus,
                             double tolerance = 1e-3);

/// mu_k = 2^{-k} for k = first..last.
std::vector<double> DyadicSequence(int first, int last);

}  // namespace rssd
