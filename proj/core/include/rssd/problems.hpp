#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>

#include <Eigen/Dense>

#include "rssd/manifolds.hpp"
#include "rssd/smoothing.hpp"

namespace rssd {

/// Sparsest vector in a subspace: W = span(e, g_1, ..., g_{n-1}) in R^m with
/// e = (1,...,1,0,...,0) (n ones). Minimize ||Q x||_p^p over the sphere.
struct FsvInstance {
  int n = 0;
  int m = 0;
  std::uint64_t seed = 0;
  Eigen::MatrixXd q;  // m x n, orthonormal columns, first column parallel to e

  /// The planted vector e.
  Eigen::VectorXd Planted() const;
  /// Q^T e / ||Q^T e||, the point whose image Q x is proportional to e.
  SpherePoint Reference() const;
};

/// Orthogonal dictionary learning: Y = X* S* with X* orthogonal and S*
/// Bernoulli-Gaussian. Minimize (1/m) sum_ij |(Y^T X)_ij|^p over St(n,n).
struct OdlInstance {
  int n = 0;
  int m = 0;
  double theta = 0.5;
  std::uint64_t seed = 0;
  Eigen::MatrixXd x_star;  // n x n
  Eigen::MatrixXd s_star;  // n x m
  Eigen::MatrixXd y;       // n x m
};

/// Deterministic in `seed`. Requires m > n >= 2.
FsvInstance GenerateFsv(int n, int m, std::uint64_t seed);

/// floor(10 n^1.5), the sample count used for dictionary learning.
int OdlSampleCount(int n);

/// m defaults to OdlSampleCount(n). Requires n >= 2.
OdlInstance GenerateOdl(int n, std::uint64_t seed, double theta = 0.5, int m = -1);

SmoothedObjective<Sphere> MakeFsvObjective(const FsvInstance& inst, double p);
SmoothedObjective<Stiefel> MakeOdlObjective(const OdlInstance& inst, double p);

/// Number of entries with |v_i| >= tau. Entries below tau count as zero.
template <class Derived>
long TruncatedNnz(const Eigen::DenseBase<Derived>& v, double tau) {
  return static_cast<long>((v.derived().array().abs() >= tau).count());
}

bool FsvSuccess(const FsvInstance& inst, const SpherePoint& x, double tau);
long FsvSupport(const FsvInstance& inst, const SpherePoint& x, double tau);

/// Fraction of zero entries (after truncation at tau) of Y^T X.
double SparsityLevel(const OdlInstance& inst, const StiefelPoint& x, double tau);
/// Sparsity level of the planted solution, i.e. of S*^T.
double GroundTruthSparsity(const OdlInstance& inst, double tau);

// Text instance format:
//   rssd-instance 1
//   kind fsv|odl
//   n <n>
//   m <m>
//   seed <seed>
//   tau <default tau>
//   [theta <theta>]                  (odl)
//   matrix <name> <rows> <cols>
//   <rows lines of cols numbers, %.17g>
// FSV stores matrix q; ODL stores x_star, s_star and y.
using Instance = std::variant<FsvInstance, OdlInstance>;

void WriteInstance(std::ostream& out, const Instance& inst, double default_tau);
Instance ReadInstance(std::istream& in, double* default_tau = nullptr);
void SaveInstance(const std::string& path, const Instance& inst, double default_tau);
Instance LoadInstance(const std::string& path, double* default_tau = nullptr);

}  // namespace rssd
