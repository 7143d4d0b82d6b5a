#pragma once

#include <string_view>

#include <Eigen/Dense>

#include "rssd/error.hpp"
#include "rssd/rng.hpp"

namespace rssd {

inline constexpr double kSphereNormTolerance = 1e-12;
inline constexpr double kStiefelOrthoTolerance = 1e-10;
inline constexpr double kTangentTolerance = 1e-10;

/// A point on the unit sphere S^{n-1}, stored in ambient coordinates.
class SpherePoint {
 public:
  /// Throws kNotOnManifold when | ||coords|| - 1 | exceeds kSphereNormTolerance.
  explicit SpherePoint(Eigen::VectorXd coords);

  /// Projects a nonzero vector onto the sphere.
  static SpherePoint Normalize(const Eigen::VectorXd& v);

  const Eigen::VectorXd& ambient() const { return coords_; }
  Eigen::Index dim() const { return coords_.size(); }

 private:
  Eigen::VectorXd coords_;
};

/// A square matrix with orthonormal columns, i.e. a point of St(n,n).
class StiefelPoint {
 public:
  /// Throws kNotOnManifold when ||X^T X - I||_F exceeds kStiefelOrthoTolerance.
  explicit StiefelPoint(Eigen::MatrixXd mat);

  const Eigen::MatrixXd& ambient() const { return mat_; }
  Eigen::Index dim() const { return mat_.rows(); }

 private:
  Eigen::MatrixXd mat_;
};

/// An ambient direction known to lie in the tangent space at `base`.
/// Only the manifold's Project() and Zero() produce one.
template <class M>
struct TangentVector {
  typename M::Ambient ambient;
  typename M::Point base;

  double norm() const { return ambient.norm(); }
};

enum class InitDistribution { kGaussian, kUniform };

/// Q factor of a thin QR decomposition of `a` (rows >= cols), normalized so
/// that diag(R) > 0. Throws kRankDeficient if a column is numerically
/// dependent on the previous ones.
Eigen::MatrixXd PositiveQFactor(const Eigen::MatrixXd& a);

struct Sphere {
  using Point = SpherePoint;
  using Ambient = Eigen::VectorXd;
  using Tangent = TangentVector<Sphere>;

  static constexpr std::string_view kName = "sphere";

  /// (I - x x^T) v.
  static Tangent Project(const Point& x, const Ambient& v);
  static Tangent Zero(const Point& x);
  /// (x + eta) / ||x + eta||.
  static Point Retract(const Tangent& eta);
  static Point Retract(const Tangent& eta, double t);
  /// R_x(t eta) - x without forming R_x(t eta), so short steps keep full
  /// relative accuracy. Treats x as exactly unit and eta as exactly tangent.
  static Ambient RetractionStep(const Tangent& eta, double t);
  static double Inner(const Tangent& a, const Tangent& b);
  /// |x^T eta|, the amount by which `eta` fails to be tangent at x.
  static double TangentResidual(const Point& x, const Ambient& eta);
  /// Normalized standard-Gaussian vector. Both distributions are accepted for
  /// symmetry with Stiefel; kUniform draws from U(0,1)^n before normalizing.
  static Point Random(Eigen::Index n, Rng& rng,
                      InitDistribution dist = InitDistribution::kGaussian);
};

struct Stiefel {
  using Point = StiefelPoint;
  using Ambient = Eigen::MatrixXd;
  using Tangent = TangentVector<Stiefel>;

  static constexpr std::string_view kName = "stiefel";

  /// V - X sym(X^T V).
  static Tangent Project(const Point& x, const Ambient& v);
  static Tangent Zero(const Point& x);
  /// qf(X + eta) with the positive-diagonal convention.
  static Point Retract(const Tangent& eta);
  static Point Retract(const Tangent& eta, double t);
  /// qf(X + t eta) - X, see Sphere::RetractionStep. X^T X = I and tangency
  /// are taken as exact, so R = chol(I + t^2 eta^T eta).
  static Ambient RetractionStep(const Tangent& eta, double t);
  static double Inner(const Tangent& a, const Tangent& b);
  /// ||eta^T X + X^T eta||_F.
  static double TangentResidual(const Point& x, const Ambient& eta);
  static Point Random(Eigen::Index n, Rng& rng,
                      InitDistribution dist = InitDistribution::kGaussian);
};

}  // namespace rssd
