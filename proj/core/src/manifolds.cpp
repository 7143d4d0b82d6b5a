#include "rssd/manifolds.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace rssd {
namespace {

void RequireSameShape(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const char* what) {
  Require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorCode::kDimensionMismatch,
          std::string(what) + ": " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
              " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
}

Eigen::MatrixXd Sym(const Eigen::MatrixXd& a) { return 0.5 * (a + a.transpose()); }

}  // namespace

SpherePoint::SpherePoint(Eigen::VectorXd coords) : coords_(std::move(coords)) {
  Require(coords_.size() > 0, ErrorCode::kInvalidArgument, "sphere point of dimension 0");
  Require(std::abs(coords_.norm() - 1.0) <= kSphereNormTolerance, ErrorCode::kNotOnManifold,
          "sphere point norm " + std::to_string(coords_.norm()));
}

SpherePoint SpherePoint::Normalize(const Eigen::VectorXd& v) {
  const double norm = v.norm();
  Require(norm > 0.0 && std::isfinite(norm), ErrorCode::kInvalidArgument,
          "cannot normalize a zero or non-finite vector");
  return SpherePoint(v / norm);
}

StiefelPoint::StiefelPoint(Eigen::MatrixXd mat) : mat_(std::move(mat)) {
  Require(mat_.rows() > 0 && mat_.rows() == mat_.cols(), ErrorCode::kDimensionMismatch,
          "Stiefel point must be a nonempty square matrix");
  const double err =
      (mat_.transpose() * mat_ - Eigen::MatrixXd::Identity(mat_.cols(), mat_.cols())).norm();
  Require(err <= kStiefelOrthoTolerance, ErrorCode::kNotOnManifold,
          "||X^T X - I||_F = " + std::to_string(err));
}

Eigen::MatrixXd PositiveQFactor(const Eigen::MatrixXd& a) {
  const Eigen::Index rows = a.rows();
  const Eigen::Index cols = a.cols();
  Require(cols > 0 && rows >= cols, ErrorCode::kDimensionMismatch,
          "thin QR needs rows >= cols > 0");
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
  const auto& packed = qr.matrixQR();

  const double scale = std::max(1.0, a.norm());
  const double threshold =
      std::numeric_limits<double>::epsilon() * static_cast<double>(rows) * scale;
  for (Eigen::Index j = 0; j < cols; ++j) {
    const double r = packed(j, j);
    if (!(std::abs(r) > threshold))
      throw Error(ErrorCode::kRankDeficient,
                  "column " + std::to_string(j) + " has |R_jj| = " + std::to_string(std::abs(r)));
    if (r < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

// ---------------------------------------------------------------------------
// Sphere

Sphere::Tangent Sphere::Project(const Point& x, const Ambient& v) {
  RequireSameShape(x.ambient(), v, "sphere projection");
  const Eigen::VectorXd& p = x.ambient();
  return {v - p * p.dot(v), x};
}

Sphere::Tangent Sphere::Zero(const Point& x) {
  return {Eigen::VectorXd::Zero(x.dim()), x};
}

Sphere::Point Sphere::Retract(const Tangent& eta) { return Retract(eta, 1.0); }

Sphere::Point Sphere::Retract(const Tangent& eta, double t) {
  RequireSameShape(eta.base.ambient(), eta.ambient, "sphere retraction");
  // ||x + t eta||^2 = 1 + t^2 ||eta||^2 for tangent eta, never zero.
  return SpherePoint::Normalize(eta.base.ambient() + t * eta.ambient);
}

Sphere::Ambient Sphere::RetractionStep(const Tangent& eta, double t) {
  RequireSameShape(eta.base.ambient(), eta.ambient, "sphere retraction");
  // (x + t eta)/r - x with r = sqrt(1 + s^2), r - 1 = s^2/(1 + r)
  const double s = t * eta.norm();
  const double r = std::hypot(1.0, s);
  const double rm1 = s * s / (1.0 + r);
  return (t * eta.ambient - rm1 * eta.base.ambient()) / r;
}

double Sphere::Inner(const Tangent& a, const Tangent& b) { return a.ambient.dot(b.ambient); }

double Sphere::TangentResidual(const Point& x, const Ambient& eta) {
  RequireSameShape(x.ambient(), eta, "sphere tangent check");
  return std::abs(x.ambient().dot(eta));
}

Sphere::Point Sphere::Random(Eigen::Index n, Rng& rng, InitDistribution dist) {
  Require(n >= 1, ErrorCode::kInvalidArgument, "sphere dimension must be >= 1");
  for (;;) {
    Eigen::VectorXd v = dist == InitDistribution::kGaussian ? GaussianMatrix(n, 1, rng)
                                                            : UniformMatrix(n, 1, rng);
    if (v.norm() > 0.0) return SpherePoint::Normalize(v);
  }
}

// ---------------------------------------------------------------------------
// Stiefel

Stiefel::Tangent Stiefel::Project(const Point& x, const Ambient& v) {
  RequireSameShape(x.ambient(), v, "Stiefel projection");
  const Eigen::MatrixXd& p = x.ambient();
  return {v - p * Sym(p.transpose() * v), x};
}

Stiefel::Tangent Stiefel::Zero(const Point& x) {
  return {Eigen::MatrixXd::Zero(x.dim(), x.dim()), x};
}

Stiefel::Point Stiefel::Retract(const Tangent& eta) { return Retract(eta, 1.0); }

Stiefel::Point Stiefel::Retract(const Tangent& eta, double t) {
  RequireSameShape(eta.base.ambient(), eta.ambient, "Stiefel retraction");
  return StiefelPoint(PositiveQFactor(eta.base.ambient() + t * eta.ambient));
}

Stiefel::Ambient Stiefel::RetractionStep(const Tangent& eta, double t) {
  RequireSameShape(eta.base.ambient(), eta.ambient, "Stiefel retraction");
  const Eigen::MatrixXd& x = eta.base.ambient();
  const Eigen::MatrixXd step = t * eta.ambient;
  const Eigen::MatrixXd e = step.transpose() * step;
  if (e.norm() > 0.25) return Retract(eta, t).ambient() - x;

  // R = I + U with U upper triangular: U + U^T = E - U^T U. Fixed point,
  // contracting while ||U|| stays small.
  const Eigen::Index n = e.rows();
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n, n);
  for (int it = 0; it < 100; ++it) {
    Eigen::MatrixXd rhs = e - u.transpose() * u;
    Eigen::MatrixXd next = rhs.triangularView<Eigen::StrictlyUpper>();
    next.diagonal() = 0.5 * rhs.diagonal();
    const bool done = (next - u).norm() <= 1e-17 * next.norm();
    u = std::move(next);
    if (done) break;
  }
  // Q = (X + t eta) R^{-1} = (X + t eta)(I - V), V = R^{-1} U
  Eigen::MatrixXd r = u;
  r.diagonal().array() += 1.0;
  const Eigen::MatrixXd v = r.triangularView<Eigen::Upper>().solve(u);
  return step - (x + step) * v;
}

double Stiefel::Inner(const Tangent& a, const Tangent& b) {
  return (a.ambient.array() * b.ambient.array()).sum();
}

double Stiefel::TangentResidual(const Point& x, const Ambient& eta) {
  RequireSameShape(x.ambient(), eta, "Stiefel tangent check");
  const Eigen::MatrixXd a = eta.transpose() * x.ambient();
  return (a + a.transpose()).norm();
}

Stiefel::Point Stiefel::Random(Eigen::Index n, Rng& rng, InitDistribution dist) {
  Require(n >= 1, ErrorCode::kInvalidArgument, "Stiefel dimension must be >= 1");
  for (int attempt = 0;; ++attempt) {
    Eigen::MatrixXd a = dist == InitDistribution::kGaussian ? GaussianMatrix(n, n, rng)
                                                            : UniformMatrix(n, n, rng);
    try {
      return StiefelPoint(PositiveQFactor(a));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kRankDeficient || attempt >= 8) throw;
    }
  }
}

}  // namespace rssd
