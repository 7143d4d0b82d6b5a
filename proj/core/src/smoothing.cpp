#include "rssd/smoothing.hpp"

#include <cmath>
#include <string>
#include <type_traits>
#include <utility>

namespace rssd {
namespace {

void CheckMu(double mu) {
  Require(mu > 0.0 && std::isfinite(mu), ErrorCode::kInvalidArgument,
          "smoothing parameter mu must be positive, got " + std::to_string(mu));
}

void CheckP(double p) {
  Require(p > 0.0 && p <= 1.0, ErrorCode::kInvalidArgument,
          "exponent p must lie in (0, 1], got " + std::to_string(p));
}

// Unchecked kernels for the hot loops; callers validate mu and p once.
inline double SmoothAbsKernel(double t, double mu) {
  const double a = std::abs(t);
  return a >= 0.5 * mu ? a : t * t / mu + 0.25 * mu;
}

inline double SmoothAbsDerivKernel(double t, double mu) {
  if (std::abs(t) >= 0.5 * mu) return t > 0.0 ? 1.0 : -1.0;
  return 2.0 * t / mu;
}

// s >= mu/4 > 0, so the logarithm is always defined.
inline double PowKernel(double s, double p) { return p == 1.0 ? s : std::exp(p * std::log(s)); }

inline double PowDerivKernel(double t, double mu, double p) {
  const double ds = SmoothAbsDerivKernel(t, mu);
  if (p == 1.0) return ds;
  if (ds == 0.0) return 0.0;
  return p * std::exp((p - 1.0) * std::log(SmoothAbsKernel(t, mu))) * ds;
}

// s_mu(t + d) - s_mu(t) without forming either value when both sit on the
// same branch.
inline double SmoothAbsChangeKernel(double t, double d, double mu) {
  const double u = t + d;
  const double h = 0.5 * mu;
  const bool inner_t = std::abs(t) < h, inner_u = std::abs(u) < h;
  if (inner_t && inner_u) return d * (2.0 * t + d) / mu;
  if (!inner_t && !inner_u && (t > 0.0) == (u > 0.0)) return t > 0.0 ? d : -d;
  return SmoothAbsKernel(u, mu) - SmoothAbsKernel(t, mu);
}

// s^p - b^p = b^p expm1(p log1p(ds / b)), with b = s_mu(t) >= mu/4.
inline double PowChangeKernel(double t, double d, double mu, double p) {
  const double ds = SmoothAbsChangeKernel(t, d, mu);
  if (p == 1.0) return ds;
  const double b = SmoothAbsKernel(t, mu);
  return PowKernel(b, p) * std::expm1(p * std::log1p(ds / b));
}

}  // namespace

double SmoothAbs(double t, double mu) {
  CheckMu(mu);
  return SmoothAbsKernel(t, mu);
}

double SmoothAbsDeriv(double t, double mu) {
  CheckMu(mu);
  return SmoothAbsDerivKernel(t, mu);
}

double SmoothAbsPow(double t, double mu, double p) {
  CheckMu(mu);
  CheckP(p);
  return PowKernel(SmoothAbsKernel(t, mu), p);
}

double SmoothAbsPowDeriv(double t, double mu, double p) {
  CheckMu(mu);
  CheckP(p);
  return PowDerivKernel(t, mu, p);
}

double AbsPow(double t, double p) {
  CheckP(p);
  const double a = std::abs(t);
  if (a == 0.0) return 0.0;
  return p == 1.0 ? a : std::exp(p * std::log(a));
}

// ---------------------------------------------------------------------------

template <class M>
SmoothedObjective<M>::SmoothedObjective(Eigen::MatrixXd op, double lambda, double p,
                                        SmoothTerm<M> smooth)
    : op_(std::move(op)), lambda_(lambda), p_(p), smooth_(std::move(smooth)) {
  Require(op_.rows() > 0 && op_.cols() > 0, ErrorCode::kInvalidArgument, "empty operator");
  Require(lambda_ >= 0.0 && std::isfinite(lambda_), ErrorCode::kInvalidArgument,
          "lambda must be nonnegative");
  CheckP(p_);
  if (smooth_) {
    Require(static_cast<bool>(smooth_.gradient), ErrorCode::kInvalidArgument,
            "smooth term needs both value and gradient");
  }
  // Only the vector form carries the full-column-rank requirement; the matrix
  // form (entries of A X on Stiefel) is accepted as is.
  if (std::is_same_v<M, Sphere> && p_ < 1.0 && lambda_ > 0.0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(op_);
    Require(qr.rank() == op_.cols(), ErrorCode::kRankDeficient,
            "operator must have full column rank for p < 1");
  }
}

template <class M>
void SmoothedObjective<M>::CheckShape(const Ambient& x) const {
  Require(x.rows() == op_.cols(), ErrorCode::kDimensionMismatch,
          "operator has " + std::to_string(op_.cols()) + " columns, point has " +
              std::to_string(x.rows()) + " rows");
  if constexpr (std::is_same_v<M, Stiefel>) {
    Require(x.rows() == x.cols(), ErrorCode::kDimensionMismatch, "Stiefel point must be square");
  }
}

template <class M>
Eigen::MatrixXd SmoothedObjective<M>::Apply(const Ambient& x) const {
  CheckShape(x);
  return op_ * x;
}

template <class M>
double SmoothedObjective<M>::ValueAt(const Ambient& x, double mu) const {
  CheckMu(mu);
  const Eigen::MatrixXd z = Apply(x);
  double sum = 0.0;
  for (Eigen::Index j = 0; j < z.cols(); ++j)
    for (Eigen::Index i = 0; i < z.rows(); ++i) sum += PowKernel(SmoothAbsKernel(z(i, j), mu), p_);
  double value = lambda_ * sum;
  if (smooth_) value += smooth_.value(x);
  return value;
}

template <class M>
double SmoothedObjective<M>::ValueChangeBy(const Ambient& x, const Ambient& d, double mu) const {
  CheckMu(mu);
  CheckShape(d);
  const Eigen::MatrixXd z = Apply(x);
  const Eigen::MatrixXd dz = op_ * d;
  double sum = 0.0;
  for (Eigen::Index j = 0; j < z.cols(); ++j)
    for (Eigen::Index i = 0; i < z.rows(); ++i) sum += PowChangeKernel(z(i, j), dz(i, j), mu, p_);
  double change = lambda_ * sum;
  if (smooth_) change += smooth_.value(x + d) - smooth_.value(x);
  return change;
}

template <class M>
typename SmoothedObjective<M>::Ambient SmoothedObjective<M>::EuclideanGradientAt(
    const Ambient& x, double mu) const {
  CheckMu(mu);
  Eigen::MatrixXd g = Apply(x);
  for (Eigen::Index j = 0; j < g.cols(); ++j)
    for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = PowDerivKernel(g(i, j), mu, p_);
  Ambient grad = lambda_ * (op_.transpose() * g);
  if (smooth_) grad += smooth_.gradient(x);
  return grad;
}

template <class M>
typename SmoothedObjective<M>::Tangent SmoothedObjective<M>::RiemannianGradient(
    const Point& x, double mu) const {
  return M::Project(x, EuclideanGradient(x, mu));
}

template <class M>
double SmoothedObjective<M>::NonsmoothValue(const Point& x) const {
  const Eigen::MatrixXd z = Apply(x.ambient());
  double sum = 0.0;
  for (Eigen::Index j = 0; j < z.cols(); ++j)
    for (Eigen::Index i = 0; i < z.rows(); ++i) sum += AbsPow(z(i, j), p_);
  double value = lambda_ * sum;
  if (smooth_) value += smooth_.value(x.ambient());
  return value;
}

template class SmoothedObjective<Sphere>;
template class SmoothedObjective<Stiefel>;

}  // namespace rssd
