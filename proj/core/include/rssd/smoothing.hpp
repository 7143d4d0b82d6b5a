#pragma once

#include <functional>

#include <Eigen/Dense>

#include "rssd/manifolds.hpp"

namespace rssd {

// Uniform smoothing of |t|:
//   s_mu(t) = |t|               if |t| >= mu/2
//           = t^2/mu + mu/4     otherwise.
// It satisfies |t| <= s_mu(t) <= |t| + mu/4 and s_mu(t) >= mu/4 > 0.
double SmoothAbs(double t, double mu);
double SmoothAbsDeriv(double t, double mu);

// (s_mu(t))^p for p in (0, 1] and its derivative p s^{p-1} s'.
double SmoothAbsPow(double t, double mu, double p);
double SmoothAbsPowDeriv(double t, double mu, double p);

/// |t|^p, with 0^p = 0.
double AbsPow(double t, double p);

/// Optional differentiable term f_hat of the composite objective.
template <class M>
struct SmoothTerm {
  std::function<double(const typename M::Ambient&)> value;
  std::function<typename M::Ambient(const typename M::Ambient&)> gradient;

  explicit operator bool() const { return static_cast<bool>(value); }
};

/// f(x)       = f_hat(x) + lambda * sum_i |(B x)_i|^p
/// f~(x, mu)  = f_hat(x) + lambda * sum_i (s_mu((B x)_i))^p
///
/// B acts by left multiplication, B x = A x. For a sphere point x is a vector
/// and B = A; for a Stiefel point x is a matrix and the sum runs over every
/// entry of A X, which is the vectorized operator (I kron A) without ever
/// forming it.
template <class M>
class SmoothedObjective {
 public:
  using Point = typename M::Point;
  using Ambient = typename M::Ambient;
  using Tangent = typename M::Tangent;

  /// Requires lambda >= 0, p in (0, 1], and on the sphere A of full column
  /// rank when p < 1.
  SmoothedObjective(Eigen::MatrixXd op, double lambda, double p, SmoothTerm<M> smooth = {});

  double Value(const Point& x, double mu) const { return ValueAt(x.ambient(), mu); }
  /// f~ at an arbitrary ambient point; finite-difference oracles use this.
  double ValueAt(const Ambient& x, double mu) const;

  /// f~(y, mu) - f~(x, mu), summed term by term from A x and A (y - x) so
  /// that decreases far below the rounding error of f~ itself stay visible.
  double ValueChange(const Point& x, const Point& y, double mu) const {
    return ValueChangeAt(x.ambient(), y.ambient(), mu);
  }
  double ValueChangeAt(const Ambient& x, const Ambient& y, double mu) const {
    return ValueChangeBy(x, y - x, mu);
  }
  /// f~(x + d, mu) - f~(x, mu) for a displacement d known more accurately
  /// than the difference of two stored points.
  double ValueChangeBy(const Ambient& x, const Ambient& d, double mu) const;

  Ambient EuclideanGradient(const Point& x, double mu) const {
    return EuclideanGradientAt(x.ambient(), mu);
  }
  Ambient EuclideanGradientAt(const Ambient& x, double mu) const;

  /// Proj_{T_x M} of the Euclidean gradient.
  Tangent RiemannianGradient(const Point& x, double mu) const;

  /// The original nonsmooth f.
  double NonsmoothValue(const Point& x) const;

  /// A x, the argument of the sparsity term.
  Eigen::MatrixXd Apply(const Ambient& x) const;

  const Eigen::MatrixXd& op() const { return op_; }
  double lambda() const { return lambda_; }
  double p() const { return p_; }
  /// Number of scalar terms in the sum, rows(A) * cols(x).
  Eigen::Index NumTerms(const Ambient& x) const { return op_.rows() * x.cols(); }

 private:
  void CheckShape(const Ambient& x) const;

  Eigen::MatrixXd op_;
  double lambda_;
  double p_;
  SmoothTerm<M> smooth_;
};

extern template class SmoothedObjective<Sphere>;
extern template class SmoothedObjective<Stiefel>;

}  // namespace rssd
