#include <cmath>

#include <gtest/gtest.h>

#include "rssd/problems.hpp"
#include "rssd/smoothing.hpp"

namespace rssd {
namespace {

template <class F>
void ExpectCode(ErrorCode code, F&& f) {
  try {
    f();
    ADD_FAILURE() << "expected " << ToString(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

// long double reference of s_mu, written from the definition
long double RefSmooth(long double t, long double mu) {
  const long double a = std::fabs(t);
  return a >= mu / 2 ? a : t * t / mu + mu / 4;
}

TEST(SmoothAbs, Values) {
  EXPECT_EQ(SmoothAbs(2.0, 1.0), 2.0);
  EXPECT_EQ(SmoothAbs(0.0, 1.0), 0.25);
  EXPECT_DOUBLE_EQ(SmoothAbs(0.25, 1.0), 0.3125);
  // both branches meet at |t| = mu/2
  EXPECT_DOUBLE_EQ(SmoothAbs(0.5, 1.0), 0.5);
  EXPECT_NEAR(SmoothAbs(0.5 - 1e-12, 1.0), 0.5, 1e-11);
  EXPECT_EQ(SmoothAbs(-0.3, 0.2), SmoothAbs(0.3, 0.2));
  EXPECT_EQ(SmoothAbs(-0.05, 0.2), SmoothAbs(0.05, 0.2));
}

TEST(SmoothAbs, Derivatives) {
  EXPECT_EQ(SmoothAbsDeriv(0.0, 0.3), 0.0);
  EXPECT_DOUBLE_EQ(SmoothAbsDeriv(0.25, 1.0), 0.5);
  EXPECT_EQ(SmoothAbsDeriv(-3.0, 1.0), -1.0);
  EXPECT_EQ(SmoothAbsDeriv(-0.1, 1.0), -SmoothAbsDeriv(0.1, 1.0));
}

TEST(SmoothAbs, RejectsNonpositiveMu) {
  ExpectCode(ErrorCode::kInvalidArgument, [] { SmoothAbs(1.0, 0.0); });
  ExpectCode(ErrorCode::kInvalidArgument, [] { SmoothAbsDeriv(1.0, -1.0); });
  ExpectCode(ErrorCode::kInvalidArgument, [] { SmoothAbsPow(1.0, 0.0, 0.5); });
  ExpectCode(ErrorCode::kInvalidArgument, [] { SmoothAbsPow(1.0, 1.0, 0.0); });
  ExpectCode(ErrorCode::kInvalidArgument, [] { SmoothAbsPowDeriv(1.0, 1.0, 1.5); });
}

TEST(SmoothAbsPow, Values) {
  EXPECT_DOUBLE_EQ(SmoothAbsPow(0.0, 1.0, 0.5), 0.5);
  EXPECT_EQ(SmoothAbsPowDeriv(0.0, 0.7, 0.3), 0.0);
  EXPECT_NEAR(SmoothAbsPowDeriv(2.0, 1.0, 0.5), 0.353553, 1e-6);
  EXPECT_NEAR(SmoothAbsPowDeriv(2.0, 1.0, 0.5), 0.5 / std::sqrt(2.0), 1e-15);
  // p = 1 reduces to s_mu
  EXPECT_DOUBLE_EQ(SmoothAbsPow(0.1, 1.0, 1.0), SmoothAbs(0.1, 1.0));
  EXPECT_DOUBLE_EQ(SmoothAbsPowDeriv(0.1, 1.0, 1.0), SmoothAbsDeriv(0.1, 1.0));
}

TEST(SmoothAbsPow, DerivativeMatchesFiniteDifference) {
  const double h = 1e-6;
  for (double p : {1.0, 0.8, 0.5, 0.1})
    for (double mu : {1.0, 0.1})
      for (double t : {-2.0, -0.3, -0.01, 0.0, 0.02, 0.2, 1.7}) {
        if (std::fabs(std::fabs(t) - mu / 2) < 10 * h) continue;
        const double fd = (SmoothAbsPow(t + h, mu, p) - SmoothAbsPow(t - h, mu, p)) / (2 * h);
        EXPECT_NEAR(SmoothAbsPowDeriv(t, mu, p), fd, 1e-7 * (1 + std::fabs(fd)))
            << "p=" << p << " mu=" << mu << " t=" << t;
      }
}

TEST(SmoothAbs, SeamIsC1) {
  // inner slope at mu/2 - e is 1 - 2e/mu, so mu stays well above 2e-3 here
  for (double mu : {1.0, 0.1, 0.01}) {
    EXPECT_NEAR(SmoothAbsDeriv(mu / 2 + 1e-12, mu), 1.0, 1e-9);
    EXPECT_NEAR(SmoothAbsDeriv(mu / 2 - 1e-12, mu), 1.0, 1e-9);
    EXPECT_NEAR(SmoothAbsDeriv(-mu / 2 + 1e-12, mu), -1.0, 1e-9);
    EXPECT_NEAR(SmoothAbsDeriv(-mu / 2 - 1e-12, mu), -1.0, 1e-9);
  }
}

TEST(SmoothAbs, BoundOverGrid) {
  for (double mu : {1.0, 0.5, 0.1, 0.01}) {
    double worst = 0.0;
    for (int k = -5000; k <= 5000; ++k) {
      const double t = k * 1e-3;
      const double gap = SmoothAbs(t, mu) - std::fabs(t);
      EXPECT_GE(gap, -1e-15);
      worst = std::max(worst, gap);
      if (std::fabs(t) >= mu / 2) {
        EXPECT_EQ(gap, 0.0);
      }
    }
    EXPECT_LE(worst, mu / 4 + 1e-14);
    EXPECT_NEAR(SmoothAbs(0.0, mu) - 0.0, mu / 4, 1e-14);
  }
}

TEST(SmoothAbsPow, FixedPointLimit) {
  // for t = 0.7 the derivative is p |t|^{p-1} once mu < 1.4
  for (double p : {0.5, 0.9}) {
    const double exact = p * std::pow(0.7, p - 1);
    EXPECT_NEAR(SmoothAbsPowDeriv(0.7, 1.0, p), exact, 1e-15);
    EXPECT_NEAR(SmoothAbsPowDeriv(-0.7, 1e-6, p), -exact, 1e-15);
    EXPECT_GT(std::fabs(SmoothAbsPowDeriv(0.7, 2.0, p) - exact), 1e-3);
  }
}

// ---- composite objective ------------------------------------------------

Eigen::VectorXd E1(int n) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  v(0) = 1.0;
  return v;
}

TEST(SmoothedObjective, FsvIdentityAtSmallMu) {
  const SmoothedObjective<Sphere> obj(Eigen::MatrixXd::Identity(3, 3), 1.0, 0.5);
  const SpherePoint x(E1(3));
  const double mu = 1e-8;
  EXPECT_NEAR(obj.Value(x, mu), 1.0, 2 * std::pow(mu / 4, 0.5) * 3);
  EXPECT_EQ(obj.NonsmoothValue(x), 1.0);
}

TEST(SmoothedObjective, SmoothingGapBound) {
  Rng rng = MakeRng(8);
  const FsvInstance inst = GenerateFsv(5, 30, 17);
  for (double p : {1.0, 0.5, 0.1}) {
    const auto obj = MakeFsvObjective(inst, p);
    for (double mu : {1.0, 1e-2, 1e-6}) {
      const SpherePoint x = Sphere::Random(5, rng);
      const double gap = std::fabs(obj.Value(x, mu) - obj.NonsmoothValue(x));
      EXPECT_LE(gap, 1.0 * 30 * std::pow(mu / 4, p) * (1 + 1e-12));
    }
  }
}

TEST(SmoothedObjective, OdlAtPlantedDictionary) {
  // Y = X*, so Y^T X* = I and the sum has n unit entries
  const int n = 4;
  Rng rng = MakeRng(21);
  const StiefelPoint xs = Stiefel::Random(n, rng);
  const int m = n;
  const SmoothedObjective<Stiefel> obj(xs.ambient().transpose(), 1.0 / m, 1.0);
  double brute = 0.0;
  const Eigen::MatrixXd yx = xs.ambient().transpose() * xs.ambient();
  for (Eigen::Index i = 0; i < yx.size(); ++i) brute += std::fabs(yx.data()[i]);
  EXPECT_NEAR(obj.Value(xs, 1e-9), brute / m, 1e-8);
  EXPECT_NEAR(obj.Value(xs, 1e-9), static_cast<double>(n) / m, 1e-8);
}

TEST(SmoothedObjective, OuterBranchGradientIsSign) {
  const SmoothedObjective<Sphere> obj(Eigen::MatrixXd::Identity(3, 3), 1.0, 1.0);
  Eigen::VectorXd x(3);
  x << 0.6, -0.48, 0.64;
  const Eigen::VectorXd g = obj.EuclideanGradientAt(x, 0.1);
  EXPECT_EQ(g, Eigen::Vector3d(1, -1, 1));
}

TEST(SmoothedObjective, ZeroLambdaLeavesSmoothTerm) {
  SmoothTerm<Sphere> fhat;
  fhat.value = [](const Eigen::VectorXd& x) { return 0.5 * x.squaredNorm() + x(0); };
  fhat.gradient = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd g = x;
    g(0) += 1.0;
    return g;
  };
  const SmoothedObjective<Sphere> obj(Eigen::MatrixXd::Identity(3, 3), 0.0, 0.5, fhat);
  Eigen::VectorXd x(3);
  x << 0.1, 0.2, -0.3;
  EXPECT_EQ(obj.EuclideanGradientAt(x, 0.5), fhat.gradient(x));
  EXPECT_EQ(obj.ValueAt(x, 0.5), fhat.value(x));
}

TEST(SmoothedObjective, RiemannianGradientIsProjection) {
  // f_hat = -x_1 on the sphere at x = e1: the gradient is parallel to x
  SmoothTerm<Sphere> fhat;
  fhat.value = [](const Eigen::VectorXd& x) { return -x(0); };
  fhat.gradient = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
    g(0) = -1.0;
    return g;
  };
  const SmoothedObjective<Sphere> obj(Eigen::MatrixXd::Identity(3, 3), 0.0, 1.0, fhat);
  EXPECT_LE(obj.RiemannianGradient(SpherePoint(E1(3)), 1.0).norm(), 1e-15);

  Rng rng = MakeRng(4);
  const OdlInstance inst = GenerateOdl(4, 9);
  const auto odl = MakeOdlObjective(inst, 0.5);
  for (int k = 0; k < 10; ++k) {
    const StiefelPoint x = Stiefel::Random(4, rng);
    const auto g = odl.RiemannianGradient(x, 0.1);
    EXPECT_LE(g.norm(), odl.EuclideanGradient(x, 0.1).norm() * (1 + 1e-14));
    EXPECT_LE(Stiefel::TangentResidual(x, g.ambient), 1e-12 * (1 + g.norm()));
  }
}

TEST(SmoothedObjective, NonsmoothValueL1) {
  const FsvInstance inst = GenerateFsv(4, 12, 2);
  const auto obj = MakeFsvObjective(inst, 1.0);
  Rng rng = MakeRng(1);
  const SpherePoint x = Sphere::Random(4, rng);
  EXPECT_NEAR(obj.NonsmoothValue(x), (inst.q * x.ambient()).lpNorm<1>(), 1e-14);
}

TEST(SmoothedObjective, ValueChangeMatchesExtendedPrecision) {
  const FsvInstance inst = GenerateFsv(5, 25, 5);
  Rng rng = MakeRng(31);
  for (double p : {1.0, 0.5}) {
    const auto obj = MakeFsvObjective(inst, p);
    for (double mu : {1.0, 0.05, 1e-4}) {
      const SpherePoint x = Sphere::Random(5, rng);
      for (double t : {1e-1, 1e-4, 1e-9}) {
        const auto dir = Sphere::Project(x, GaussianMatrix(5, 1, rng).col(0));
        const SpherePoint y = Sphere::Retract(dir, t);
        const Eigen::VectorXd zx = inst.q * x.ambient();
        const Eigen::VectorXd zy = inst.q * y.ambient();
        long double ref = 0.0L;
        for (int i = 0; i < zx.size(); ++i)
          ref += std::pow(RefSmooth(zy(i), mu), static_cast<long double>(p)) -
                 std::pow(RefSmooth(zx(i), mu), static_cast<long double>(p));
        const double got = obj.ValueChange(x, y, mu);
        const double scale = std::fabs(static_cast<double>(ref)) + 1e-15;
        EXPECT_NEAR(got, static_cast<double>(ref), 1e-6 * scale + 1e-15)
            << "p=" << p << " mu=" << mu << " t=" << t;
      }
    }
  }
}

TEST(SmoothedObjective, ShapeAndParameterChecks) {
  ExpectCode(ErrorCode::kInvalidArgument,
             [] { SmoothedObjective<Sphere>(Eigen::MatrixXd::Identity(3, 3), -1.0, 0.5); });
  ExpectCode(ErrorCode::kInvalidArgument,
             [] { SmoothedObjective<Sphere>(Eigen::MatrixXd::Identity(3, 3), 1.0, 1.2); });
  const SmoothedObjective<Sphere> obj(Eigen::MatrixXd::Identity(3, 3), 1.0, 0.5);
  ExpectCode(ErrorCode::kDimensionMismatch, [&] { obj.ValueAt(Eigen::VectorXd::Zero(4), 1.0); });
  ExpectCode(ErrorCode::kInvalidArgument, [&] { obj.ValueAt(Eigen::VectorXd::Zero(3), 0.0); });
}

TEST(SmoothedObjective, RankCheckOnSphereOnly) {
  Eigen::MatrixXd b(3, 2);
  b << 1, 2, 2, 4, 3, 6;
  ExpectCode(ErrorCode::kRankDeficient, [&] { SmoothedObjective<Sphere>(b, 1.0, 0.5); });
  EXPECT_NO_THROW(SmoothedObjective<Sphere>(b, 1.0, 1.0));
  // the dictionary learning operator is accepted whatever its rank
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(5, 3);
  y(0, 0) = 1.0;
  EXPECT_NO_THROW(SmoothedObjective<Stiefel>(y, 0.2, 0.5));
}

}  // namespace
}  // namespace rssd
