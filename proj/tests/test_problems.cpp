#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "rssd/problems.hpp"

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

TEST(GenerateFsv, InvariantsOverSizeGrid) {
  std::uint64_t seed = 1;
  for (int n : {5, 10, 15, 20})
    for (int r : {4, 6, 8, 10, 12, 14}) {
      const int m = r * n;
      const FsvInstance inst = GenerateFsv(n, m, seed++);
      ASSERT_EQ(inst.q.rows(), m);
      ASSERT_EQ(inst.q.cols(), n);
      EXPECT_LE((inst.q.transpose() * inst.q - Eigen::MatrixXd::Identity(n, n)).norm(), 1e-10);
      const Eigen::VectorXd e = inst.Planted();
      EXPECT_LE((inst.q * (inst.q.transpose() * e) - e).norm(), 1e-8) << n << "x" << m;
    }
}

TEST(GenerateFsv, DeterministicAndValidated) {
  EXPECT_EQ(GenerateFsv(5, 20, 3).q, GenerateFsv(5, 20, 3).q);
  EXPECT_NE(GenerateFsv(5, 20, 3).q, GenerateFsv(5, 20, 4).q);
  ExpectCode(ErrorCode::kInvalidArgument, [] { GenerateFsv(5, 5, 1); });
  ExpectCode(ErrorCode::kInvalidArgument, [] { GenerateFsv(1, 5, 1); });
}

TEST(GenerateFsv, ReferencePointIsSparse) {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const FsvInstance inst = GenerateFsv(5, 50, 1000 + seed);
    if (FsvSupport(inst, inst.Reference(), 1e-8) == inst.n) ++hits;
    EXPECT_EQ(FsvSuccess(inst, inst.Reference(), 1e-8),
              FsvSupport(inst, inst.Reference(), 1e-8) == inst.n);
  }
  EXPECT_GE(hits, 49);
}

TEST(FsvSuccess, Examples) {
  const FsvInstance inst = GenerateFsv(5, 20, 6);
  EXPECT_TRUE(FsvSuccess(inst, inst.Reference(), 1e-8));

  // a direction orthogonal to Q^T e gives a dense image
  Rng rng = MakeRng(2);
  const Eigen::VectorXd r = inst.Reference().ambient();
  Eigen::VectorXd v = GaussianMatrix(5, 1, rng).col(0);
  v -= r.dot(v) * r;
  const SpherePoint orth = SpherePoint::Normalize(v);
  EXPECT_FALSE(FsvSuccess(inst, orth, 1e-8));
  EXPECT_GT(FsvSupport(inst, orth, 1e-8), inst.n);

  const double big = (inst.q * r).cwiseAbs().maxCoeff() * 2;
  EXPECT_EQ(FsvSupport(inst, inst.Reference(), big), 0);
  EXPECT_FALSE(FsvSuccess(inst, inst.Reference(), big));
}

TEST(TruncatedNnz, Examples) {
  EXPECT_EQ(TruncatedNnz(Eigen::Vector3d(1e-9, 0.5, -2), 1e-8), 2);
  EXPECT_EQ(TruncatedNnz(Eigen::VectorXd::Zero(7), 1e-3), 0);
  const Eigen::Vector4d v(0.0, 1e-300, -3.0, 0.0);
  EXPECT_EQ(TruncatedNnz(v, std::numeric_limits<double>::denorm_min()), 2);
  // entries equal to tau are kept: only |v| < tau is zeroed
  EXPECT_EQ(TruncatedNnz(Eigen::Vector2d(1e-5, -1e-5), 1e-5), 2);
  EXPECT_EQ(TruncatedNnz(Eigen::Matrix2d::Identity(), 0.5), 2);
}

TEST(GenerateOdl, DefaultSampleCount) {
  EXPECT_EQ(OdlSampleCount(30), 1643);
  EXPECT_EQ(OdlSampleCount(10), 316);
  const OdlInstance inst = GenerateOdl(30, 5);
  EXPECT_EQ(inst.m, 1643);
  EXPECT_EQ(inst.y.rows(), 30);
  EXPECT_EQ(inst.y.cols(), 1643);
  EXPECT_LE((inst.x_star.transpose() * inst.x_star - Eigen::MatrixXd::Identity(30, 30)).norm(),
            1e-10);
  EXPECT_EQ(inst.y, inst.x_star * inst.s_star);

  const double nm = 30.0 * 1643.0;
  const double zeros = static_cast<double>((inst.s_star.array() == 0.0).count()) / nm;
  EXPECT_NEAR(zeros, 0.5, 3 * std::sqrt(0.25 / nm));

  const Eigen::MatrixXd yx = inst.y.transpose() * inst.x_star;
  EXPECT_LE((yx - inst.s_star.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  ExpectCode(ErrorCode::kInvalidArgument, [] { GenerateOdl(1, 1); });
}

TEST(SparsityLevel, Examples) {
  const OdlInstance inst = GenerateOdl(10, 3);
  const StiefelPoint truth(inst.x_star);
  const double s = SparsityLevel(inst, truth, 1e-8);
  EXPECT_EQ(s, GroundTruthSparsity(inst, 1e-8));
  EXPECT_NEAR(s, 0.5, 0.05);
  const double exact = static_cast<double>((inst.s_star.array() == 0.0).count()) / inst.s_star.size();
  EXPECT_EQ(s, exact);

  Rng rng = MakeRng(4);
  EXPECT_LT(SparsityLevel(inst, Stiefel::Random(10, rng), 1e-8), 0.01);
  EXPECT_EQ(SparsityLevel(inst, truth, std::numeric_limits<double>::infinity()), 1.0);
}

TEST(InstanceIo, RoundTrip) {
  const FsvInstance f = GenerateFsv(4, 13, 99);
  std::stringstream fs;
  WriteInstance(fs, f, 1e-6);
  double tau = 0.0;
  const Instance back = ReadInstance(fs, &tau);
  ASSERT_TRUE(std::holds_alternative<FsvInstance>(back));
  const auto& g = std::get<FsvInstance>(back);
  EXPECT_EQ(g.q, f.q);
  EXPECT_EQ(g.seed, f.seed);
  EXPECT_EQ(tau, 1e-6);

  const OdlInstance o = GenerateOdl(3, 8, 0.5, 11);
  const auto path = std::filesystem::temp_directory_path() / "rssd_odl_roundtrip.txt";
  SaveInstance(path.string(), o, 1e-4);
  const Instance ob = LoadInstance(path.string());
  std::filesystem::remove(path);
  ASSERT_TRUE(std::holds_alternative<OdlInstance>(ob));
  const auto& p = std::get<OdlInstance>(ob);
  EXPECT_EQ(p.y, o.y);
  EXPECT_EQ(p.s_star, o.s_star);
  EXPECT_EQ(p.x_star, o.x_star);
  EXPECT_EQ(p.m, 11);
}

TEST(InstanceIo, MalformedInputIsIoError) {
  std::stringstream junk("not an instance");
  ExpectCode(ErrorCode::kIo, [&] { ReadInstance(junk); });

  std::stringstream good;
  WriteInstance(good, GenerateFsv(3, 5, 1), 1e-8);
  std::string text = good.str();
  text.resize(text.size() / 2);
  std::stringstream cut(text);
  ExpectCode(ErrorCode::kIo, [&] { ReadInstance(cut); });

  std::stringstream badnum("rssd-instance 1\nkind fsv\nn x\n");
  ExpectCode(ErrorCode::kIo, [&] { ReadInstance(badnum); });
  ExpectCode(ErrorCode::kIo, [] { LoadInstance("/nonexistent/dir/instance.txt"); });
}

}  // namespace
}  // namespace rssd
