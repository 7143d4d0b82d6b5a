#include "rssd/problems.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace rssd {
namespace {

constexpr int kMaxRegenerations = 16;

void WriteMatrix(std::ostream& out, const char* name, const Eigen::MatrixXd& a) {
  out << "matrix " << name << ' ' << a.rows() << ' ' << a.cols() << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", a(i, j));
      if (j) out << ' ';
      out << buf;
    }
    out << '\n';
  }
}

std::string Expect(std::istream& in, const std::string& key) {
  std::string word;
  Require(static_cast<bool>(in >> word) && word == key, ErrorCode::kIo,
          "instance file: expected '" + key + "', got '" + word + "'");
  std::string value;
  Require(static_cast<bool>(in >> value), ErrorCode::kIo, "instance file: missing value for " + key);
  return value;
}

Eigen::MatrixXd ReadMatrix(std::istream& in, const std::string& name) {
  std::string word, got;
  Eigen::Index rows = 0, cols = 0;
  Require(static_cast<bool>(in >> word >> got >> rows >> cols) && word == "matrix" && got == name,
          ErrorCode::kIo, "instance file: expected matrix " + name);
  Require(rows > 0 && cols > 0, ErrorCode::kIo, "instance file: bad shape for " + name);
  Eigen::MatrixXd a(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      Require(static_cast<bool>(in >> a(i, j)), ErrorCode::kIo,
              "instance file: truncated matrix " + name);
  return a;
}

}  // namespace

Eigen::VectorXd FsvInstance::Planted() const {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
  e.head(n).setOnes();
  return e;
}

SpherePoint FsvInstance::Reference() const { return SpherePoint::Normalize(q.transpose() * Planted()); }

FsvInstance GenerateFsv(int n, int m, std::uint64_t seed) {
  Require(n >= 2 && m > n, ErrorCode::kInvalidArgument,
          "FSV needs m > n >= 2, got n=" + std::to_string(n) + " m=" + std::to_string(m));
  Rng rng = MakeRng(seed);
  FsvInstance inst;
  inst.n = n;
  inst.m = m;
  inst.seed = seed;
  for (int attempt = 0;; ++attempt) {
    Eigen::MatrixXd basis(m, n);
    basis.col(0) = inst.Planted();
    basis.rightCols(n - 1) = GaussianMatrix(m, n - 1, rng);
    try {
      inst.q = PositiveQFactor(basis);
      return inst;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kRankDeficient || attempt + 1 >= kMaxRegenerations) throw;
    }
  }
}

int OdlSampleCount(int n) {
  return static_cast<int>(std::floor(10.0 * std::pow(static_cast<double>(n), 1.5)));
}

OdlInstance GenerateOdl(int n, std::uint64_t seed, double theta, int m) {
  Require(n >= 2, ErrorCode::kInvalidArgument, "ODL needs n >= 2");
  Require(theta > 0.0 && theta <= 1.0, ErrorCode::kInvalidArgument,
          "Bernoulli parameter must lie in (0, 1]");
  if (m < 0) m = OdlSampleCount(n);
  Require(m >= 1, ErrorCode::kInvalidArgument, "ODL needs m >= 1");

  Rng rng = MakeRng(seed);
  OdlInstance inst;
  inst.n = n;
  inst.m = m;
  inst.theta = theta;
  inst.seed = seed;
  for (int attempt = 0;; ++attempt) {
    try {
      inst.x_star = PositiveQFactor(GaussianMatrix(n, n, rng));
      break;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kRankDeficient || attempt + 1 >= kMaxRegenerations) throw;
    }
  }
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  inst.s_star.resize(n, m);
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < n; ++i) {
      const bool active = uniform(rng) < theta;
      const double g = normal(rng);
      inst.s_star(i, j) = active ? g : 0.0;
    }
  }
  inst.y = inst.x_star * inst.s_star;
  return inst;
}

SmoothedObjective<Sphere> MakeFsvObjective(const FsvInstance& inst, double p) {
  return SmoothedObjective<Sphere>(inst.q, 1.0, p);
}

SmoothedObjective<Stiefel> MakeOdlObjective(const OdlInstance& inst, double p) {
  return SmoothedObjective<Stiefel>(inst.y.transpose(), 1.0 / inst.m, p);
}

long FsvSupport(const FsvInstance& inst, const SpherePoint& x, double tau) {
  Require(x.dim() == inst.n, ErrorCode::kDimensionMismatch, "FSV point dimension");
  return TruncatedNnz(inst.q * x.ambient(), tau);
}

bool FsvSuccess(const FsvInstance& inst, const SpherePoint& x, double tau) {
  return FsvSupport(inst, x, tau) == inst.n;
}

double SparsityLevel(const OdlInstance& inst, const StiefelPoint& x, double tau) {
  Require(x.dim() == inst.n, ErrorCode::kDimensionMismatch, "ODL point dimension");
  const Eigen::MatrixXd z = inst.y.transpose() * x.ambient();
  const double total = static_cast<double>(z.size());
  return (total - static_cast<double>(TruncatedNnz(z, tau))) / total;
}

double GroundTruthSparsity(const OdlInstance& inst, double tau) {
  const double total = static_cast<double>(inst.s_star.size());
  return (total - static_cast<double>(TruncatedNnz(inst.s_star, tau))) / total;
}

// ---------------------------------------------------------------------------

void WriteInstance(std::ostream& out, const Instance& inst, double default_tau) {
  char tau[32];
  std::snprintf(tau, sizeof tau, "%.17g", default_tau);
  out << "rssd-instance 1\n";
  if (const auto* f = std::get_if<FsvInstance>(&inst)) {
    out << "kind fsv\nn " << f->n << "\nm " << f->m << "\nseed " << f->seed << "\ntau " << tau
        << '\n';
    WriteMatrix(out, "q", f->q);
  } else {
    const auto& o = std::get<OdlInstance>(inst);
    char theta[32];
    std::snprintf(theta, sizeof theta, "%.17g", o.theta);
    out << "kind odl\nn " << o.n << "\nm " << o.m << "\nseed " << o.seed << "\ntau " << tau
        << "\ntheta " << theta << '\n';
    WriteMatrix(out, "x_star", o.x_star);
    WriteMatrix(out, "s_star", o.s_star);
    WriteMatrix(out, "y", o.y);
  }
}

namespace {

Instance ReadInstanceFields(std::istream& in, double* default_tau) {
  Require(Expect(in, "rssd-instance") == "1", ErrorCode::kIo, "unsupported instance version");
  const std::string kind = Expect(in, "kind");
  const int n = std::stoi(Expect(in, "n"));
  const int m = std::stoi(Expect(in, "m"));
  const std::uint64_t seed = std::stoull(Expect(in, "seed"));
  const double tau = std::stod(Expect(in, "tau"));
  if (default_tau) *default_tau = tau;

  if (kind == "fsv") {
    FsvInstance f;
    f.n = n;
    f.m = m;
    f.seed = seed;
    f.q = ReadMatrix(in, "q");
    Require(f.q.rows() == m && f.q.cols() == n, ErrorCode::kIo, "instance file: q shape");
    return f;
  }
  Require(kind == "odl", ErrorCode::kIo, "instance file: unknown kind '" + kind + "'");
  OdlInstance o;
  o.n = n;
  o.m = m;
  o.seed = seed;
  o.theta = std::stod(Expect(in, "theta"));
  o.x_star = ReadMatrix(in, "x_star");
  o.s_star = ReadMatrix(in, "s_star");
  o.y = ReadMatrix(in, "y");
  Require(o.x_star.rows() == n && o.x_star.cols() == n && o.s_star.rows() == n &&
              o.s_star.cols() == m && o.y.rows() == n && o.y.cols() == m,
          ErrorCode::kIo, "instance file: ODL matrix shapes");
  return o;
}

}  // namespace

Instance ReadInstance(std::istream& in, double* default_tau) {
  try {
    return ReadInstanceFields(in, default_tau);
  } catch (const std::logic_error& e) {  // stoi/stod on a malformed field
    throw Error(ErrorCode::kIo, std::string("instance file: bad number (") + e.what() + ")");
  }
}

void SaveInstance(const std::string& path, const Instance& inst, double default_tau) {
  std::ofstream out(path);
  Require(static_cast<bool>(out), ErrorCode::kIo, "cannot open " + path + " for writing");
  WriteInstance(out, inst, default_tau);
  Require(static_cast<bool>(out), ErrorCode::kIo, "write failed: " + path);
}

Instance LoadInstance(const std::string& path, double* default_tau) {
  std::ifstream in(path);
  Require(static_cast<bool>(in), ErrorCode::kIo, "cannot open " + path);
  return ReadInstance(in, default_tau);
}

}  // namespace rssd
