#include "cli_config.hpp"

#include <climits>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

namespace rssd::cli {
namespace {

[[noreturn]] void ConfigError(const std::string& what) { throw Error(ErrorCode::kConfig, what); }

template <class T>
T Scalar(const toml::node& node, const std::string& key) {
  if constexpr (std::is_same_v<T, bool>) {
    if (auto v = node.value<bool>()) return *v;
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (auto v = node.value<std::string>()) return *v;
  } else if constexpr (std::is_integral_v<T>) {
    if (auto v = node.value<std::int64_t>()) return static_cast<T>(*v);
  } else {
    if (auto v = node.value<double>()) return *v;
  }
  ConfigError("config key '" + key + "' has the wrong type");
}

template <class T>
std::vector<T> List(const toml::node& node, const std::string& key) {
  std::vector<T> out;
  if (const toml::array* arr = node.as_array()) {
    for (const toml::node& item : *arr) out.push_back(Scalar<T>(item, key));
  } else {
    out.push_back(Scalar<T>(node, key));
  }
  return out;
}

template <class T>
void Assign(std::optional<T>& field, const std::optional<T>& over) {
  if (over) field = over;
}

void ReadSolverKey(RunSettings& s, const std::string& key, const toml::node& node) {
  if (key == "mu0") s.mu0 = Scalar<double>(node, key);
  else if (key == "delta0") s.delta0 = Scalar<double>(node, key);
  else if (key == "theta_mu") s.theta_mu = Scalar<double>(node, key);
  else if (key == "theta_delta") s.theta_delta = Scalar<double>(node, key);
  else if (key == "beta") s.beta = Scalar<double>(node, key);
  else if (key == "alpha_bar") s.alpha_bar = Scalar<double>(node, key);
  else if (key == "sigma") s.sigma = Scalar<double>(node, key);
  else if (key == "mu_stop") s.mu_stop = Scalar<double>(node, key);
  else if (key == "delta_stop") s.delta_stop = Scalar<double>(node, key);
  else if (key == "max_iters") s.max_iters = Scalar<int>(node, key);
  else if (key == "max_backtracks") s.max_backtracks = Scalar<int>(node, key);
  else ConfigError("unknown solver key '" + key + "'");
}

}  // namespace

void RunSettings::MergeFrom(const RunSettings& o) {
  Assign(n, o.n);
  Assign(m, o.m);
  Assign(m_ratio, o.m_ratio);
  Assign(p, o.p);
  Assign(tau, o.tau);
  Assign(trials, o.trials);
  Assign(seed, o.seed);
  Assign(grid, o.grid);
  Assign(budget_iters, o.budget_iters);
  Assign(budget_seconds, o.budget_seconds);
  Assign(out, o.out);
  Assign(jobs, o.jobs);
  Assign(init, o.init);
  Assign(trajectory_every, o.trajectory_every);
  Assign(keep_points, o.keep_points);
  Assign(save_instances, o.save_instances);
  Assign(scale_steps, o.scale_steps);
  Assign(mu0, o.mu0);
  Assign(delta0, o.delta0);
  Assign(theta_mu, o.theta_mu);
  Assign(theta_delta, o.theta_delta);
  Assign(beta, o.beta);
  Assign(alpha_bar, o.alpha_bar);
  Assign(sigma, o.sigma);
  Assign(mu_stop, o.mu_stop);
  Assign(delta_stop, o.delta_stop);
  Assign(max_iters, o.max_iters);
  Assign(max_backtracks, o.max_backtracks);
}

RunSettings ParseSettings(std::string_view text, const std::string& source) {
  toml::table table;
  try {
    table = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << source << ": " << e.description() << " (line " << e.source().begin.line << ")";
    ConfigError(os.str());
  }

  RunSettings s;
  for (const auto& [k, node] : table) {
    const std::string key(k.str());
    if (key == "solver") {
      const toml::table* solver = node.as_table();
      if (!solver) ConfigError("'solver' must be a table");
      for (const auto& [sk, snode] : *solver) ReadSolverKey(s, std::string(sk.str()), snode);
    } else if (key == "n") s.n = List<int>(node, key);
    else if (key == "m") s.m = List<int>(node, key);
    else if (key == "m_ratio") s.m_ratio = List<double>(node, key);
    else if (key == "p") s.p = List<double>(node, key);
    else if (key == "tau") s.tau = List<double>(node, key);
    else if (key == "trials") s.trials = Scalar<int>(node, key);
    else if (key == "seed") s.seed = Scalar<std::uint64_t>(node, key);
    else if (key == "grid") s.grid = Scalar<bool>(node, key);
    else if (key == "budget_iters") s.budget_iters = Scalar<int>(node, key);
    else if (key == "budget_seconds") s.budget_seconds = Scalar<double>(node, key);
    else if (key == "out") s.out = Scalar<std::string>(node, key);
    else if (key == "jobs") s.jobs = Scalar<int>(node, key);
    else if (key == "init") s.init = Scalar<std::string>(node, key);
    else if (key == "trajectory_every") s.trajectory_every = Scalar<int>(node, key);
    else if (key == "keep_points") s.keep_points = Scalar<bool>(node, key);
    else if (key == "save_instances") s.save_instances = Scalar<bool>(node, key);
    else if (key == "scale_steps") s.scale_steps = Scalar<bool>(node, key);
    else ReadSolverKey(s, key, node);
  }
  return s;
}

RunSettings LoadSettingsFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseSettings(buf.str(), path);
}

Resolved Resolve(ProblemKind kind, const RunSettings& s) {
  const bool fsv = kind == ProblemKind::kFsv;
  Resolved r;
  ExperimentConfig& c = r.config;
  c.kind = kind;

  const std::vector<int> ns = s.n.value_or(std::vector<int>{fsv ? 5 : 10});
  if (s.m && s.m_ratio) ConfigError("give either m or m_ratio, not both");
  for (int n : ns) {
    if (s.m_ratio) {
      for (double ratio : *s.m_ratio) c.sizes.emplace_back(n, static_cast<int>(std::lround(ratio * n)));
    } else if (s.m) {
      for (int m : *s.m) c.sizes.emplace_back(n, m);
    } else {
      c.sizes.emplace_back(n, fsv ? 50 : -1);
    }
  }

  c.ps = s.p.value_or(fsv ? std::vector<double>{1.0} : std::vector<double>{0.001});
  c.taus = s.tau.value_or(fsv ? std::vector<double>{1e-5, 1e-6, 1e-7, 1e-8}
                              : std::vector<double>{1e-4, 1e-5});
  c.trials = s.trials.value_or(fsv ? 50 : 10);
  c.seed = s.seed.value_or(1);
  c.jobs = s.jobs.value_or(1);
  if (s.grid.value_or(false))
    c.grid.assign(std::begin(kDefaultScheduleGrid), std::end(kDefaultScheduleGrid));

  if (s.init) {
    if (*s.init == "gaussian") c.init = InitDistribution::kGaussian;
    else if (*s.init == "uniform") c.init = InitDistribution::kUniform;
    else ConfigError("init must be 'gaussian' or 'uniform'");
  }

  c.budget_iters = s.budget_iters;
  c.budget_seconds = s.budget_seconds;
  if (!fsv && !c.budget_iters) {
    // A wall-clock budget alone means run until the clock expires.
    c.budget_iters = c.budget_seconds ? INT_MAX : 2000;
  }
  c.trajectory_every = s.trajectory_every.value_or(fsv ? 0 : 10);
  c.keep_points = s.keep_points.value_or(false);
  c.scale_steps = s.scale_steps.value_or(!fsv);

  SolverConfig& sc = c.solver;
  if (s.mu0) sc.mu0 = *s.mu0;
  if (s.delta0) sc.delta0 = *s.delta0;
  if (s.theta_mu) sc.theta_mu = *s.theta_mu;
  if (s.theta_delta) sc.theta_delta = *s.theta_delta;
  if (s.beta) sc.beta = *s.beta;
  if (s.alpha_bar) sc.alpha_bar = *s.alpha_bar;
  if (s.sigma) sc.sigma = *s.sigma;
  if (s.max_iters) sc.max_iters = *s.max_iters;
  if (s.max_backtracks) sc.max_backtracks = *s.max_backtracks;
  // A stop threshold of 0 disables the schedule stop.
  if (s.mu_stop) sc.mu_stop = *s.mu_stop > 0.0 ? std::optional<double>(*s.mu_stop) : std::nullopt;
  if (s.delta_stop)
    sc.delta_stop = *s.delta_stop > 0.0 ? std::optional<double>(*s.delta_stop) : std::nullopt;

  r.out_dir = s.out.value_or("rssd_out");
  r.save_instances = s.save_instances.value_or(false);
  c.Validate();
  return r;
}

}  // namespace rssd::cli
