#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rssd/experiment.hpp"

namespace rssd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;

// Settings that every flag and config key maps onto. Unset fields fall back
// to the per-subcommand defaults in Resolve().
struct RunSettings {
  std::optional<std::vector<int>> n;
  std::optional<std::vector<int>> m;
  std::optional<std::vector<double>> m_ratio;
  std::optional<std::vector<double>> p;
  std::optional<std::vector<double>> tau;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::optional<bool> grid;
  std::optional<int> budget_iters;
  std::optional<double> budget_seconds;
  std::optional<std::string> out;
  std::optional<int> jobs;
  std::optional<std::string> init;
  std::optional<int> trajectory_every;
  std::optional<bool> keep_points;
  std::optional<bool> save_instances;
  std::optional<bool> scale_steps;

  std::optional<double> mu0, delta0, theta_mu, theta_delta, beta, alpha_bar, sigma;
  std::optional<double> mu_stop, delta_stop;
  std::optional<int> max_iters, max_backtracks;

  /// Fields set in `over` replace those here.
  void MergeFrom(const RunSettings& over);
};

/// Reads a TOML file whose keys mirror the flags (dashes become
/// underscores); solver keys may also sit in a [solver] table. Unknown keys
/// and type mismatches throw kConfig; unreadable files throw kIo.
RunSettings LoadSettingsFile(const std::string& path);
RunSettings ParseSettings(std::string_view toml_text, const std::string& source = "<string>");

struct Resolved {
  ExperimentConfig config;
  std::string out_dir;
  bool save_instances = false;
};

/// Applies defaults for the subcommand and builds a validated config.
Resolved Resolve(ProblemKind kind, const RunSettings& settings);

}  // namespace rssd::cli
