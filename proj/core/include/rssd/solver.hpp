#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rssd/manifolds.hpp"
#include "rssd/smoothing.hpp"

namespace rssd {

/// Parameters of the smoothing steepest-descent loop. Defaults are the
/// experiment settings: mu0 = 1, delta0 = 0.1, theta_mu = theta_delta = 0.5,
/// stop once mu < 1e-6 and delta < 1e-4, at most 1000 iterations.
struct SolverConfig {
  double mu0 = 1.0;
  double delta0 = 0.1;
  double theta_mu = 0.5;
  double theta_delta = 0.5;
  double beta = 0.5;
  double alpha_bar = 1.0;
  double sigma = 1e-4;
  // Algorithm-level stop: ||grad|| <= delta_opt and mu <= mu_opt. Zero disables it.
  double mu_opt = 0.0;
  double delta_opt = 0.0;
  // Schedule stop: mu < mu_stop and delta < delta_stop, checked before each step.
  std::optional<double> mu_stop = 1e-6;
  std::optional<double> delta_stop = 1e-4;
  int max_iters = 1000;
  int max_backtracks = 50;
  // Wall-clock budget; unset means unlimited.
  std::optional<double> max_seconds;
  bool record_history = true;

  /// Throws kInvalidArgument on any out-of-range field.
  void Validate() const;
};

struct SchedulePair {
  double theta_mu;
  double theta_delta;
};

/// The five (theta_mu, theta_delta) schedules searched by the grid variant.
inline constexpr SchedulePair kDefaultScheduleGrid[] = {
    {0.5, 0.5}, {0.1, 0.5}, {0.5, 0.1}, {0.8, 0.2}, {0.2, 0.8}};

enum class StepEvent { kShrink, kDescend, kStop };
// kAborted marks a run cut short by a step error (see SolveAborted).
enum class SolveStatus { kConvergedOpt, kConvergedSchedule, kMaxIters, kTimeBudget, kAborted };

std::string_view ToString(StepEvent event);
std::string_view ToString(SolveStatus status);

struct IterationRecord {
  StepEvent event;
  double f_smoothed;  // f~(x_l, mu_l) at the start of the step
  double grad_norm;   // ||grad f~(x_l, mu_l)||
  double mu;          // mu_l
  double delta;       // delta_l
  double step = 0.0;  // accepted t_l (descend only)
  int backtracks = 0;
  double change = 0.0;  // f~(x_{l+1}, mu_l) - f~(x_l, mu_l), descend only
};

template <class M>
struct SolverState {
  typename M::Point x;
  double mu = 0.0;
  double delta = 0.0;
  int iter = 0;
  int shrinks = 0;
  bool stopped = false;
  // Scalars of the most recent step, kept even when history is off.
  std::optional<IterationRecord> last{};
  std::vector<IterationRecord> history{};

  static SolverState Initial(typename M::Point x0, const SolverConfig& config) {
    return SolverState{.x = std::move(x0), .mu = config.mu0, .delta = config.delta0};
  }
};

template <class M>
struct SolveResult {
  typename M::Point x;
  double f = 0.0;           // nonsmooth objective at x
  double f_smoothed = 0.0;  // f~(x, mu)
  double mu = 0.0;
  double delta = 0.0;
  double grad_norm = 0.0;   // ||grad f~(x, mu)||
  SolveStatus status = SolveStatus::kMaxIters;
  int iterations = 0;
  int shrinks = 0;
  double seconds = 0.0;
  std::vector<IterationRecord> history{};
  std::string error{};  // message of the step error, kAborted only
};

/// Raised by RssdRun when a step throws. Carries the run up to the last
/// accepted iterate, with status kAborted.
template <class M>
class SolveAborted : public Error {
 public:
  SolveAborted(const Error& cause, SolveResult<M> partial)
      : Error(cause), partial_(std::move(partial)) {}

  const SolveResult<M>& partial() const noexcept { return partial_; }

 private:
  SolveResult<M> partial_;
};

struct LineSearchParams {
  double beta = 0.5;
  double alpha_bar = 1.0;
  double sigma = 1e-4;
  int max_backtracks = 50;
};

template <class M>
struct ArmijoResult {
  double step;  // beta^m * alpha_bar
  int backtracks;  // m
  double value;  // f~(R_x(step * eta), mu)
  double change;  // value - f~(x, mu), evaluated term by term
  typename M::Point next;
};

/// Backtracking along the retracted curve t -> R_x(t eta): returns the first
/// t = beta^m alpha_bar, m = 0, 1, ..., with
///   f~(R_x(t eta), mu) - f~(x, mu) <= -sigma t ||grad||^2,
/// with the left side from SmoothedObjective::ValueChange.
/// `eta` must be the negative Riemannian gradient at its base point and
/// `f_x` the value f~(x, mu). Throws kInvalidArgument for a zero direction and
/// BacktrackExhausted once m exceeds max_backtracks.
template <class M>
ArmijoResult<M> ArmijoSearch(const SmoothedObjective<M>& obj, const typename M::Tangent& eta,
                             double mu, double f_x, const LineSearchParams& params);

/// One iteration: stop, shrink (mu, delta) geometrically, or take an Armijo
/// step. Exactly one branch runs and is appended to the history.
template <class M>
SolverState<M> RssdStep(SolverState<M> state, const SmoothedObjective<M>& obj,
                        const SolverConfig& config);

template <class M>
using Observer = std::function<void(const SolverState<M>&)>;

/// Iterates RssdStep from x0 until one of the termination rules fires. The
/// observer, when set, sees the state after every iteration. A step error
/// (e.g. BacktrackExhausted) is rethrown as SolveAborted<M>.
template <class M>
SolveResult<M> RssdRun(const SmoothedObjective<M>& obj, const typename M::Point& x0,
                       const SolverConfig& config, const Observer<M>& observer = {});

template <class M>
struct GridResult {
  std::vector<SchedulePair> schedules;
  std::vector<SolveResult<M>> runs;
  std::vector<double> metrics;
  std::size_t best = 0;

  const SolveResult<M>& selected() const { return runs[best]; }
};

/// Lower is better.
template <class M>
using SelectionMetric = std::function<double(const SolveResult<M>&)>;

/// Runs once per schedule from the same x0 and selects the run with the
/// smallest metric, breaking ties by the final nonsmooth objective. An aborted
/// run stays in the grid with its partial result.
template <class M>
GridResult<M> RssdGrid(const SmoothedObjective<M>& obj, const typename M::Point& x0,
                       const SolverConfig& base_config, std::span<const SchedulePair> grid,
                       const SelectionMetric<M>& metric);

#define RSSD_DECLARE_SOLVER(M)                                                                 \
  extern template ArmijoResult<M> ArmijoSearch<M>(const SmoothedObjective<M>&,                 \
                                                  const M::Tangent&, double, double,           \
                                                  const LineSearchParams&);                    \
  extern template SolverState<M> RssdStep<M>(SolverState<M>, const SmoothedObjective<M>&,      \
                                             const SolverConfig&);                             \
  extern template SolveResult<M> RssdRun<M>(const SmoothedObjective<M>&, const M::Point&,      \
                                            const SolverConfig&, const Observer<M>&);          \
  extern template GridResult<M> RssdGrid<M>(const SmoothedObjective<M>&, const M::Point&,      \
                                            const SolverConfig&, std::span<const SchedulePair>, \
                                            const SelectionMetric<M>&);

RSSD_DECLARE_SOLVER(Sphere)
RSSD_DECLARE_SOLVER(Stiefel)

#undef RSSD_DECLARE_SOLVER

}  // namespace rssd
