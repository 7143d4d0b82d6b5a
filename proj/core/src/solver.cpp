#include "rssd/solver.hpp"

#include <chrono>
#include <cmath>
#include <string>

namespace rssd {
namespace {

void RequireRange(bool ok, const char* field, double value) {
  Require(ok, ErrorCode::kInvalidArgument,
          std::string("solver config: ") + field + " out of range (" + std::to_string(value) + ")");
}

bool OpenUnit(double v) { return v > 0.0 && v < 1.0; }

double Elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void SolverConfig::Validate() const {
  RequireRange(mu0 > 0.0 && std::isfinite(mu0), "mu0", mu0);
  RequireRange(delta0 > 0.0 && std::isfinite(delta0), "delta0", delta0);
  RequireRange(OpenUnit(theta_mu), "theta_mu", theta_mu);
  RequireRange(OpenUnit(theta_delta), "theta_delta", theta_delta);
  RequireRange(OpenUnit(beta), "beta", beta);
  RequireRange(alpha_bar > 0.0 && std::isfinite(alpha_bar), "alpha_bar", alpha_bar);
  RequireRange(OpenUnit(sigma), "sigma", sigma);
  RequireRange(mu_opt >= 0.0, "mu_opt", mu_opt);
  RequireRange(delta_opt >= 0.0, "delta_opt", delta_opt);
  if (mu_stop) RequireRange(*mu_stop > 0.0, "mu_stop", *mu_stop);
  if (delta_stop) RequireRange(*delta_stop > 0.0, "delta_stop", *delta_stop);
  RequireRange(max_iters > 0, "max_iters", max_iters);
  RequireRange(max_backtracks > 0, "max_backtracks", max_backtracks);
  if (max_seconds) RequireRange(*max_seconds > 0.0, "max_seconds", *max_seconds);
}

std::string_view ToString(StepEvent event) {
  switch (event) {
    case StepEvent::kShrink: return "shrink";
    case StepEvent::kDescend: return "descend";
    case StepEvent::kStop: return "stop";
  }
  return "?";
}

std::string_view ToString(SolveStatus status) {
  switch (status) {
    case SolveStatus::kConvergedOpt: return "ConvergedOpt";
    case SolveStatus::kConvergedSchedule: return "ConvergedSchedule";
    case SolveStatus::kMaxIters: return "MaxIters";
    case SolveStatus::kTimeBudget: return "TimeBudget";
    case SolveStatus::kAborted: return "Aborted";
  }
  return "?";
}

template <class M>
ArmijoResult<M> ArmijoSearch(const SmoothedObjective<M>& obj, const typename M::Tangent& eta,
                             double mu, double f_x, const LineSearchParams& params) {
  const double grad_sq = eta.ambient.squaredNorm();
  Require(grad_sq > 0.0, ErrorCode::kInvalidArgument, "line search along a zero direction");
  for (int m = 0; m <= params.max_backtracks; ++m) {
    const double t = params.alpha_bar * std::pow(params.beta, m);
    // Compare the change itself, taken along the exact retraction step: late
    // in a run the required decrease is far below the rounding error of f~
    // and of the stored next point.
    const double change = obj.ValueChangeBy(eta.base.ambient(), M::RetractionStep(eta, t), mu);
    if (change <= -params.sigma * t * grad_sq)
      return {t, m, f_x + change, change, M::Retract(eta, t)};
  }
  throw BacktrackExhausted(params.max_backtracks);
}

template <class M>
SolverState<M> RssdStep(SolverState<M> state, const SmoothedObjective<M>& obj,
                        const SolverConfig& config) {
  if (state.stopped) return state;

  typename M::Tangent grad = obj.RiemannianGradient(state.x, state.mu);
  const double grad_norm = grad.norm();
  const double f = obj.Value(state.x, state.mu);
  IterationRecord rec{StepEvent::kDescend, f, grad_norm, state.mu, state.delta};

  if (grad_norm <= config.delta_opt && state.mu <= config.mu_opt) {
    rec.event = StepEvent::kStop;
    state.stopped = true;
  } else if (grad_norm <= state.delta) {
    rec.event = StepEvent::kShrink;
    ++state.shrinks;
    state.mu = config.mu0 * std::pow(config.theta_mu, state.shrinks);
    state.delta = config.delta0 * std::pow(config.theta_delta, state.shrinks);
  } else {
    grad.ambient = -grad.ambient;
    const LineSearchParams ls{config.beta, config.alpha_bar, config.sigma, config.max_backtracks};
    ArmijoResult<M> found = ArmijoSearch(obj, grad, state.mu, f, ls);
    rec.step = found.step;
    rec.backtracks = found.backtracks;
    rec.change = found.change;
    state.x = std::move(found.next);
  }

  ++state.iter;
  state.last = rec;
  if (config.record_history) state.history.push_back(rec);
  return state;
}

template <class M>
SolveResult<M> RssdRun(const SmoothedObjective<M>& obj, const typename M::Point& x0,
                       const SolverConfig& config, const Observer<M>& observer) {
  config.Validate();
  obj.Apply(x0.ambient());  // shape check

  const auto start = std::chrono::steady_clock::now();
  SolverState<M> state = SolverState<M>::Initial(x0, config);
  SolveStatus status = SolveStatus::kMaxIters;

  auto finish = [&](SolveStatus final_status) {
    SolveResult<M> result{.x = state.x};
    result.f = obj.NonsmoothValue(state.x);
    result.f_smoothed = obj.Value(state.x, state.mu);
    result.mu = state.mu;
    result.delta = state.delta;
    result.grad_norm = obj.RiemannianGradient(state.x, state.mu).norm();
    result.status = final_status;
    result.iterations = state.iter;
    result.shrinks = state.shrinks;
    result.seconds = Elapsed(start);
    result.history = std::move(state.history);
    return result;
  };

  for (;;) {
    if (config.mu_stop && config.delta_stop && state.mu < *config.mu_stop &&
        state.delta < *config.delta_stop) {
      status = SolveStatus::kConvergedSchedule;
      break;
    }
    if (state.iter >= config.max_iters) {
      status = SolveStatus::kMaxIters;
      break;
    }
    if (config.max_seconds && Elapsed(start) >= *config.max_seconds) {
      status = SolveStatus::kTimeBudget;
      break;
    }
    // Step on a copy without the history so a throw leaves `state` intact.
    std::vector<IterationRecord> history = std::move(state.history);
    state.history.clear();
    try {
      state = RssdStep(state, obj, config);
      history.insert(history.end(), state.history.begin(), state.history.end());
      state.history = std::move(history);
    } catch (const Error& e) {
      state.history = std::move(history);
      SolveResult<M> partial = finish(SolveStatus::kAborted);
      partial.error = e.what();
      throw SolveAborted<M>(e, std::move(partial));
    }
    if (observer) observer(state);
    if (state.stopped) {
      status = SolveStatus::kConvergedOpt;
      break;
    }
  }
  return finish(status);
}

template <class M>
GridResult<M> RssdGrid(const SmoothedObjective<M>& obj, const typename M::Point& x0,
                       const SolverConfig& base_config, std::span<const SchedulePair> grid,
                       const SelectionMetric<M>& metric) {
  Require(!grid.empty(), ErrorCode::kInvalidArgument, "schedule grid is empty");
  Require(static_cast<bool>(metric), ErrorCode::kInvalidArgument, "selection metric not set");
  GridResult<M> out;
  for (const SchedulePair& pair : grid) {
    SolverConfig config = base_config;
    config.theta_mu = pair.theta_mu;
    config.theta_delta = pair.theta_delta;
    out.schedules.push_back(pair);
    try {
      out.runs.push_back(RssdRun(obj, x0, config));
    } catch (const SolveAborted<M>& e) {
      out.runs.push_back(e.partial());
    }
    out.metrics.push_back(metric(out.runs.back()));
  }
  for (std::size_t i = 1; i < out.runs.size(); ++i) {
    const double mi = out.metrics[i];
    const double mb = out.metrics[out.best];
    if (mi < mb || (mi == mb && out.runs[i].f < out.runs[out.best].f)) out.best = i;
  }
  return out;
}

#define RSSD_INSTANTIATE_SOLVER(M)                                                             \
  template ArmijoResult<M> ArmijoSearch<M>(const SmoothedObjective<M>&, const M::Tangent&,     \
                                           double, double, const LineSearchParams&);           \
  template SolverState<M> RssdStep<M>(SolverState<M>, const SmoothedObjective<M>&,             \
                                      const SolverConfig&);                                    \
  template SolveResult<M> RssdRun<M>(const SmoothedObjective<M>&, const M::Point&,             \
                                     const SolverConfig&, const Observer<M>&);                 \
  template GridResult<M> RssdGrid<M>(const SmoothedObjective<M>&, const M::Point&,             \
                                     const SolverConfig&, std::span<const SchedulePair>,       \
                                     const SelectionMetric<M>&);

RSSD_INSTANTIATE_SOLVER(Sphere)
RSSD_INSTANTIATE_SOLVER(Stiefel)

}  // namespace rssd
