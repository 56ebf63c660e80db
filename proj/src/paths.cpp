#include "stopmc/paths.hpp"

#include <cmath>
#include <string>

#include "stopmc/error.hpp"

namespace stopmc {

StepScratch::StepScratch(const ProblemSpec& spec)
    : drift(static_cast<std::size_t>(spec.dim())),
      diffusion(static_cast<std::size_t>(spec.dim() * spec.noise_dim())),
      normal(static_cast<std::size_t>(spec.dim())),
      noise(static_cast<std::size_t>(spec.noise_dim())) {}

PathState initial_state(const ProblemSpec& spec) {
  PathState s;
  s.position = spec.start();
  return s;
}

std::int64_t steps_to_horizon(double horizon, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("timestep must be positive");
  const double ratio = horizon / h;
  const double n = std::round(ratio);
  if (n < 1.0 || std::fabs(ratio - n) > 1e-9 * n) {
    throw ConfigError("horizon " + std::to_string(horizon) + " is not an integer multiple of h = " + std::to_string(h));
  }
  return static_cast<std::int64_t>(n);
}

void em_step(const ProblemSpec& spec, PathState& state, double h, std::span<const double> dW, StepScratch& scratch) {
  const double t = state.time(h);
  const std::span<const double> x = state.position;
  const auto& fk = spec.fk();
  const auto& hints = spec.hints();

  if (!hints.zero_running) state.running_payoff += state.discount * fk.running(x, t) * h;
  if (!hints.zero_potential) state.discount *= discount_increment(fk, x, t, h);

  const std::size_t d = state.position.size();
  const std::size_t m = dW.size();
  if (!hints.zero_drift) spec.drift()(x, t, scratch.drift);
  if (hints.identity_diffusion) {
    for (std::size_t i = 0; i < d; ++i) state.position[i] += (hints.zero_drift ? 0.0 : scratch.drift[i] * h) + dW[i];
  } else {
    spec.diffusion()(x, t, scratch.diffusion);
    for (std::size_t i = 0; i < d; ++i) {
      double move = hints.zero_drift ? 0.0 : scratch.drift[i] * h;
      const double* row = scratch.diffusion.data() + i * m;
      for (std::size_t j = 0; j < m; ++j) move += row[j] * dW[j];
      state.position[i] += move;
    }
  }
  ++state.step;
}

PathState em_step(const ProblemSpec& spec, const PathState& state, double h, std::span<const double> dW) {
  StepScratch scratch(spec);
  PathState next = state;
  em_step(spec, next, h, dW, scratch);
  return next;
}

bool exit_test(const ProblemSpec& spec, std::span<const double> x, double t, double h, BoundaryMode mode,
               StepScratch& scratch) {
  const auto& domain = spec.domain();
  if (!domain.contains(x)) return true;
  if (mode == BoundaryMode::standard) return false;

  // With b = I the normal component |n^T b| is |n| = 1.
  double normal_noise = 1.0;
  if (!spec.hints().identity_diffusion) {
    domain.boundary_normal(x, scratch.normal);
    spec.diffusion()(x, t, scratch.diffusion);
    const std::size_t d = x.size();
    const std::size_t m = static_cast<std::size_t>(spec.noise_dim());
    double norm_sq = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      double v = 0.0;
      for (std::size_t i = 0; i < d; ++i) v += scratch.normal[i] * scratch.diffusion[i * m + j];
      norm_sq += v * v;
    }
    normal_noise = std::sqrt(norm_sq);
  }
  return domain.boundary_distance(x) <= kGmShiftConstant * normal_noise * std::sqrt(h);
}

bool exit_test(const ProblemSpec& spec, std::span<const double> x, double t, double h, BoundaryMode mode) {
  StepScratch scratch(spec);
  return exit_test(spec, x, t, h, mode, scratch);
}

bool advance(const ProblemSpec& spec, PathState& state, double h, std::int64_t horizon_steps,
             std::span<const double> dW, BoundaryMode mode, StepScratch& scratch) {
  em_step(spec, state, h, dW, scratch);
  for (double v : state.position) {
    if (!std::isfinite(v)) {
      throw SimulationFailure("non-finite position at step " + std::to_string(state.step) + " (h = " +
                              std::to_string(h) + ")");
    }
  }
  if (exit_test(spec, state.position, state.time(h), h, mode, scratch)) {
    state.alive = false;
    state.exited = true;
  } else if (state.step >= horizon_steps) {
    state.alive = false;
  }
  return !state.alive;
}

double final_payoff(const ProblemSpec& spec, const PathState& state, double h) {
  return state.running_payoff + state.discount * spec.fk().terminal(state.position, state.time(h));
}

PathOutcome simulate_path(const ProblemSpec& spec, PathState from, double h, BoundaryMode mode, NormalStream& noise,
                          StepScratch& scratch) {
  const std::int64_t horizon_steps = steps_to_horizon(spec.horizon(), h);
  const double sqrt_h = std::sqrt(h);
  const auto noise_dim = static_cast<std::int64_t>(spec.noise_dim());
  while (from.alive && from.step < horizon_steps) {
    for (double& z : scratch.noise) z = sqrt_h * noise.next();
    from.rng_cost += noise_dim;
    advance(spec, from, h, horizon_steps, scratch.noise, mode, scratch);
  }
  from.alive = false;

  PathOutcome out;
  out.exit_time = from.time(h);
  out.payoff = final_payoff(spec, from, h);
  out.rng_cost = from.rng_cost;
  out.exited = from.exited;
  out.exit_state = std::move(from.position);
  return out;
}

PathOutcome simulate_path(const ProblemSpec& spec, PathState from, double h, BoundaryMode mode, NormalStream& noise) {
  StepScratch scratch(spec);
  return simulate_path(spec, std::move(from), h, mode, noise, scratch);
}

}  // namespace stopmc
