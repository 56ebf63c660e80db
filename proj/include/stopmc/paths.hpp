#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stopmc/model.hpp"
#include "stopmc/rng.hpp"

namespace stopmc {

enum class BoundaryMode { standard, gm_shift };

/// Boundary-shift constant -zeta(1/2)/sqrt(2 pi), to the four digits used in the experiments.
inline constexpr double kGmShiftConstant = 0.5826;

struct PathState {
  State position;
  std::int64_t step = 0;  // grid index; time is step * h
  double discount = 1.0;
  double running_payoff = 0.0;
  bool alive = true;
  bool exited = false;  // left D (as opposed to reaching the horizon)
  std::int64_t rng_cost = 0;

  double time(double h) const { return static_cast<double>(step) * h; }
};

struct PathOutcome {
  double exit_time = 0.0;
  State exit_state;
  double payoff = 0.0;
  std::int64_t rng_cost = 0;
  bool exited = false;
};

/// Reusable buffers for one simulating thread.
struct StepScratch {
  explicit StepScratch(const ProblemSpec& spec);

  std::vector<double> drift;
  std::vector<double> diffusion;
  std::vector<double> normal;
  std::vector<double> noise;
};

PathState initial_state(const ProblemSpec& spec);

/// Number of steps of size h in [0, horizon]; throws ConfigError unless horizon/h is an integer.
std::int64_t steps_to_horizon(double horizon, double h);

/// One Euler-Maruyama step. Accrues discount * f * h and the discount
/// factor at the left endpoint before moving the position.
void em_step(const ProblemSpec& spec, PathState& state, double h, std::span<const double> dW, StepScratch& scratch);
PathState em_step(const ProblemSpec& spec, const PathState& state, double h, std::span<const double> dW);

/// True when x counts as having left D. In gm_shift mode the boundary is
/// pulled inward by c0 |n^T b(x,t)| sqrt(h).
bool exit_test(const ProblemSpec& spec, std::span<const double> x, double t, double h, BoundaryMode mode,
               StepScratch& scratch);
bool exit_test(const ProblemSpec& spec, std::span<const double> x, double t, double h, BoundaryMode mode);

/// em_step followed by the exit / horizon check. Returns true if the path
/// terminated on this step. `dW` already carries the sqrt(h) scaling.
bool advance(const ProblemSpec& spec, PathState& state, double h, std::int64_t horizon_steps,
             std::span<const double> dW, BoundaryMode mode, StepScratch& scratch);

/// Payoff of a terminated path: accumulated running part plus discounted g.
double final_payoff(const ProblemSpec& spec, const PathState& state, double h);

/// Continues `from` to exit or the horizon with increments drawn from `noise`.
/// The outcome's rng_cost is cumulative, including whatever `from` had consumed.
PathOutcome simulate_path(const ProblemSpec& spec, PathState from, double h, BoundaryMode mode, NormalStream& noise,
                          StepScratch& scratch);
PathOutcome simulate_path(const ProblemSpec& spec, PathState from, double h, BoundaryMode mode, NormalStream& noise);

}  // namespace stopmc
