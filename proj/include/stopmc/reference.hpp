#pragma once

#include <span>
#include <vector>

namespace stopmc {

// Closed-form expected exit times for standard Brownian motion stopped at
// the boundary of [-1,1]^d or at t = 1, i.e. solutions of
//   u_t + 1/2 lap(u) + 1 = 0,  u = 0 on the boundary and at t = 1,
// expanded in odd cosine modes cos(i pi x / 2).

struct SeriesTruncation {
  int max_index = 39;  // odd cutoff for every mode index

  /// Throws ConfigError unless max_index is odd and >= 1.
  void validate() const;
};

/// u(x, t) on the 3-D cube. The time-independent part is summed with the
/// innermost index in closed (hyperbolic) form, so only the transient
/// modes exp(-lambda (1 - t)) are truncated; this converges exponentially
/// fast for t < 1 where the plain triple series converges like N^-2.
double cube_exit_solution(std::span<const double> x, double t, SeriesTruncation trunc = {});

/// Plain truncated triple series sum_{odd i,j,k <= N} A_ijk(t) cos cos cos
/// with A = (c / lambda)(1 - exp(-lambda (1 - t))), lambda = (i^2+j^2+k^2) pi^2 / 8,
/// c = 64 (-1)^((i+j+k+1)/2) / (i j k pi^3).
double cube_exit_series(std::span<const double> x, double t, SeriesTruncation trunc = {});

/// 1-D analogue on (-1, 1): (1 - x^2) minus the truncated transient modes.
double slab_exit_solution(double x, double t, SeriesTruncation trunc = {});

/// Plain truncated 1-D series sum_{odd i <= N} (c_i / lambda_i)(1 - exp(-lambda_i (1 - t))) cos(i pi x / 2).
double slab_exit_series(double x, double t, SeriesTruncation trunc = {});

struct FdGrid {
  std::vector<double> x;
  std::vector<double> u;  // values at t = 0
};

/// Crank-Nicolson solution of the 1-D problem on `mesh` uniform intervals of
/// [-1, 1], marched backward from t = 1 to t = 0 in `steps` steps.
FdGrid fd_oracle_1d(int mesh, int steps);

}  // namespace stopmc
