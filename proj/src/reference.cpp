#include "stopmc/reference.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "stopmc/error.hpp"

namespace stopmc {

namespace {

constexpr double kPi = std::numbers::pi;

// Cosine coefficient of the constant 1 on (-1, 1): 4 (-1)^((i-1)/2) / (i pi).
double unit_coefficient(int i) { return ((i / 2) % 2 == 0 ? 4.0 : -4.0) / (i * kPi); }

double mode(int i, double x) { return std::cos(i * kPi * x / 2.0); }

// cosh(mu z) / cosh(mu) without overflow.
double cosh_ratio(double mu, double z) {
  const double az = std::fabs(z);
  return std::exp(mu * (az - 1.0)) * (1.0 + std::exp(-2.0 * mu * az)) / (1.0 + std::exp(-2.0 * mu));
}

void check_time(double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("time " + std::to_string(t) + " outside [0, 1]");
}

void check_point(double v) {
  if (!(v >= -1.0 && v <= 1.0)) throw DomainError("point coordinate " + std::to_string(v) + " outside [-1, 1]");
}

std::array<double, 3> checked_cube_point(std::span<const double> x, double t) {
  if (x.size() != 3) throw DomainError("cube oracle needs a 3-D point");
  check_time(t);
  for (double v : x) check_point(v);
  return {x[0], x[1], x[2]};
}

}  // namespace

void SeriesTruncation::validate() const {
  if (max_index < 1 || max_index % 2 == 0) {
    throw ConfigError("series truncation must be an odd integer >= 1, got " + std::to_string(max_index));
  }
}

double cube_exit_series(std::span<const double> x, double t, SeriesTruncation trunc) {
  trunc.validate();
  const auto p = checked_cube_point(x, t);
  double sum = 0.0;
  for (int i = 1; i <= trunc.max_index; i += 2) {
    const double ci = unit_coefficient(i) * mode(i, p[0]);
    for (int j = 1; j <= trunc.max_index; j += 2) {
      const double cij = ci * unit_coefficient(j) * mode(j, p[1]);
      for (int k = 1; k <= trunc.max_index; k += 2) {
        const double lambda = (i * i + j * j + k * k) * kPi * kPi / 8.0;
        sum += cij * unit_coefficient(k) * mode(k, p[2]) / lambda * -std::expm1(-lambda * (1.0 - t));
      }
    }
  }
  return sum;
}

double cube_exit_solution(std::span<const double> x, double t, SeriesTruncation trunc) {
  trunc.validate();
  auto p = checked_cube_point(x, t);
  if (t == 1.0) return 0.0;
  for (double v : p) {
    if (std::fabs(v) == 1.0) return 0.0;
  }
  // The problem is symmetric under coordinate permutations; putting the
  // coordinates closest to the boundary first keeps the hyperbolic factors
  // below small.
  for (double& v : p) v = std::fabs(v);
  std::sort(p.begin(), p.end(), std::greater<>());

  // Steady part w solves 1/2 lap(w) = -1 with w = 0 on the boundary.
  double steady = 1.0 - p[0] * p[0];
  for (int i = 1; i <= trunc.max_index; i += 2) {
    const double nu = i * kPi / 2.0;
    steady -= 2.0 * unit_coefficient(i) * mode(i, p[0]) * cosh_ratio(nu, p[1]) / (nu * nu);
  }
  for (int i = 1; i <= trunc.max_index; i += 2) {
    const double ci = unit_coefficient(i) * mode(i, p[0]);
    for (int j = 1; j <= trunc.max_index; j += 2) {
      const double mu = kPi / 2.0 * std::sqrt(static_cast<double>(i * i + j * j));
      steady -= 2.0 * ci * unit_coefficient(j) * mode(j, p[1]) * cosh_ratio(mu, p[2]) / (mu * mu);
    }
  }

  double transient = 0.0;
  for (int i = 1; i <= trunc.max_index; i += 2) {
    const double ci = unit_coefficient(i) * mode(i, p[0]);
    for (int j = 1; j <= trunc.max_index; j += 2) {
      const double cij = ci * unit_coefficient(j) * mode(j, p[1]);
      for (int k = 1; k <= trunc.max_index; k += 2) {
        const double lambda = (i * i + j * j + k * k) * kPi * kPi / 8.0;
        transient += cij * unit_coefficient(k) * mode(k, p[2]) / lambda * std::exp(-lambda * (1.0 - t));
      }
    }
  }
  return steady - transient;
}

double slab_exit_series(double x, double t, SeriesTruncation trunc) {
  trunc.validate();
  check_time(t);
  check_point(x);
  double sum = 0.0;
  for (int i = 1; i <= trunc.max_index; i += 2) {
    const double lambda = i * i * kPi * kPi / 8.0;
    sum += unit_coefficient(i) * mode(i, x) / lambda * -std::expm1(-lambda * (1.0 - t));
  }
  return sum;
}

double slab_exit_solution(double x, double t, SeriesTruncation trunc) {
  trunc.validate();
  check_time(t);
  check_point(x);
  if (t == 1.0 || std::fabs(x) == 1.0) return 0.0;
  double transient = 0.0;
  for (int i = 1; i <= trunc.max_index; i += 2) {
    const double lambda = i * i * kPi * kPi / 8.0;
    transient += unit_coefficient(i) * mode(i, x) / lambda * std::exp(-lambda * (1.0 - t));
  }
  return 1.0 - x * x - transient;
}

FdGrid fd_oracle_1d(int mesh, int steps) {
  if (mesh < 8 || steps < 8) throw ConfigError("fd_oracle_1d: mesh and steps must be at least 8");
  const auto n = static_cast<std::size_t>(mesh);
  const double dx = 2.0 / mesh;
  const double dt = 1.0 / steps;
  // In s = 1 - t: u_s = 1/2 u_xx + 1, u(s=0) = 0, u(+-1) = 0.
  const double r = 0.5 * dt / (dx * dx);  // dt * (1/2) / dx^2
  const double half = 0.5 * r;

  FdGrid grid;
  grid.x.resize(n + 1);
  for (std::size_t j = 0; j <= n; ++j) grid.x[j] = -1.0 + static_cast<double>(j) * dx;
  std::vector<double> u(n + 1, 0.0);

  // Interior system (1 + r) u_j - r/2 (u_{j-1} + u_{j+1}) = rhs_j, solved by the Thomas algorithm.
  const std::size_t m = n - 1;
  std::vector<double> c_prime(m);
  std::vector<double> d_prime(m);
  const double diag = 1.0 + r;
  const double off = -half;
  for (int s = 0; s < steps; ++s) {
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t j = k + 1;
      d_prime[k] = (1.0 - r) * u[j] + half * (u[j - 1] + u[j + 1]) + dt;
    }
    c_prime[0] = off / diag;
    d_prime[0] = d_prime[0] / diag;
    for (std::size_t k = 1; k < m; ++k) {
      const double denom = diag - off * c_prime[k - 1];
      c_prime[k] = off / denom;
      d_prime[k] = (d_prime[k] - off * d_prime[k - 1]) / denom;
    }
    u[m] = d_prime[m - 1];
    for (std::size_t k = m - 1; k-- > 0;) u[k + 1] = d_prime[k] - c_prime[k] * u[k + 2];
  }
  grid.u = std::move(u);
  return grid;
}

}  // namespace stopmc
