#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace stopmc {

using State = std::vector<double>;

// Callables write into caller-owned buffers so the hot path never allocates.
// Matrices are row-major, dim rows by noise_dim columns.
using VectorField = std::function<void(std::span<const double> x, double t, std::span<double> out)>;
using MatrixField = std::function<void(std::span<const double> x, double t, std::span<double> out)>;
using ScalarField = std::function<double(std::span<const double> x, double t)>;

/// Running payoff f, terminal payoff g and killing potential V of the
/// functional E[ int E(0,s) f ds + E(0,tau) g(X_tau, tau) ].
struct FeynmanKacData {
  ScalarField running;
  ScalarField terminal;
  ScalarField potential;
};

struct DomainGeometry {
  std::function<bool(std::span<const double> x)> contains;          // open set
  std::function<double(std::span<const double> x)> boundary_distance;  // Euclidean distance to the boundary
  std::function<void(std::span<const double> x, std::span<double> normal)> boundary_normal;  // outward, at the projection
};

/// The two interchangeable exit-time payoffs: (f=0, g=t) and (f=1, g=0).
enum class ExitTimeProfile { terminal_time, running_unit };

FeynmanKacData exit_time_payoff(ExitTimeProfile profile);

/// g = value, f = V = 0.
FeynmanKacData constant_payoff(double value);

/// Optional structural facts that let the path simulator skip callable
/// evaluations. Leaving a flag false is always correct.
struct StructureHints {
  bool zero_drift = false;
  bool identity_diffusion = false;  // requires noise_dim == dim
  bool zero_running = false;
  bool zero_potential = false;
};

class ProblemSpec {
 public:
  ProblemSpec(std::string name, int dim, int noise_dim, VectorField drift, MatrixField diffusion,
              FeynmanKacData fk, DomainGeometry domain, double horizon, State start, StructureHints hints = {});

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  int noise_dim() const { return noise_dim_; }
  double horizon() const { return horizon_; }
  const State& start() const { return start_; }

  const VectorField& drift() const { return drift_; }
  const MatrixField& diffusion() const { return diffusion_; }
  const FeynmanKacData& fk() const { return fk_; }
  const DomainGeometry& domain() const { return domain_; }
  const StructureHints& hints() const { return hints_; }

  /// Same dynamics and domain with a different payoff. Payoff hints are
  /// taken from `payoff_hints`; the dynamics hints are kept.
  ProblemSpec with_payoff(FeynmanKacData fk, std::string name, StructureHints payoff_hints = {}) const;

 private:
  std::string name_;
  int dim_;
  int noise_dim_;
  VectorField drift_;
  MatrixField diffusion_;
  FeynmanKacData fk_;
  DomainGeometry domain_;
  double horizon_;
  State start_;
  StructureHints hints_;
};

/// Per-step discount factor exp(-V(x,t) h) of the left-endpoint rule.
double discount_increment(const FeynmanKacData& fk, std::span<const double> x, double t, double h);

DomainGeometry cube_domain(double half_width);
DomainGeometry ball_domain(double radius);

/// Standard Brownian motion (a = 0, b = I) in the open cube (-w, w)^dim.
ProblemSpec make_cube_problem(double half_width, int dim, double horizon, State start, ExitTimeProfile profile,
                              std::string name = "cube");

/// Standard Brownian motion in the open ball of the given radius.
ProblemSpec make_ball_problem(double radius, int dim, double horizon, State start, ExitTimeProfile profile,
                              std::string name = "ball");

/// Named presets: cube3d, cube1d, ball3d.
ProblemSpec make_preset(const std::string& name, ExitTimeProfile profile = ExitTimeProfile::terminal_time);
std::vector<std::string> preset_names();

}  // namespace stopmc
