#include "stopmc/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "stopmc/error.hpp"

namespace stopmc {

FeynmanKacData exit_time_payoff(ExitTimeProfile profile) {
  auto zero = [](std::span<const double>, double) { return 0.0; };
  if (profile == ExitTimeProfile::terminal_time) {
    return {zero, [](std::span<const double>, double t) { return t; }, zero};
  }
  return {[](std::span<const double>, double) { return 1.0; }, zero, zero};
}

FeynmanKacData constant_payoff(double value) {
  auto zero = [](std::span<const double>, double) { return 0.0; };
  return {zero, [value](std::span<const double>, double) { return value; }, zero};
}

ProblemSpec::ProblemSpec(std::string name, int dim, int noise_dim, VectorField drift, MatrixField diffusion,
                         FeynmanKacData fk, DomainGeometry domain, double horizon, State start,
                         StructureHints hints)
    : name_(std::move(name)),
      dim_(dim),
      noise_dim_(noise_dim),
      drift_(std::move(drift)),
      diffusion_(std::move(diffusion)),
      fk_(std::move(fk)),
      domain_(std::move(domain)),
      horizon_(horizon),
      start_(std::move(start)),
      hints_(hints) {
  if (dim_ < 1 || noise_dim_ < 1) throw ConfigError("ProblemSpec: dimensions must be positive");
  if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) throw ConfigError("ProblemSpec: horizon must be positive");
  if (static_cast<int>(start_.size()) != dim_) throw ConfigError("ProblemSpec: start has wrong dimension");
  if (!drift_ || !diffusion_ || !fk_.running || !fk_.terminal || !fk_.potential || !domain_.contains ||
      !domain_.boundary_distance || !domain_.boundary_normal) {
    throw ConfigError("ProblemSpec: all callables must be set");
  }
  if (!domain_.contains(start_)) throw ConfigError("ProblemSpec: start must lie in the domain interior");
  if (hints_.identity_diffusion && noise_dim_ != dim_) {
    throw ConfigError("ProblemSpec: identity diffusion needs noise_dim == dim");
  }
}

ProblemSpec ProblemSpec::with_payoff(FeynmanKacData fk, std::string name, StructureHints payoff_hints) const {
  StructureHints hints = hints_;
  hints.zero_running = payoff_hints.zero_running;
  hints.zero_potential = payoff_hints.zero_potential;
  return ProblemSpec(std::move(name), dim_, noise_dim_, drift_, diffusion_, std::move(fk), domain_, horizon_, start_,
                     hints);
}

double discount_increment(const FeynmanKacData& fk, std::span<const double> x, double t, double h) {
  return std::exp(-fk.potential(x, t) * h);
}

DomainGeometry cube_domain(double half_width) {
  if (!(half_width > 0.0)) throw ConfigError("cube: half_width must be positive");
  DomainGeometry g;
  g.contains = [half_width](std::span<const double> x) {
    return std::all_of(x.begin(), x.end(), [half_width](double v) { return std::fabs(v) < half_width; });
  };
  g.boundary_distance = [half_width](std::span<const double> x) {
    double sup = 0.0;
    double outside_sq = 0.0;
    for (double v : x) {
      sup = std::max(sup, std::fabs(v));
      const double excess = std::fabs(v) - half_width;
      if (excess > 0.0) outside_sq += excess * excess;
    }
    if (sup <= half_width) return half_width - sup;
    return std::sqrt(outside_sq);
  };
  // Dominant coordinate, lowest index on ties.
  g.boundary_normal = [](std::span<const double> x, std::span<double> n) {
    std::size_t j = 0;
    for (std::size_t i = 1; i < x.size(); ++i) {
      if (std::fabs(x[i]) > std::fabs(x[j])) j = i;
    }
    std::fill(n.begin(), n.end(), 0.0);
    n[j] = x[j] < 0.0 ? -1.0 : 1.0;
  };
  return g;
}

DomainGeometry ball_domain(double radius) {
  if (!(radius > 0.0)) throw ConfigError("ball: radius must be positive");
  auto norm = [](std::span<const double> x) {
    return std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
  };
  DomainGeometry g;
  g.contains = [radius, norm](std::span<const double> x) { return norm(x) < radius; };
  g.boundary_distance = [radius, norm](std::span<const double> x) { return std::fabs(radius - norm(x)); };
  g.boundary_normal = [norm](std::span<const double> x, std::span<double> n) {
    const double r = norm(x);
    if (r == 0.0) {
      std::fill(n.begin(), n.end(), 0.0);
      n[0] = 1.0;
      return;
    }
    for (std::size_t i = 0; i < x.size(); ++i) n[i] = x[i] / r;
  };
  return g;
}

namespace {

VectorField zero_drift() {
  return [](std::span<const double>, double, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); };
}

MatrixField identity_diffusion(int dim) {
  return [dim](std::span<const double>, double, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (int i = 0; i < dim; ++i) out[static_cast<std::size_t>(i * dim + i)] = 1.0;
  };
}

StructureHints brownian_hints(ExitTimeProfile profile) {
  StructureHints hints;
  hints.zero_drift = true;
  hints.identity_diffusion = true;
  hints.zero_potential = true;
  hints.zero_running = profile == ExitTimeProfile::terminal_time;
  return hints;
}

}  // namespace

ProblemSpec make_cube_problem(double half_width, int dim, double horizon, State start, ExitTimeProfile profile,
                              std::string name) {
  return ProblemSpec(std::move(name), dim, dim, zero_drift(), identity_diffusion(dim), exit_time_payoff(profile),
                     cube_domain(half_width), horizon, std::move(start), brownian_hints(profile));
}

ProblemSpec make_ball_problem(double radius, int dim, double horizon, State start, ExitTimeProfile profile,
                              std::string name) {
  return ProblemSpec(std::move(name), dim, dim, zero_drift(), identity_diffusion(dim), exit_time_payoff(profile),
                     ball_domain(radius), horizon, std::move(start), brownian_hints(profile));
}

ProblemSpec make_preset(const std::string& name, ExitTimeProfile profile) {
  if (name == "cube3d") return make_cube_problem(1.0, 3, 1.0, State(3, 0.0), profile, name);
  if (name == "cube1d") return make_cube_problem(1.0, 1, 1.0, State(1, 0.0), profile, name);
  if (name == "ball3d") return make_ball_problem(1.0, 3, 1.0, State(3, 0.0), profile, name);
  throw ConfigError("unknown problem preset '" + name + "'");
}

std::vector<std::string> preset_names() { return {"cube3d", "cube1d", "ball3d"}; }

}  // namespace stopmc
