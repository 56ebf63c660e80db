#include <doctest.h>

#include <cmath>
#include <vector>

#include "stopmc/error.hpp"
#include "stopmc/model.hpp"

using namespace stopmc;

namespace {

std::vector<double> normal_of(const DomainGeometry& g, std::vector<double> x) {
  std::vector<double> n(x.size());
  g.boundary_normal(x, n);
  return n;
}

}  // namespace

TEST_CASE("cube problem basics") {
  auto spec = make_cube_problem(1.0, 3, 1.0, {0, 0, 0}, ExitTimeProfile::terminal_time);
  const auto& d = spec.domain();
  CHECK(d.contains(std::vector<double>{0, 0, 0}));
  CHECK(d.boundary_distance(std::vector<double>{0, 0, 0}) == doctest::Approx(1.0));
  CHECK_FALSE(d.contains(std::vector<double>{1, 0, 0}));
  CHECK(normal_of(d, {0.9, 0.1, -0.2}) == std::vector<double>{1, 0, 0});
  CHECK(normal_of(d, {0.1, -0.95, 0.2}) == std::vector<double>{0, -1, 0});
  CHECK(spec.dim() == 3);
  CHECK(spec.noise_dim() == 3);
}

TEST_CASE("cube distance outside and on ties") {
  auto d = cube_domain(1.0);
  CHECK(d.boundary_distance(std::vector<double>{1.05, 0, 0}) == doctest::Approx(0.05));
  CHECK(d.boundary_distance(std::vector<double>{1.3, 1.4, 0}) == doctest::Approx(0.5));
  CHECK(normal_of(d, {0.5, 0.5, 0}) == std::vector<double>{1, 0, 0});
  CHECK(normal_of(d, {-0.5, 0.5, 0}) == std::vector<double>{-1, 0, 0});
}

TEST_CASE("ball geometry") {
  auto d = ball_domain(2.0);
  CHECK(d.contains(std::vector<double>{1, 1, 1}));
  CHECK_FALSE(d.contains(std::vector<double>{2, 0, 0}));
  CHECK(d.boundary_distance(std::vector<double>{0, 0, 1}) == doctest::Approx(1.0));
  CHECK(d.boundary_distance(std::vector<double>{0, 3, 0}) == doctest::Approx(1.0));
  auto n = normal_of(d, {0, 3, 4});
  CHECK(n[1] == doctest::Approx(0.6));
  CHECK(n[2] == doctest::Approx(0.8));
}

TEST_CASE("domain queries agree on random points") {
  for (auto d : {cube_domain(1.0), ball_domain(1.0)}) {
    std::vector<double> x(3);
    for (int i = 0; i < 200; ++i) {
      for (int k = 0; k < 3; ++k) x[k] = std::sin(1.7 * i + 2.3 * k) * 1.2;
      const double dist = d.boundary_distance(x);
      CHECK(dist >= 0.0);
      std::vector<double> n(3);
      d.boundary_normal(x, n);
      CHECK(std::hypot(n[0], n[1], n[2]) == doctest::Approx(1.0));
      if (d.contains(x) && dist > 1e-3) {
        // Stepping the distance along the outward normal lands on the boundary.
        std::vector<double> y(3);
        for (int k = 0; k < 3; ++k) y[k] = x[k] + dist * n[k];
        CHECK(d.boundary_distance(y) < 1e-9);
        for (int k = 0; k < 3; ++k) y[k] = x[k] + 0.999 * dist * n[k];
        CHECK(d.contains(y));
        for (int k = 0; k < 3; ++k) y[k] = x[k] + 1.001 * dist * n[k];
        CHECK_FALSE(d.contains(y));
      }
    }
  }
}

TEST_CASE("discount increment") {
  const double x[3] = {0.3, -0.2, 0.1};
  auto fk = constant_payoff(1.0);
  CHECK(discount_increment(fk, x, 0.7, 0.25) == 1.0);
  fk.potential = [](std::span<const double>, double) { return 2.0; };
  CHECK(discount_increment(fk, x, 0.0, 0.5) == doctest::Approx(0.36787944117144233));
  fk.potential = [](std::span<const double>, double t) { return t; };
  CHECK(discount_increment(fk, x, 0.3, 0.1) == doctest::Approx(0.9704455335485082));
}

TEST_CASE("exit-time payoffs") {
  const double x[1] = {0.0};
  auto a = exit_time_payoff(ExitTimeProfile::terminal_time);
  CHECK(a.running(x, 0.2) == 0.0);
  CHECK(a.terminal(x, 0.4) == 0.4);
  auto b = exit_time_payoff(ExitTimeProfile::running_unit);
  CHECK(b.running(x, 0.2) == 1.0);
  CHECK(b.terminal(x, 0.4) == 0.0);
}

TEST_CASE("invalid problems are rejected") {
  CHECK_THROWS_AS(make_cube_problem(1.0, 3, 1.0, {1.0, 0, 0}, ExitTimeProfile::terminal_time), ConfigError);
  CHECK_THROWS_AS(make_cube_problem(1.0, 3, 1.0, {0, 0}, ExitTimeProfile::terminal_time), ConfigError);
  CHECK_THROWS_AS(make_cube_problem(1.0, 3, -1.0, {0, 0, 0}, ExitTimeProfile::terminal_time), ConfigError);
  CHECK_THROWS_AS(cube_domain(0.0), ConfigError);
  CHECK_THROWS_AS(make_preset("torus"), ConfigError);
}

TEST_CASE("presets") {
  for (const auto& name : preset_names()) {
    auto spec = make_preset(name);
    CHECK(spec.name() == name);
    CHECK(spec.horizon() == 1.0);
  }
  CHECK(make_preset("cube1d").dim() == 1);
}

TEST_CASE("with_payoff keeps dynamics") {
  auto spec = make_preset("cube3d");
  StructureHints h;
  h.zero_running = true;
  h.zero_potential = true;
  auto c = spec.with_payoff(constant_payoff(2.5), "c", h);
  CHECK(c.hints().identity_diffusion);
  CHECK(c.fk().terminal(spec.start(), 0.3) == 2.5);
  CHECK(c.name() == "c");
}
