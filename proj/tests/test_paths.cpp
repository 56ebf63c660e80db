#include <doctest.h>

#include <cmath>
#include <vector>

#include "stopmc/error.hpp"
#include "stopmc/paths.hpp"
#include "stopmc/reference.hpp"

using namespace stopmc;

namespace {

ProblemSpec custom(std::vector<double> drift, double diffusion_scale, FeynmanKacData fk) {
  const int d = static_cast<int>(drift.size());
  VectorField a = [drift](std::span<const double>, double, std::span<double> out) {
    for (std::size_t i = 0; i < drift.size(); ++i) out[i] = drift[i];
  };
  MatrixField b = [d, diffusion_scale](std::span<const double>, double, std::span<double> out) {
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) out[i * d + j] = i == j ? diffusion_scale : 0.0;
    }
  };
  return ProblemSpec("custom", d, d, a, b, std::move(fk), cube_domain(1.0), 1.0, State(d, 0.0));
}

FeynmanKacData unit_running() {
  auto fk = constant_payoff(0.0);
  fk.running = [](std::span<const double>, double) { return 1.0; };
  return fk;
}

struct Moments {
  double n = 0, s1 = 0, s2 = 0;
  void add(double v) {
    n += 1;
    s1 += v;
    s2 += v * v;
  }
  double mean() const { return s1 / n; }
  double var() const { return s2 / n - mean() * mean(); }
  double se() const { return std::sqrt(var() / n); }
};

}  // namespace

TEST_CASE("em_step: degenerate dynamics leave the position alone") {
  auto spec = custom({0, 0, 0}, 0.0, constant_payoff(1.0));
  auto s = initial_state(spec);
  s.position = {0.3, -0.4, 0.5};
  const double dW[3] = {0.7, -1.1, 0.2};
  auto next = em_step(spec, s, 0.1, dW);
  CHECK(next.position == s.position);
  CHECK(next.step == 1);
}

TEST_CASE("em_step: drift-only and noise-only steps") {
  auto drifted = custom({1, 0, 0}, 1.0, constant_payoff(1.0));
  const double zero[3] = {0, 0, 0};
  auto a = em_step(drifted, initial_state(drifted), 0.1, zero);
  CHECK(a.position[0] == doctest::Approx(0.1));
  CHECK(a.position[1] == 0.0);
  CHECK(a.position[2] == 0.0);

  auto bm = make_preset("cube3d");
  const double dW[3] = {0.2, -0.1, 0.0};
  auto b = em_step(bm, initial_state(bm), 0.04, dW);
  CHECK(b.position == std::vector<double>{0.2, -0.1, 0.0});
}

TEST_CASE("em_step: payoff accrues before the discount update") {
  auto fk = unit_running();
  fk.potential = [](std::span<const double>, double) { return 2.0; };
  auto spec = custom({0, 0, 0}, 0.0, fk);
  auto s = initial_state(spec);
  const double dW[3] = {0, 0, 0};
  s = em_step(spec, s, 0.5, dW);
  CHECK(s.running_payoff == doctest::Approx(0.5));
  CHECK(s.discount == doctest::Approx(std::exp(-1.0)));
  s = em_step(spec, s, 0.5, dW);
  CHECK(s.running_payoff == doctest::Approx(0.5 + 0.5 * std::exp(-1.0)));
  CHECK(s.time(0.5) == 1.0);
}

TEST_CASE("exit_test examples") {
  auto spec = make_preset("cube3d");
  for (auto mode : {BoundaryMode::standard, BoundaryMode::gm_shift}) {
    CHECK_FALSE(exit_test(spec, std::vector<double>{0, 0, 0}, 0.0, 0.1, mode));
    CHECK(exit_test(spec, std::vector<double>{1.05, 0, 0}, 0.0, 0.1, mode));
  }
  const std::vector<double> x{0.9, 0, 0};
  CHECK(exit_test(spec, x, 0.0, 0.1, BoundaryMode::gm_shift));
  CHECK_FALSE(exit_test(spec, x, 0.0, 0.1, BoundaryMode::standard));
  CHECK(kGmShiftConstant * std::sqrt(0.1) == doctest::Approx(0.18424).epsilon(1e-4));
  // Band width shrinks with h: 0.5826 * 0.1 = 0.058 < 0.1.
  CHECK_FALSE(exit_test(spec, x, 0.0, 0.01, BoundaryMode::gm_shift));
}

TEST_CASE("exit_test uses |n^T b| for a general diffusion") {
  auto spec = custom({0, 0, 0}, 0.5, constant_payoff(1.0));
  // Band 0.5826 * 0.5 * sqrt(0.1) = 0.0921.
  CHECK(exit_test(spec, std::vector<double>{0.91, 0, 0}, 0.0, 0.1, BoundaryMode::gm_shift));
  CHECK_FALSE(exit_test(spec, std::vector<double>{0.9, 0, 0}, 0.0, 0.1, BoundaryMode::gm_shift));
}

TEST_CASE("immobile path accrues the full running integral") {
  auto spec = custom({0, 0, 0}, 0.0, unit_running());
  for (double h : {0.1, 0.025, 0.0125}) {
    NormalStream noise({1, 0, 0, StreamRole::auxiliary, 0});
    auto out = simulate_path(spec, initial_state(spec), h, BoundaryMode::gm_shift, noise);
    CHECK(out.payoff == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(out.exit_time == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(out.exited);
    CHECK(out.rng_cost == 3 * steps_to_horizon(1.0, h));
  }
}

TEST_CASE("constant terminal payoff is exact") {
  auto spec = make_preset("cube3d").with_payoff(constant_payoff(0.75), "c");
  for (std::uint64_t i = 0; i < 50; ++i) {
    NormalStream noise({7, 0, i, StreamRole::auxiliary, 0});
    CHECK(simulate_path(spec, initial_state(spec), 0.025, BoundaryMode::standard, noise).payoff == 0.75);
  }
}

TEST_CASE("exit times are grid aligned, cost matches, and the shift never exits later") {
  auto spec = make_preset("cube3d");
  StepScratch scratch(spec);
  for (double h : {0.1, 0.025}) {
    for (std::uint64_t i = 0; i < 2000; ++i) {
      const StreamKey key{3, 0, i, StreamRole::auxiliary, 0};
      NormalStream a(key);
      NormalStream b(key);
      auto standard = simulate_path(spec, initial_state(spec), h, BoundaryMode::standard, a, scratch);
      auto shifted = simulate_path(spec, initial_state(spec), h, BoundaryMode::gm_shift, b, scratch);
      const double steps = standard.exit_time / h;
      CHECK(steps == doctest::Approx(std::round(steps)).epsilon(1e-12));
      CHECK(standard.exit_time <= 1.0);
      CHECK(standard.rng_cost == 3 * static_cast<std::int64_t>(std::llround(steps)));
      CHECK(shifted.exit_time <= standard.exit_time);
      CHECK(standard.payoff == standard.exit_time);
    }
  }
}

TEST_CASE("non-finite positions raise SimulationFailure") {
  auto spec = custom({std::nan(""), 0, 0}, 1.0, constant_payoff(1.0));
  NormalStream noise({1, 0, 0, StreamRole::auxiliary, 0});
  CHECK_THROWS_AS(simulate_path(spec, initial_state(spec), 0.1, BoundaryMode::standard, noise), SimulationFailure);
}

TEST_CASE("horizon must be a multiple of h") {
  CHECK(steps_to_horizon(1.0, 0.1) == 10);
  CHECK(steps_to_horizon(1.0, 0.1 / 64) == 640);
  CHECK_THROWS_AS(steps_to_horizon(1.0, 0.3), ConfigError);
  CHECK_THROWS_AS(steps_to_horizon(1.0, 0.0), ConfigError);
}

TEST_CASE("1-D exit time against the series solution") {
  auto spec = make_preset("cube1d");
  const double h = 0.0125;
  const double exact = slab_exit_solution(0.0, 0.0);
  StepScratch scratch(spec);
  Moments standard, shifted;
  for (std::uint64_t i = 0; i < 1000000; ++i) {
    NormalStream a({11, 0, i, StreamRole::auxiliary, 0});
    standard.add(simulate_path(spec, initial_state(spec), h, BoundaryMode::standard, a, scratch).payoff);
    NormalStream b({11, 0, i, StreamRole::auxiliary, 1});
    shifted.add(simulate_path(spec, initial_state(spec), h, BoundaryMode::gm_shift, b, scratch).payoff);
  }
  // Standard exit detection overshoots by O(sqrt h); the shift leaves O(h).
  CHECK(std::fabs(standard.mean() - exact) <= 3 * standard.se() + 1.0 * std::sqrt(h));
  CHECK(standard.mean() > exact);
  CHECK(std::fabs(shifted.mean() - exact) <= 3 * shifted.se() + 1.0 * h);
  MESSAGE("standard bias " << standard.mean() - exact << ", shifted bias " << shifted.mean() - exact);
}

TEST_CASE("payoff variance stays proportional to the mean exit time") {
  auto spec = make_preset("cube3d");
  StepScratch scratch(spec);
  std::vector<double> ratios;
  for (double h : {0.1, 0.025}) {
    Moments m;
    for (std::uint64_t i = 0; i < 100000; ++i) {
      NormalStream a({5, 0, i, StreamRole::auxiliary, 0});
      m.add(simulate_path(spec, initial_state(spec), h, BoundaryMode::standard, a, scratch).payoff);
    }
    ratios.push_back(m.var() / m.mean());
  }
  CHECK(ratios[0] / ratios[1] == doctest::Approx(1.0).epsilon(0.5));
}
