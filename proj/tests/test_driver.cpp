#include <doctest.h>

#include <cmath>
#include <vector>

#include "stopmc/driver.hpp"
#include "stopmc/error.hpp"

using namespace stopmc;

TEST_CASE("optimal sample counts") {
  const std::vector<double> c{1, 4}, v{4, 1};
  CHECK(optimal_samples(1.0, c, v) == std::vector<std::int64_t>{16, 4});
  const std::vector<double> one{1};
  CHECK(optimal_samples(0.1, one, one) == std::vector<std::int64_t>{200});
  const std::vector<double> c3{1, 4, 16}, v3{1, 0, 0.01};
  const auto n = optimal_samples(0.1, c3, v3);
  CHECK(n[1] == 2);
  CHECK(n[0] > n[2]);
}

TEST_CASE("bias test") {
  const double eps = 0.01;
  const double edge = 3 * eps / std::sqrt(2.0);
  CHECK(bias_converged(std::vector<double>{16 * edge, 4 * edge, 0.99 * edge}, 1.0, 4, eps));
  CHECK_FALSE(bias_converged(std::vector<double>{16 * edge, 4.1 * edge, 1.01 * edge}, 1.0, 4, eps));
  CHECK(bias_converged(std::vector<double>{0.5, 0.0, 0.0}, 1.0, 4, 1e-9));
  CHECK_FALSE(bias_converged(std::vector<double>{0.01, 0.02, 0.04}, 1.0, 4, 0.01));
  // The level below counts once scaled by K^alpha.
  CHECK_FALSE(bias_converged(std::vector<double>{0.5, 1.0, 0.0}, 1.0, 4, 0.01));
}

TEST_CASE("split rules") {
  const auto pow2 = parse_split_rule("2^l");
  CHECK(pow2.count(0) == 1);
  CHECK(pow2.count(1) == 2);
  CHECK(pow2.count(4) == 16);
  const auto damped = parse_split_rule("2^l/sqrt(l)");
  CHECK(damped.count(1) == 2);
  CHECK(damped.count(4) == 8);
  CHECK(damped.count(3) == 5);
  const auto fixed = parse_split_rule("const:3");
  CHECK(fixed.count(0) == 1);
  CHECK(fixed.count(5) == 3);
  CHECK(to_string(fixed) == "const:3");
  CHECK_THROWS_AS(parse_split_rule("3^l"), ConfigError);
  CHECK_THROWS_AS(parse_split_rule("const:0"), ConfigError);
  CHECK_THROWS_AS(parse_estimator("new3"), ConfigError);
  CHECK(parse_estimator("new1") == Estimator::new1);
  CHECK(boundary_mode(Estimator::new2) == BoundaryMode::gm_shift);
  CHECK(boundary_mode(Estimator::new1) == BoundaryMode::standard);
}

TEST_CASE("level parameters per estimator") {
  MlmcConfig c;
  c.estimator = Estimator::orig;
  CHECK(level_params(c, 3).split_count == 1);
  c.estimator = Estimator::new1;
  CHECK(level_params(c, 3).split_count == 8);
  CHECK(level_params(c, 3).h_fine() == 0.1 / 64);
  CHECK(c.alpha() == 0.5);
  c.estimator = Estimator::new2;
  CHECK(c.alpha() == 1.0);
  c.alpha_hint = 0.8;
  CHECK(c.alpha() == 0.8);
}

TEST_CASE("configuration errors") {
  const auto spec = make_preset("cube3d");
  MlmcConfig c;
  c.h0 = 0.3;
  CHECK_THROWS_AS(c.validate(spec), ConfigError);
  c = {};
  c.epsilon = 0;
  CHECK_THROWS_AS(run(spec, c), ConfigError);
  c = {};
  c.L_max = 1;
  CHECK_THROWS_AS(run(spec, c), ConfigError);
}

TEST_CASE("fitted rates recover exact power laws") {
  const std::vector<double> h{0.1 / 4, 0.1 / 16, 0.1 / 64};
  std::vector<double> y;
  for (double v : h) y.push_back(-3.0 * std::pow(v, 0.75));
  CHECK(fitted_rate(h, y) == doctest::Approx(0.75));
  CHECK(std::isnan(fitted_rate(std::vector<double>{0.1}, std::vector<double>{1.0})));
}

TEST_CASE("sampling is independent of the thread count") {
  const auto spec = make_preset("cube3d");
  const LevelParams p{2, 0.1, 4, 4};
  const auto one = sample_level(spec, p, BoundaryMode::gm_shift, 8, 100, 3000, 1);
  const auto three = sample_level(spec, p, BoundaryMode::gm_shift, 8, 100, 3000, 3);
  CHECK(one.sums == three.sums);
  CHECK(one.fine_sums == three.fine_sums);
  CHECK(one.total_rng_cost == three.total_rng_cost);
  // Sampling a range in two pieces gives the same samples.
  auto split = sample_level(spec, p, BoundaryMode::gm_shift, 8, 100, 1200, 1);
  split += sample_level(spec, p, BoundaryMode::gm_shift, 8, 1300, 1800, 1);
  CHECK(split.count == one.count);
  CHECK(split.total_rng_cost == one.total_rng_cost);
  CHECK(split.sums[0] == doctest::Approx(one.sums[0]).epsilon(1e-12));
}

TEST_CASE("constant payoff run") {
  StructureHints hints;
  hints.zero_running = true;
  hints.zero_potential = true;
  const auto spec = make_preset("cube3d").with_payoff(constant_payoff(0.7), "c", hints);
  MlmcConfig c;
  c.epsilon = 0.01;
  const auto r = run(spec, c);
  CHECK(r.estimate == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(r.chosen_L == c.L_min);
  CHECK(r.bias_converged);
  for (std::size_t l = 0; l < r.levels.size(); ++l) {
    CHECK(r.levels[l].variance == 0.0);
    if (l > 0) CHECK(r.levels[l].mean == 0.0);
  }
}

TEST_CASE("runs are reproducible") {
  const auto spec = make_preset("cube3d");
  MlmcConfig c;
  c.epsilon = 0.02;
  c.seed = 77;
  const auto a = run(spec, c);
  c.threads = 4;
  const auto b = run(spec, c);
  CHECK(a.estimate == b.estimate);
  CHECK(a.total_cost == b.total_cost);
  CHECK(a.chosen_L == b.chosen_L);
}

TEST_CASE("orig and new1 agree at a pinned finest level") {
  const auto spec = make_preset("cube3d");
  MlmcConfig c;
  c.epsilon = 0.02;
  c.fixed_L = 3;
  c.estimator = Estimator::orig;
  const auto a = run(spec, c);
  c.estimator = Estimator::new1;
  c.seed = 2;
  const auto b = run(spec, c);
  CHECK(a.chosen_L == 3);
  CHECK(b.chosen_L == 3);
  CHECK(std::fabs(a.estimate - b.estimate) <= 3 * std::sqrt(a.estimator_variance() + b.estimator_variance()));
}

TEST_CASE("telescoping sum matches a single-level estimate on the finest grid") {
  const auto spec = make_preset("cube3d");
  MlmcConfig c;
  c.epsilon = 0.005;
  c.fixed_L = 2;
  c.estimator = Estimator::new1;
  const auto r = run(spec, c);

  const auto single = sample_level(spec, {0, 0.1 / 16, 4, 1}, BoundaryMode::standard, 99, 0, 20000, 1);
  const double se = std::sqrt(single.variance() / static_cast<double>(single.count));
  CHECK(std::fabs(r.estimate - single.mean()) <= 3 * std::sqrt(se * se + r.estimator_variance()));
}

TEST_CASE("level cap") {
  const auto spec = make_preset("cube3d");
  MlmcConfig c;
  c.epsilon = 0.02;
  c.estimator = Estimator::orig;
  c.L_min = 1;
  c.L_max = 1;
  try {
    run(spec, c);
    FAIL("expected LevelCapError");
  } catch (const LevelCapError& e) {
    CHECK(e.partial().chosen_L == 1);
    CHECK(e.partial().levels.size() == 2);
    CHECK_FALSE(e.partial().bias_converged);
  }
}

TEST_CASE("estimates land near the reference") {
  const auto spec = make_preset("cube3d");
  for (auto est : {Estimator::new1, Estimator::new2}) {
    MlmcConfig c;
    c.estimator = est;
    c.epsilon = 0.01;
    c.seed = 123;
    const auto r = run(spec, c);
    CHECK(r.bias_converged);
    CHECK(std::fabs(r.estimate - 0.435930) < 0.03);
  }
}

TEST_CASE("the two exit-time payoffs agree") {
  MlmcConfig c;
  c.epsilon = 0.01;
  c.fixed_L = 2;
  const auto a = run(make_preset("cube3d", ExitTimeProfile::terminal_time), c);
  const auto b = run(make_preset("cube3d", ExitTimeProfile::running_unit), c);
  // Same noise, and both payoffs equal the discrete exit time path by path.
  CHECK(a.estimate == doctest::Approx(b.estimate).epsilon(1e-9));
  c.seed = 5;
  const auto d = run(make_preset("cube3d", ExitTimeProfile::running_unit), c);
  CHECK(std::fabs(a.estimate - d.estimate) <= 3 * std::sqrt(a.estimator_variance() + d.estimator_variance()));
}

TEST_CASE("the shifted estimator needs fewer levels") {
  const auto spec = make_preset("cube3d");
  MlmcConfig c;
  c.epsilon = 0.01;
  c.estimator = Estimator::new1;
  const auto a = run(spec, c);
  c.estimator = Estimator::new2;
  const auto b = run(spec, c);
  CHECK(b.chosen_L < a.chosen_L);
}
