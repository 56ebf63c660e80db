#pragma once

#include <array>
#include <cstdint>

#include "stopmc/coupling.hpp"
#include "stopmc/model.hpp"

namespace stopmc {

/// Raw power sums of the level corrections (and of the fine values), plus
/// cost. Plain data: merge is componentwise addition, so per-thread
/// accumulators combine associatively. Central moments are recovered at read
/// time by shifting with the sample mean; cancellation can make the variance
/// slightly negative, in which case it is clamped to zero and flagged.
struct LevelStats {
  std::int64_t count = 0;
  std::array<double, 4> sums{};       // sum diff^p, p = 1..4
  std::array<double, 2> fine_sums{};  // sum fine^p, p = 1..2
  std::int64_t total_rng_cost = 0;

  void record(const LevelSample& sample);
  LevelStats& operator+=(const LevelStats& other);

  double mean() const;
  double variance() const;  // population second central moment, clamped at 0
  bool variance_clamped() const;
  double fine_mean() const;
  double fine_variance() const;
  double mean_cost() const;
};

LevelStats merge(LevelStats a, const LevelStats& b);

/// mu4 / mu2^2 of the level corrections; throws UndefinedKurtosis when
/// N < 4 or the variance is zero.
double kurtosis(const LevelStats& stats);

/// Mean cost per sample as a fraction of noise_dim / h, the cost of one path
/// running to the horizon (3/h for the 3-D cube).
double normalized_cost(const LevelStats& stats, const ProblemSpec& spec, double h);

}  // namespace stopmc
