#include "stopmc/stats.hpp"

#include <limits>

#include "stopmc/error.hpp"

namespace stopmc {

void LevelStats::record(const LevelSample& sample) {
  const double x = sample.diff;
  const double x2 = x * x;
  sums[0] += x;
  sums[1] += x2;
  sums[2] += x2 * x;
  sums[3] += x2 * x2;
  fine_sums[0] += sample.fine_value;
  fine_sums[1] += sample.fine_value * sample.fine_value;
  total_rng_cost += sample.rng_cost;
  ++count;
}

LevelStats& LevelStats::operator+=(const LevelStats& other) {
  count += other.count;
  for (std::size_t p = 0; p < sums.size(); ++p) sums[p] += other.sums[p];
  for (std::size_t p = 0; p < fine_sums.size(); ++p) fine_sums[p] += other.fine_sums[p];
  total_rng_cost += other.total_rng_cost;
  return *this;
}

LevelStats merge(LevelStats a, const LevelStats& b) {
  a += b;
  return a;
}

double LevelStats::mean() const { return count > 0 ? sums[0] / static_cast<double>(count) : 0.0; }

namespace {

double raw_variance(double s1, double s2, std::int64_t n) {
  if (n == 0) return 0.0;
  const double mean = s1 / static_cast<double>(n);
  return s2 / static_cast<double>(n) - mean * mean;
}

// Anything below the rounding noise of the raw second moment is zero.
double clamped_variance(double s1, double s2, std::int64_t n) {
  const double v = raw_variance(s1, s2, n);
  const double noise_floor = 16.0 * std::numeric_limits<double>::epsilon() * (n > 0 ? s2 / static_cast<double>(n) : 0.0);
  return v > noise_floor ? v : 0.0;
}

}  // namespace

double LevelStats::variance() const { return clamped_variance(sums[0], sums[1], count); }

bool LevelStats::variance_clamped() const { return raw_variance(sums[0], sums[1], count) < 0.0; }

double LevelStats::fine_mean() const { return count > 0 ? fine_sums[0] / static_cast<double>(count) : 0.0; }

double LevelStats::fine_variance() const { return clamped_variance(fine_sums[0], fine_sums[1], count); }

double LevelStats::mean_cost() const {
  return count > 0 ? static_cast<double>(total_rng_cost) / static_cast<double>(count) : 0.0;
}

double kurtosis(const LevelStats& stats) {
  if (stats.count < 4) throw UndefinedKurtosis("kurtosis needs at least 4 samples");
  const double n = static_cast<double>(stats.count);
  const double m1 = stats.sums[0] / n;
  const double m2 = stats.sums[1] / n;
  const double m3 = stats.sums[2] / n;
  const double m4 = stats.sums[3] / n;
  const double mu2 = stats.variance();
  if (!(mu2 > 0.0)) throw UndefinedKurtosis("kurtosis undefined for zero variance");
  const double mu4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1 * m1 * m1 * m1;
  return mu4 / (mu2 * mu2);
}

double normalized_cost(const LevelStats& stats, const ProblemSpec& spec, double h) {
  const double baseline = static_cast<double>(spec.noise_dim()) / h;
  return stats.mean_cost() / baseline;
}

}  // namespace stopmc
