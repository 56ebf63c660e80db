#pragma once

#include <cstdint>
#include <span>

#include "stopmc/model.hpp"
#include "stopmc/paths.hpp"
#include "stopmc/rng.hpp"

namespace stopmc {

struct LevelParams {
  int level = 0;
  double h0 = 0.1;
  int refinement = 4;   // K
  int split_count = 1;  // M_l, ignored on level 0

  /// h0 / K^level, computed from the exact integer power.
  double h_fine() const;
  /// h0 / K^(level-1); only meaningful for level >= 1.
  double h_coarse() const;

  /// Throws ConfigError on level < 0, K < 2, M < 1 or a non-positive h0.
  void validate() const;
};

enum class SplitSide { none, fine, coarse };

struct LevelSample {
  double fine_value = 0.0;
  double coarse_value = 0.0;  // 0 on level 0
  double diff = 0.0;
  std::int64_t rng_cost = 0;
  SplitSide split = SplitSide::none;
};

/// Draws K independent N(0, h_fine) vectors into `fine` (K * noise_dim,
/// block-major) and writes their componentwise sum into `coarse`.
void coupled_increments(NormalStream& noise, int refinement, double h_fine, int noise_dim, std::span<double> fine,
                        std::span<double> coarse);

/// Coupled coarse/fine sampler for one level. After the joint phase ends
/// at the first coarse step where either path has terminated, the survivor
/// (if any) is continued M_l times under independent noise and its payoff
/// averaged. With M_l = 1 this is the plain coupled estimator.
class LevelSampler {
 public:
  LevelSampler(const ProblemSpec& spec, const LevelParams& params, BoundaryMode mode, std::uint64_t seed);

  LevelSample operator()(std::uint64_t sample_index);

  const LevelParams& params() const { return params_; }

 private:
  double split_average(const PathState& survivor, double h, StreamRole role, std::uint64_t sample_index,
                       std::int64_t& cost);

  const ProblemSpec& spec_;
  LevelParams params_;
  BoundaryMode mode_;
  std::uint64_t seed_;
  double h_fine_;
  double h_coarse_;
  std::int64_t fine_steps_;
  std::int64_t coarse_steps_;
  StepScratch scratch_;
  std::vector<double> fine_increments_;
  std::vector<double> coarse_increment_;
};

LevelSample level_sample(const ProblemSpec& spec, const LevelParams& params, BoundaryMode mode, std::uint64_t seed,
                         std::uint64_t sample_index);

/// Sample variance of M^-1 sum_m (W + Z_m) for independent standard normals;
/// the split-average identity predicts 1 + 1/M.
double split_variance_demo(int split_count, NormalStream& noise, std::int64_t n_samples);

}  // namespace stopmc
