#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "stopmc/coupling.hpp"
#include "stopmc/model.hpp"
#include "stopmc/paths.hpp"
#include "stopmc/stats.hpp"

namespace stopmc {

/// orig: coupled paths, no splitting. new1: splitting. new2: splitting with
/// the boundary shift.
enum class Estimator { orig, new1, new2 };

Estimator parse_estimator(const std::string& name);
std::string to_string(Estimator e);
BoundaryMode boundary_mode(Estimator e);

struct SplitRule {
  enum class Kind { two_pow_ell, two_pow_ell_over_sqrt_ell, constant };
  Kind kind = Kind::two_pow_ell;
  int constant_count = 1;

  /// M_l for l >= 1 (level 0 never splits).
  int count(int level) const;
};

/// "2^l", "2^l/sqrt(l)" or "const:<m>".
SplitRule parse_split_rule(const std::string& text);
std::string to_string(const SplitRule& rule);

struct MlmcConfig {
  double epsilon = 0.01;
  double h0 = 0.1;
  int refinement = 4;
  Estimator estimator = Estimator::new2;
  SplitRule m_rule;
  int L_min = 2;
  int L_max = 10;
  std::optional<double> alpha_hint;  // bias-test rate; defaults to 0.5 (orig, new1) or 1.0 (new2)
  std::optional<double> beta_hint;   // variance rate for extrapolating new levels; 0.5 (orig) or 1.0
  std::optional<int> fixed_L;        // skip the bias test and use levels 0..fixed_L
  std::int64_t initial_samples = 50;  // pilot on levels 0..L_min
  std::uint64_t seed = 1;
  int threads = 1;

  double alpha() const;
  double beta() const;
  /// Throws ConfigError on eps <= 0, bad level bounds, or h0 not dividing T.
  void validate(const ProblemSpec& spec) const;
};

LevelParams level_params(const MlmcConfig& config, int level);

struct LevelRecord {
  int level = 0;
  double h = 0.0;
  int split_count = 1;
  std::int64_t samples = 0;
  double mean = 0.0;
  double variance = 0.0;
  double cost = 0.0;      // mean rng cost per sample
  double kurtosis = 0.0;  // NaN when undefined
  LevelStats stats;
};

struct MlmcResult {
  double estimate = 0.0;
  std::vector<LevelRecord> levels;
  int chosen_L = 0;
  std::int64_t total_cost = 0;
  double fitted_alpha = 0.0;  // |mean_l| ~ h_l^alpha over levels >= 1
  double fitted_beta = 0.0;   // V_l ~ h_l^beta over levels >= 1
  bool bias_converged = false;

  /// sum_l V_l / N_l, the estimator variance.
  double estimator_variance() const;
};

/// Thrown when L_max is reached without passing the bias test; carries the
/// result obtained so far.
class LevelCapError : public std::runtime_error {
 public:
  LevelCapError(const std::string& what, MlmcResult partial) : std::runtime_error(what), partial_(std::move(partial)) {}
  const MlmcResult& partial() const { return partial_; }

 private:
  MlmcResult partial_;
};

/// N_l = ceil(2 eps^-2 sqrt(V_l / C_l) sum_l' sqrt(C_l' V_l')), at least 2.
std::vector<std::int64_t> optimal_samples(double epsilon, std::span<const double> costs,
                                          std::span<const double> variances);

/// Extrapolated remainder max(|m_L|, |m_{L-1}| / K^alpha) / (K^alpha - 1) <= eps / sqrt(2).
bool bias_converged(std::span<const double> means, double alpha, int refinement, double epsilon);

/// Slope of log|y_l| against log h_l by least squares; NaN with fewer than
/// two usable points.
double fitted_rate(std::span<const double> h, std::span<const double> y);

/// Samples [first_index, first_index + count) of one level. Work is split
/// into fixed-size chunks accumulated in index order, so the result is
/// bit-identical for any thread count.
LevelStats sample_level(const ProblemSpec& spec, const LevelParams& params, BoundaryMode mode, std::uint64_t seed,
                        std::uint64_t first_index, std::int64_t count, int threads);

/// Adaptive MLMC: pilot samples on levels 0..L_min, then repeatedly top up
/// every level to its optimal N_l and, once the counts have settled, add a
/// level while the extrapolated bias exceeds eps / sqrt(2). The bias test is
/// applied to |E[Y_l]| = A K^(-alpha l) with A fitted to all levels >= 1 by
/// inverse-variance weighting, rather than to the raw finest-level means. A
/// new level's variance and cost are extrapolated from the level below until
/// it has samples of its own.
MlmcResult run(const ProblemSpec& spec, const MlmcConfig& config);

}  // namespace stopmc
