#include "stopmc/coupling.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

#include "stopmc/error.hpp"

namespace stopmc {

namespace {

double int_pow(int base, int exponent) {
  double p = 1.0;
  for (int i = 0; i < exponent; ++i) p *= base;
  return p;
}

}  // namespace

double LevelParams::h_fine() const { return h0 / int_pow(refinement, level); }

double LevelParams::h_coarse() const { return h0 / int_pow(refinement, level - 1); }

void LevelParams::validate() const {
  if (level < 0) throw ConfigError("level must be non-negative");
  if (refinement < 2) throw ConfigError("refinement factor K must be at least 2");
  if (split_count < 1) throw ConfigError("split count M must be at least 1");
  if (!(h0 > 0.0)) throw ConfigError("h0 must be positive");
}

void coupled_increments(NormalStream& noise, int refinement, double h_fine, int noise_dim, std::span<double> fine,
                        std::span<double> coarse) {
  if (refinement < 2) throw ConfigError("coupled_increments: K must be at least 2");
  const double scale = std::sqrt(h_fine);
  const auto m = static_cast<std::size_t>(noise_dim);
  for (std::size_t j = 0; j < m; ++j) coarse[j] = 0.0;
  for (std::size_t k = 0; k < static_cast<std::size_t>(refinement); ++k) {
    for (std::size_t j = 0; j < m; ++j) {
      const double dw = scale * noise.next();
      fine[k * m + j] = dw;
      coarse[j] += dw;
    }
  }
}

LevelSampler::LevelSampler(const ProblemSpec& spec, const LevelParams& params, BoundaryMode mode, std::uint64_t seed)
    : spec_(spec),
      params_(params),
      mode_(mode),
      seed_(seed),
      h_fine_(params.h_fine()),
      h_coarse_(params.level > 0 ? params.h_coarse() : params.h_fine()),
      fine_steps_(0),
      coarse_steps_(0),
      scratch_(spec),
      fine_increments_(static_cast<std::size_t>(params.refinement * spec.noise_dim())),
      coarse_increment_(static_cast<std::size_t>(spec.noise_dim())) {
  params_.validate();
  fine_steps_ = steps_to_horizon(spec.horizon(), h_fine_);
  coarse_steps_ = steps_to_horizon(spec.horizon(), h_coarse_);
}

double LevelSampler::split_average(const PathState& survivor, double h, StreamRole role, std::uint64_t sample_index,
                                   std::int64_t& cost) {
  double sum = 0.0;
  for (int m = 0; m < params_.split_count; ++m) {
    NormalStream noise({seed_, static_cast<std::uint32_t>(params_.level), sample_index, role,
                        static_cast<std::uint32_t>(m)});
    PathState copy = survivor;
    copy.rng_cost = 0;
    const PathOutcome out = simulate_path(spec_, std::move(copy), h, mode_, noise, scratch_);
    sum += out.payoff;
    cost += out.rng_cost;
  }
  return sum / params_.split_count;
}

LevelSample LevelSampler::operator()(std::uint64_t sample_index) {
  const auto level = static_cast<std::uint32_t>(params_.level);
  NormalStream joint({seed_, level, sample_index, StreamRole::joint, 0});
  LevelSample out;

  if (params_.level == 0) {
    const PathOutcome path = simulate_path(spec_, initial_state(spec_), h_fine_, mode_, joint, scratch_);
    out.fine_value = path.payoff;
    out.diff = path.payoff;
    out.rng_cost = path.rng_cost;
    return out;
  }

  const int K = params_.refinement;
  const auto m = static_cast<std::size_t>(spec_.noise_dim());
  PathState fine = initial_state(spec_);
  PathState coarse = initial_state(spec_);
  std::int64_t cost = 0;

  // Joint phase: whole coarse steps until either path has terminated.
  while (fine.alive && coarse.alive) {
    coupled_increments(joint, K, h_fine_, spec_.noise_dim(), fine_increments_, coarse_increment_);
    cost += static_cast<std::int64_t>(K) * spec_.noise_dim();
    for (std::size_t k = 0; k < static_cast<std::size_t>(K) && fine.alive; ++k) {
      advance(spec_, fine, h_fine_, fine_steps_, std::span<const double>(fine_increments_).subspan(k * m, m), mode_,
              scratch_);
    }
    advance(spec_, coarse, h_coarse_, coarse_steps_, coarse_increment_, mode_, scratch_);
  }
  assert(!(fine.alive && coarse.alive));

  if (fine.alive) {
    out.split = SplitSide::fine;
    out.fine_value = split_average(fine, h_fine_, StreamRole::fine_split, sample_index, cost);
  } else {
    out.fine_value = final_payoff(spec_, fine, h_fine_);
  }
  if (coarse.alive) {
    out.split = SplitSide::coarse;
    out.coarse_value = split_average(coarse, h_coarse_, StreamRole::coarse_split, sample_index, cost);
  } else {
    out.coarse_value = final_payoff(spec_, coarse, h_coarse_);
  }
  out.diff = out.fine_value - out.coarse_value;
  out.rng_cost = cost;
  return out;
}

LevelSample level_sample(const ProblemSpec& spec, const LevelParams& params, BoundaryMode mode, std::uint64_t seed,
                         std::uint64_t sample_index) {
  LevelSampler sampler(spec, params, mode, seed);
  return sampler(sample_index);
}

double split_variance_demo(int split_count, NormalStream& noise, std::int64_t n_samples) {
  if (split_count < 1) throw ConfigError("split_variance_demo: M must be at least 1");
  if (n_samples < 2) throw ConfigError("split_variance_demo: need at least two samples");
  double mean = 0.0;
  double m2 = 0.0;
  for (std::int64_t n = 0; n < n_samples; ++n) {
    const double w = noise.next();
    double z_sum = 0.0;
    for (int m = 0; m < split_count; ++m) z_sum += noise.next();
    const double value = w + z_sum / split_count;
    const double delta = value - mean;
    mean += delta / static_cast<double>(n + 1);
    m2 += delta * (value - mean);
  }
  return m2 / static_cast<double>(n_samples - 1);
}

}  // namespace stopmc
