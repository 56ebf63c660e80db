#include "stopmc/driver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "stopmc/error.hpp"

namespace stopmc {

namespace {

constexpr std::int64_t kChunkSize = 512;

}  // namespace

Estimator parse_estimator(const std::string& name) {
  if (name == "orig") return Estimator::orig;
  if (name == "new1") return Estimator::new1;
  if (name == "new2") return Estimator::new2;
  throw ConfigError("unknown estimator '" + name + "' (expected orig, new1 or new2)");
}

std::string to_string(Estimator e) {
  switch (e) {
    case Estimator::orig:
      return "orig";
    case Estimator::new1:
      return "new1";
    case Estimator::new2:
      return "new2";
  }
  return "?";
}

BoundaryMode boundary_mode(Estimator e) {
  return e == Estimator::new2 ? BoundaryMode::gm_shift : BoundaryMode::standard;
}

int SplitRule::count(int level) const {
  if (level <= 0) return 1;
  switch (kind) {
    case Kind::two_pow_ell:
      return 1 << level;
    case Kind::two_pow_ell_over_sqrt_ell:
      return static_cast<int>(std::ceil(static_cast<double>(1 << level) / std::sqrt(static_cast<double>(level))));
    case Kind::constant:
      return constant_count;
  }
  return 1;
}

SplitRule parse_split_rule(const std::string& text) {
  SplitRule rule;
  if (text == "2^l") {
    rule.kind = SplitRule::Kind::two_pow_ell;
  } else if (text == "2^l/sqrt(l)") {
    rule.kind = SplitRule::Kind::two_pow_ell_over_sqrt_ell;
  } else if (text.rfind("const:", 0) == 0) {
    rule.kind = SplitRule::Kind::constant;
    try {
      rule.constant_count = std::stoi(text.substr(6));
    } catch (const std::exception&) {
      throw ConfigError("bad split rule '" + text + "'");
    }
    if (rule.constant_count < 1) throw ConfigError("constant split count must be at least 1");
  } else {
    throw ConfigError("unknown split rule '" + text + "' (expected 2^l, 2^l/sqrt(l) or const:<m>)");
  }
  return rule;
}

std::string to_string(const SplitRule& rule) {
  switch (rule.kind) {
    case SplitRule::Kind::two_pow_ell:
      return "2^l";
    case SplitRule::Kind::two_pow_ell_over_sqrt_ell:
      return "2^l/sqrt(l)";
    case SplitRule::Kind::constant:
      return "const:" + std::to_string(rule.constant_count);
  }
  return "?";
}

double MlmcConfig::alpha() const {
  if (alpha_hint) return *alpha_hint;
  return estimator == Estimator::new2 ? 1.0 : 0.5;
}

double MlmcConfig::beta() const {
  if (beta_hint) return *beta_hint;
  return estimator == Estimator::orig ? 0.5 : 1.0;
}

void MlmcConfig::validate(const ProblemSpec& spec) const {
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (refinement < 2) throw ConfigError("refinement factor must be at least 2");
  if (L_min < 1 || L_max < L_min) throw ConfigError("need 1 <= L_min <= L_max");
  if (fixed_L && *fixed_L < 0) throw ConfigError("fixed L must be non-negative");
  if (initial_samples < 2) throw ConfigError("initial sample count must be at least 2");
  if (threads < 1) throw ConfigError("thread count must be at least 1");
  if (!(alpha() > 0.0)) throw ConfigError("alpha must be positive");
  if (!(beta() > 0.0)) throw ConfigError("beta must be positive");
  steps_to_horizon(spec.horizon(), h0);
}

LevelParams level_params(const MlmcConfig& config, int level) {
  LevelParams p;
  p.level = level;
  p.h0 = config.h0;
  p.refinement = config.refinement;
  p.split_count = config.estimator == Estimator::orig ? 1 : config.m_rule.count(level);
  return p;
}

double MlmcResult::estimator_variance() const {
  double v = 0.0;
  for (const auto& lv : levels) v += lv.variance / static_cast<double>(lv.samples);
  return v;
}

std::vector<std::int64_t> optimal_samples(double epsilon, std::span<const double> costs,
                                          std::span<const double> variances) {
  double root_sum = 0.0;
  for (std::size_t l = 0; l < costs.size(); ++l) root_sum += std::sqrt(costs[l] * variances[l]);
  std::vector<std::int64_t> n(costs.size());
  for (std::size_t l = 0; l < costs.size(); ++l) {
    const double target = std::ceil(2.0 / (epsilon * epsilon) * root_sum * std::sqrt(variances[l] / costs[l]));
    n[l] = std::max<std::int64_t>(2, static_cast<std::int64_t>(target));
  }
  return n;
}

bool bias_converged(std::span<const double> means, double alpha, int refinement, double epsilon) {
  const std::size_t L = means.size() - 1;
  const double factor = std::pow(static_cast<double>(refinement), alpha);
  double worst = std::fabs(means[L]);
  if (L >= 1) worst = std::max(worst, std::fabs(means[L - 1]) / factor);
  return worst / (factor - 1.0) <= epsilon / std::sqrt(2.0);
}

double fitted_rate(std::span<const double> h, std::span<const double> y) {
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (y[i] != 0.0 && std::isfinite(y[i])) {
      lx.push_back(std::log(h[i]));
      ly.push_back(std::log(std::fabs(y[i])));
    }
  }
  if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

LevelStats sample_level(const ProblemSpec& spec, const LevelParams& params, BoundaryMode mode, std::uint64_t seed,
                        std::uint64_t first_index, std::int64_t count, int threads) {
  if (count <= 0) return {};
  const std::int64_t chunks = (count + kChunkSize - 1) / kChunkSize;
  std::vector<LevelStats> partial(static_cast<std::size_t>(chunks));

  auto run_chunk = [&](LevelSampler& sampler, std::int64_t c) {
    const std::int64_t begin = c * kChunkSize;
    const std::int64_t end = std::min(count, begin + kChunkSize);
    LevelStats& acc = partial[static_cast<std::size_t>(c)];
    for (std::int64_t i = begin; i < end; ++i) acc.record(sampler(first_index + static_cast<std::uint64_t>(i)));
  };

  const int workers = static_cast<int>(std::min<std::int64_t>(threads, chunks));
  if (workers <= 1) {
    LevelSampler sampler(spec, params, mode, seed);
    for (std::int64_t c = 0; c < chunks; ++c) run_chunk(sampler, c);
  } else {
    std::atomic<std::int64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        try {
          LevelSampler sampler(spec, params, mode, seed);
          for (std::int64_t c = next++; c < chunks; c = next++) run_chunk(sampler, c);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = chunks;
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  LevelStats total;
  for (const auto& p : partial) total += p;
  return total;
}

namespace {

MlmcResult summarize(const MlmcConfig& config, const std::vector<LevelStats>& stats) {
  MlmcResult result;
  result.chosen_L = static_cast<int>(stats.size()) - 1;
  std::vector<double> h;
  std::vector<double> means;
  std::vector<double> vars;
  for (std::size_t l = 0; l < stats.size(); ++l) {
    const auto params = level_params(config, static_cast<int>(l));
    LevelRecord rec;
    rec.level = static_cast<int>(l);
    rec.h = params.h_fine();
    rec.split_count = params.level == 0 ? 1 : params.split_count;
    rec.samples = stats[l].count;
    rec.mean = stats[l].mean();
    rec.variance = stats[l].variance();
    rec.cost = stats[l].mean_cost();
    try {
      rec.kurtosis = kurtosis(stats[l]);
    } catch (const UndefinedKurtosis&) {
      rec.kurtosis = std::numeric_limits<double>::quiet_NaN();
    }
    rec.stats = stats[l];
    result.estimate += rec.mean;
    result.total_cost += stats[l].total_rng_cost;
    if (l >= 1) {
      h.push_back(rec.h);
      means.push_back(rec.mean);
      vars.push_back(rec.variance);
    }
    result.levels.push_back(rec);
  }
  result.fitted_alpha = fitted_rate(h, means);
  result.fitted_beta = fitted_rate(h, vars);
  return result;
}

// Weak-error model |E[Y_l]| = A K^(-alpha l) on levels >= 1, with A the
// inverse-variance weighted average of the per-level estimates
// m_l K^(alpha l). Returns the model's |E[Y_l]| for every level (level 0
// keeps its raw mean, it is not a correction).
std::vector<double> modelled_corrections(const std::vector<LevelStats>& stats, double alpha_factor) {
  double weighted = 0.0;
  double weights = 0.0;
  double scale = 1.0;
  for (std::size_t l = 1; l < stats.size(); ++l) {
    scale *= alpha_factor;
    const auto& s = stats[l];
    const double se2 = std::max(s.variance(), std::numeric_limits<double>::min()) / static_cast<double>(s.count);
    const double w = 1.0 / (se2 * scale * scale);
    weighted += w * s.mean() * scale;
    weights += w;
  }
  const double amplitude = weights > 0.0 ? std::fabs(weighted / weights) : 0.0;
  std::vector<double> means(stats.size());
  means[0] = std::fabs(stats[0].mean());
  scale = 1.0;
  for (std::size_t l = 1; l < stats.size(); ++l) {
    scale *= alpha_factor;
    means[l] = amplitude / scale;
  }
  return means;
}

}  // namespace

MlmcResult run(const ProblemSpec& spec, const MlmcConfig& config) {
  config.validate(spec);
  const BoundaryMode mode = boundary_mode(config.estimator);
  const double K = static_cast<double>(config.refinement);
  const double alpha_factor = std::pow(K, config.alpha());
  const double beta_factor = std::pow(K, config.beta());
  int L = config.fixed_L.value_or(config.L_min);
  std::vector<LevelStats> stats(static_cast<std::size_t>(L + 1));

  auto draw = [&](int level, std::int64_t n) {
    auto& s = stats[static_cast<std::size_t>(level)];
    s += sample_level(spec, level_params(config, level), mode, config.seed, static_cast<std::uint64_t>(s.count), n,
                      config.threads);
  };

  for (int l = 0; l <= L; ++l) draw(l, config.initial_samples);

  while (true) {
    // Per-level cost and variance. A level without samples yet is
    // extrapolated from the one below; sparse variance estimates on levels
    // >= 2 are floored at half the geometric prediction from the level below.
    std::vector<double> costs(stats.size());
    std::vector<double> vars(stats.size());
    for (std::size_t l = 0; l < stats.size(); ++l) {
      if (stats[l].count == 0) {
        costs[l] = costs[l - 1] * K;
        vars[l] = vars[l - 1] / beta_factor;
        continue;
      }
      costs[l] = std::max(stats[l].mean_cost(), 1.0);
      vars[l] = stats[l].variance();
      if (l >= 2) vars[l] = std::max(vars[l], 0.5 * vars[l - 1] / beta_factor);
    }

    const auto target = optimal_samples(config.epsilon, costs, vars);
    std::vector<std::int64_t> extra(stats.size());
    bool settled = true;
    bool done = true;
    for (std::size_t l = 0; l < stats.size(); ++l) {
      extra[l] = std::max<std::int64_t>(0, target[l] - stats[l].count);
      if (static_cast<double>(extra[l]) > 0.01 * static_cast<double>(stats[l].count)) settled = false;
      if (extra[l] > 0) done = false;
    }

    const bool sampled = std::all_of(stats.begin(), stats.end(), [](const LevelStats& s) { return s.count > 0; });
    const auto means = sampled ? modelled_corrections(stats, alpha_factor) : std::vector<double>{};
    if (settled && !config.fixed_L && !bias_converged(means, config.alpha(), config.refinement, config.epsilon)) {
      if (L >= config.L_max) {
        throw LevelCapError("bias test not passed by L_max = " + std::to_string(config.L_max),
                            summarize(config, stats));
      }
      ++L;
      stats.emplace_back();
      continue;
    }
    if (done) {
      MlmcResult result = summarize(config, stats);
      result.bias_converged = bias_converged(means, config.alpha(), config.refinement, config.epsilon);
      return result;
    }
    for (int l = 0; l <= L; ++l) {
      if (extra[static_cast<std::size_t>(l)] > 0) draw(l, extra[static_cast<std::size_t>(l)]);
    }
  }
}

}  // namespace stopmc
