#include "stopmc/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace stopmc {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

namespace detail {

// 128-layer ziggurat (Marsaglia & Tsang 2000, in Doornik's 2005 formulation
// with independent bits for the layer index and the abscissa).
struct ZigguratTables {
  static constexpr int kLayers = 128;
  static constexpr double kTailStart = 3.442619855899;
  static constexpr double kLayerArea = 9.91256303526217e-3;

  std::array<double, kLayers + 1> x{};
  std::array<double, kLayers> ratio{};

  ZigguratTables() {
    double f = std::exp(-0.5 * kTailStart * kTailStart);
    x[0] = kLayerArea / f;
    x[1] = kTailStart;
    x[kLayers] = 0.0;
    for (int i = 2; i < kLayers; ++i) {
      x[i] = std::sqrt(-2.0 * std::log(kLayerArea / x[i - 1] + f));
      f = std::exp(-0.5 * x[i] * x[i]);
    }
    for (int i = 0; i < kLayers; ++i) ratio[i] = x[i + 1] / x[i];
  }
};

}  // namespace detail

namespace {

const detail::ZigguratTables& ziggurat() {
  static const detail::ZigguratTables tables;
  return tables;
}

}  // namespace

NormalStream::NormalStream(const StreamKey& key) : key_(key), tables_(&ziggurat()) {
  if (key.level >= 256) throw std::invalid_argument("StreamKey: level must be < 256");
  if (key.sample_index >= (std::uint64_t{1} << 48)) throw std::invalid_argument("StreamKey: sample_index must be < 2^48");
  philox_key_ = {static_cast<std::uint32_t>(key.seed), static_cast<std::uint32_t>(key.seed >> 32)};
  counter_mid_ = key.split_index;
  counter_hi_ = static_cast<std::uint32_t>(key.sample_index);
  counter_top_ = static_cast<std::uint32_t>(key.sample_index >> 32) | (key.level << 16) |
                 (static_cast<std::uint32_t>(key.role) << 24);
}

std::uint64_t NormalStream::next_word() {
  if (word_cursor_ == words_.size()) {
    const PhiloxCounter bits = philox4x32({block_++, counter_mid_, counter_hi_, counter_top_}, philox_key_);
    words_[0] = (static_cast<std::uint64_t>(bits[0]) << 32) | bits[1];
    words_[1] = (static_cast<std::uint64_t>(bits[2]) << 32) | bits[3];
    word_cursor_ = 0;
  }
  return words_[word_cursor_++];
}

double NormalStream::next_uniform() {
  return (static_cast<double>(next_word() >> 11) + 0.5) * 0x1.0p-53;
}

double NormalStream::next() {
  const auto& z = *tables_;
  for (;;) {
    const std::uint64_t word = next_word();
    const auto layer = static_cast<std::size_t>(word & 0x7F);
    // Upper 53 bits as a uniform on (-1, 1).
    const double u = 2.0 * ((static_cast<double>(word >> 11) + 0.5) * 0x1.0p-53) - 1.0;
    if (std::fabs(u) < z.ratio[layer]) return u * z.x[layer];
    if (layer == 0) {
      double tail;
      double y;
      do {
        tail = std::log(next_uniform()) / detail::ZigguratTables::kTailStart;
        y = std::log(next_uniform());
      } while (-2.0 * y < tail * tail);
      return u < 0.0 ? tail - detail::ZigguratTables::kTailStart : detail::ZigguratTables::kTailStart - tail;
    }
    const double x = u * z.x[layer];
    const double f0 = std::exp(-0.5 * (z.x[layer] * z.x[layer] - x * x));
    const double f1 = std::exp(-0.5 * (z.x[layer + 1] * z.x[layer + 1] - x * x));
    if (f1 + next_uniform() * (f0 - f1) < 1.0) return x;
  }
}

std::vector<double> normals(const StreamKey& key, std::size_t count) {
  std::vector<double> out(count);
  NormalStream stream(key);
  stream.fill(out);
  return out;
}

}  // namespace stopmc
