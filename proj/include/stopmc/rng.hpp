#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace stopmc {

namespace detail {
struct ZigguratTables;
}

// Counter-based normal variates. Every stream is addressed by its logical
// position in the computation, so split continuations that are spawned
// data-dependently still draw reproducible noise regardless of scheduling.

enum class StreamRole : std::uint8_t { joint = 0, fine_split = 1, coarse_split = 2, auxiliary = 3 };

struct StreamKey {
  std::uint64_t seed = 0;
  std::uint32_t level = 0;         // < 256
  std::uint64_t sample_index = 0;  // < 2^48
  StreamRole role = StreamRole::joint;
  std::uint32_t split_index = 0;   // m for the split roles, 0 otherwise

  friend bool operator==(const StreamKey&, const StreamKey&) = default;
};

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
PhiloxCounter philox4x32(PhiloxCounter counter, PhiloxKey key);

/// Standard normals from the Philox stream of one key, via a 128-layer
/// ziggurat. Each attempt consumes one 64-bit word.
class NormalStream {
 public:
  explicit NormalStream(const StreamKey& key);

  double next();
  void fill(std::span<double> out) {
    for (double& z : out) z = next();
  }

  const StreamKey& key() const { return key_; }

 private:
  std::uint64_t next_word();
  double next_uniform();

  StreamKey key_;
  const detail::ZigguratTables* tables_;
  PhiloxKey philox_key_{};
  std::uint32_t counter_hi_;
  std::uint32_t counter_mid_;
  std::uint32_t counter_top_;
  std::uint32_t block_ = 0;
  std::array<std::uint64_t, 2> words_{};
  std::size_t word_cursor_ = 2;
};

/// First `count` standard normals of the stream addressed by `key`.
std::vector<double> normals(const StreamKey& key, std::size_t count);

}  // namespace stopmc
