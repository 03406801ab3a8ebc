#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>

namespace endgame {

/// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// 64-bit finalizer from SplitMix64.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// FNV-1a over a byte string; used to turn cell coordinates into seeds.
std::uint64_t hash_text(std::string_view text);

/// Seed for one cell/replication pair. Only the coordinates that are hashed
/// influence the result, so editing one cell never shifts another's draws.
std::uint64_t derive_seed(std::uint64_t root, std::string_view coordinates,
                          std::uint64_t replication);

/// Counter-based random stream.
///
/// A stream is a (key, block) pair plus a position; output i of a stream is
/// philox(key, {i, block}). `split` derives an independent key, `at` selects
/// a block within the same key, so period-indexed draws can be addressed
/// directly without consuming anything. Copies are cheap and independent.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream() : RandomStream(0) {}
  explicit RandomStream(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer on [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n);
  bool bernoulli(double p) { return uniform() < p; }
  /// Standard normal via Box-Muller (two uniforms per call, no caching).
  double normal();

  /// Independent child stream labelled by `tag`.
  RandomStream split(std::uint64_t tag) const;
  RandomStream split(std::string_view tag) const { return split(hash_text(tag)); }
  /// Same key, fresh block `index`, position 0.
  RandomStream at(std::uint64_t index) const;

  std::uint64_t key() const { return key_; }
  std::uint64_t block() const { return block_; }

 private:
  RandomStream(std::uint64_t key, std::uint64_t block) : key_(key), block_(block) {}

  std::uint64_t key_;
  std::uint64_t block_ = 0;
  std::uint64_t position_ = 0;
  std::uint64_t buffered_ = 0;
  bool has_buffered_ = false;
};

}  // namespace endgame
