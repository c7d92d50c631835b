#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace gjsscc {

// Counter-based randomness. Every random quantity in the library is a pure
// function of (seed, counter), so chunked or parallel evaluation reproduces
// serial results bit for bit.

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) noexcept {
  return mix64(seed ^ mix64(value + 0x632BE59BD9B4E019ULL));
}

inline std::uint64_t hash_combine(std::uint64_t seed, std::string_view tag) noexcept {
  std::uint64_t h = seed;
  for (unsigned char c : tag) h = hash_combine(h, c);
  return hash_combine(h, tag.size());
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> parts) noexcept {
  for (auto p : parts) seed = hash_combine(seed, p);
  return seed;
}

/// Uniform double in [0, 1) with 53 random bits.
constexpr double to_unit(std::uint64_t x) noexcept {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

/// Seeded stream; draw i is mix64(seed, i), so position is explicit state.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t position = 0) noexcept
      : seed_(seed), position_(position) {}

  std::uint64_t next_u64() noexcept { return at(position_++); }
  double next_unit() noexcept { return to_unit(next_u64()); }
  std::uint64_t at(std::uint64_t index) const noexcept { return hash_combine(seed_, index); }

  /// Uniform integer in [0, bound) by Lemire's multiply-shift (bias < 2^-64 * bound).
  std::uint64_t next_below(std::uint64_t bound) noexcept {
    __extension__ using u128 = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<u128>(next_u64()) * bound) >> 64);
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t position() const noexcept { return position_; }

 private:
  std::uint64_t seed_;
  std::uint64_t position_;
};

}  // namespace gjsscc
