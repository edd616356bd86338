#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace cbsel {

// Named randomness sources. Each gets its own engine so that switching one
// source on or off never shifts the draws of another.
enum class StreamId : std::uint64_t {
  Positions = 1,
  Shadowing = 2,
  Selection = 3,
  Symbols = 4,
  Redraw = 5,
  Appendix = 6,
};

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for child `a`, grandchild `b` of `base`:
///   mix64(mix64(mix64(base) ^ a) ^ b)
/// with `a` and `b` first spread by the golden-ratio increment so that
/// small consecutive indices land far apart.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                    std::uint64_t b = 0) noexcept {
  constexpr std::uint64_t golden = 0x9e3779b97f4a7c15ULL;
  return mix64(mix64(mix64(base) ^ (a * golden + 1)) ^ (b * golden + 2));
}

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double normal(double mean, double stddev) {
    return mean + stddev * normal_(engine_);
  }

  /// Uniform index in [0, n). n must be positive.
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Deterministic tree of seeds rooted at one master seed.
class SeedTree {
 public:
  explicit SeedTree(std::uint64_t master) noexcept : seed_(master) {}

  std::uint64_t seed() const noexcept { return seed_; }

  RngStream stream(StreamId id) const {
    return RngStream(derive_seed(seed_, static_cast<std::uint64_t>(id)));
  }

  /// Indexed substream of a named source (e.g. one per selection trial).
  RngStream stream(StreamId id, std::uint64_t index) const {
    return RngStream(
        derive_seed(seed_, static_cast<std::uint64_t>(id), index + 1));
  }

  SeedTree child(std::uint64_t index) const noexcept {
    return SeedTree(derive_seed(seed_, 0xC0FFEEULL, index));
  }

 private:
  std::uint64_t seed_;
};

}  // namespace cbsel
