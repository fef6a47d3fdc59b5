#pragma once

#include <cstdint>
#include <random>

namespace qjm {

/// Seeded pseudo-random stream. Every variate the library produces is derived
/// from `next()` with library code only (no std::*_distribution), so a given
/// seed reproduces the same draws on any conforming toolchain.
///
/// A stream is not thread-safe; give each worker its own stream.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via the Marsaglia polar method; the second variate of
  /// each pair is cached.
  double standard_normal();

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer.
std::uint64_t mix_seed(std::uint64_t x) noexcept;

/// Seed of the `index`-th independent child stream of `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

}  // namespace qjm
