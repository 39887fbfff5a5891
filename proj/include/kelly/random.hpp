#pragma once

// Seeded random streams.
//
// Every sampler in the library draws from a `Stream`, a xoshiro256** generator
// whose variates are computed by portable algorithms (no std:: distributions,
// whose output is implementation-defined). A stream is a pure value: copying it
// forks an identical sequence, and `Stream::for_realization` derives independent
// per-worker streams from a master seed.

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

namespace kelly {

/// SplitMix64 step; used for seeding and for hashing (seed, index) pairs.
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stream key for realization `index` of a run seeded with `master_seed`.
constexpr std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) noexcept {
  std::uint64_t s = master_seed;
  std::uint64_t a = splitmix64(s);
  std::uint64_t t = a ^ (index * 0xd1b54a32d192ed03ULL);
  return splitmix64(t);
}

class Stream {
public:
  using result_type = std::uint64_t;

  explicit constexpr Stream(std::uint64_t seed) noexcept {
    std::uint64_t s = seed;
    for (auto& word : state_) word = splitmix64(s);
  }

  static constexpr Stream for_realization(std::uint64_t master_seed, std::uint64_t index) noexcept {
    return Stream(derive_seed(master_seed, index));
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    const std::uint64_t result = std::rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = std::rotl(state_[3], 45);
    return result;
  }

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform_open() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal variate (Marsaglia polar method; the spare is part of the state).
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
      u = 2.0 * uniform_open() - 1.0;
      v = 2.0 * uniform_open() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * scale;
    has_spare_ = true;
    return u * scale;
  }

  /// Student-t with two degrees of freedom by exact inversion of its CDF.
  double student_t2() noexcept {
    const double u = uniform_open();
    return (2.0 * u - 1.0) / std::sqrt(2.0 * u * (1.0 - u));
  }

  friend constexpr bool operator==(const Stream&, const Stream&) = default;

private:
  std::uint64_t state_[4]{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace kelly
