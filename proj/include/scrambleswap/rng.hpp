#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace scrambleswap {

namespace detail {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
inline std::uint64_t sm64_mix(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

inline constexpr std::uint64_t sm64_gamma = 0x9E3779B97F4A7C15ULL;

} // namespace detail

/// Root of a deterministic random stream. Disjoint sub-streams for parallel
/// tasks are obtained with derive(task_index); the derivation is
///   child = mix(mix(value + gamma) ^ mix(task_index + 1))
/// with mix the SplitMix64 finalizer, so (seed, task path) fixes every stream.
struct Seed {
  std::uint64_t value = 0;

  Seed derive(std::uint64_t task_index) const {
    const std::uint64_t a = detail::sm64_mix(value + detail::sm64_gamma);
    const std::uint64_t b = detail::sm64_mix(task_index + 1);
    return Seed{detail::sm64_mix(a ^ b)};
  }
};

/// SplitMix64 stream with Box-Muller gaussians. The uniform and gaussian
/// sequences are fixed by this implementation (not the platform), so seeded
/// outputs are bit-reproducible.
class Rng {
public:
  explicit Rng(Seed seed) : state_(seed.value) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += detail::sm64_gamma);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_pos() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; generates pairs, caches the second.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * M_PI * u2;
    spare_ = r * std::sin(th);
    have_spare_ = true;
    return r * std::cos(th);
  }

  std::complex<double> normal_cplx() {
    const double re = normal();
    const double im = normal();
    return {re, im};
  }

private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

} // namespace scrambleswap
