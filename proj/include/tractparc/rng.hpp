#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

#include "tractparc/geometry.hpp"

namespace tractparc {

// All randomness in the toolkit flows through this generator so that results
// are reproducible byte-for-byte across platforms and standard libraries.
// std::mt19937 would pin the bit stream but not the distributions, which the
// standard leaves implementation-defined; the samplers below are spelled out
// instead.

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

}  // namespace detail

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Derives an independent stream seed from a master seed and a list of words
// (typically a tag hash plus indices). Used to give every subject, plane and
// epoch its own substream so parallel and serial runs agree.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> words) {
  std::uint64_t s = master;
  (void)detail::splitmix64(s);
  for (std::uint64_t w : words) {
    s ^= w;
    (void)detail::splitmix64(s);
  }
  return s;
}

// xoshiro256++ seeded via splitmix64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = detail::splitmix64(sm);
  }

  static Rng substream(std::uint64_t master, std::string_view tag,
                       std::uint64_t a = 0, std::uint64_t b = 0) {
    return Rng(derive_seed(master, {fnv1a64(tag), a, b}));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = detail::rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // Uniform integer in [0, n). Modulo bias is negligible for n << 2^64 and
  // the mapping is fixed, which is what the determinism contract needs.
  std::uint64_t uniform_int(std::uint64_t n) { return next_u64() % n; }

  // Box-Muller; draws two uniforms per call, no cached spare.
  double normal(double mean = 0.0, double stddev = 1.0) {
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(2.0 * kPi * u2);
  }

  Vec3 unit_vector() {
    // Marsaglia-style: z uniform on [-1,1], azimuth uniform.
    const double z = uniform(-1.0, 1.0);
    const double phi = uniform(0.0, 2.0 * kPi);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {r * std::cos(phi), r * std::sin(phi), z};
  }

 private:
  std::uint64_t s_[4];
};

}  // namespace tractparc
