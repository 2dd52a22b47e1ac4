#pragma once

#include <cstdint>

// Counter-based random numbers. Every draw is addressed by
// (base_seed, replication_id, stream, index, step, draw) and is computed
// statelessly, so any particle/step/thread order reproduces the same values.

namespace mfg::rng {

// splitmix64 finalizer, used to derive per-replication keys.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t stream_key(std::uint64_t base_seed, std::uint64_t replication_id) {
  return splitmix64(splitmix64(base_seed) + replication_id);
}

// Philox2x64-10. One 64-bit output word per 128-bit counter.
constexpr std::uint64_t philox2x64(std::uint64_t key, std::uint64_t c0, std::uint64_t c1) {
  constexpr std::uint64_t kMul = 0xD2B74407B1CE6E93ull;
  constexpr std::uint64_t kKeyBump = 0x9E3779B97F4A7C15ull;
  for (int r = 0; r < 10; ++r) {
    const auto prod = static_cast<unsigned __int128>(kMul) * c0;
    const auto hi = static_cast<std::uint64_t>(prod >> 64);
    const auto lo = static_cast<std::uint64_t>(prod);
    c0 = hi ^ key ^ c1;
    c1 = lo;
    key += kKeyBump;
  }
  return c0;
}

// Disjoint stream tags. "index" below is the particle/component/sample id.
enum class Stream : std::uint64_t {
  idio = 1,      // idiosyncratic Brownian increments, per (index=particle, step)
  common = 2,    // common-noise increments, per step
  init = 3,      // initial states, per index=particle
  iid = 4,       // plain i.i.d. sampling, per (index, step=block)
  oracle_w = 5,  // common noise driving the limit oracle, per step
  xi = 6,        // oracle martingale kicks, per (index=component, step)
  theta0 = 7,    // oracle initial condition, per index=component
};

// step < 2^40, draw < 2^16.
constexpr std::uint64_t pack_counter(Stream s, std::uint64_t step, std::uint64_t draw = 0) {
  return (static_cast<std::uint64_t>(s) << 56) | ((step & 0xFFFFFFFFFFull) << 16) |
         (draw & 0xFFFFull);
}

// Maps to (0,1), symmetric about 1/2, never returns 0 or 1. 52-bit
// resolution: with 53 bits the top value 1 - 2^-54 would round to 1.0.
constexpr double to_unit(std::uint64_t x) {
  return static_cast<double>(x >> 12) * 0x1.0p-52 + 0x1.0p-53;
}

// Inverse standard normal CDF (Wichura's PPND16), |error| < 1e-15 in double.
double normal_inv_cdf(double p);

inline double uniform_draw(std::uint64_t key, std::uint64_t index, Stream s, std::uint64_t step,
                           std::uint64_t draw = 0) {
  return to_unit(philox2x64(key, index, pack_counter(s, step, draw)));
}

inline double normal_draw(std::uint64_t key, std::uint64_t index, Stream s, std::uint64_t step,
                          std::uint64_t draw = 0) {
  return normal_inv_cdf(uniform_draw(key, index, s, step, draw));
}

}  // namespace mfg::rng
