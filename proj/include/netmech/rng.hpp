#pragma once

#include <cstdint>
#include <random>

namespace netmech {

// Mixes a counter into a well-spread 64-bit value. Used to derive
// independent per-sample / per-stream seeds from one root seed so that
// Monte-Carlo samples are order-independent and safe to parallelize.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t root, std::uint64_t stream) {
  return mix64(root ^ mix64(stream + 0x5851f42d4c957f2dULL));
}

// Thin wrapper over std::mt19937_64. The engine's raw output is pinned by
// the standard; the float/int mappings live here because the standard
// distributions are not bit-reproducible across library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
  }

  // Uniform integer in [0, n). Multiply-shift map; bias is < n / 2^64.
  int uniform_int(int n) {
    const auto wide = static_cast<unsigned __int128>(next_u64()) *
                      static_cast<unsigned __int128>(n);
    return static_cast<int>(wide >> 64);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace netmech
