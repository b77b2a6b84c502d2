#pragma once

#include <cstdint>

namespace bpsim {

// Counter-based randomness: every draw is a pure function of
// (seed, stream, slot, draw). No mutable generator state means traces are
// reproducible regardless of evaluation order, and a scaled rerun of the same
// scenario consumes the exact same underlying uniforms.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t mix(std::uint64_t seed, std::uint64_t stream,
                         std::uint64_t slot, std::uint64_t draw = 0) {
  std::uint64_t h = splitmix64(seed ^ 0x243f6a8885a308d3ull);
  h = splitmix64(h ^ stream);
  h = splitmix64(h ^ slot);
  h = splitmix64(h ^ draw);
  return h;
}

// Uniform on [0, 1), 53 random bits.
inline double uniform01(std::uint64_t seed, std::uint64_t stream,
                        std::uint64_t slot, std::uint64_t draw = 0) {
  return static_cast<double>(mix(seed, stream, slot, draw) >> 11) * 0x1.0p-53;
}

}  // namespace bpsim
