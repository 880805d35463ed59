#pragma once

#include <cstdint>
#include <random>

namespace dpopt {

// SplitMix64 finalizer; used to derive independent substreams from
// (seed, counter) pairs so generation order never matters.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t counter) {
  return splitmix64(splitmix64(seed) ^ splitmix64(counter ^ 0xa5a5a5a5a5a5a5a5ULL));
}

inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t counter = 0) {
  return std::mt19937_64(mix_seed(seed, counter));
}

}  // namespace dpopt
