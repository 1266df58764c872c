#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ngs {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent stream keyed by (seed, stream...). Work items that derive
/// their generator this way give the same draws under any thread schedule.
inline Rng stream_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t s : stream) h = splitmix64(h ^ splitmix64(s + 0x632be59bd9b4e019ULL));
  return Rng(h);
}

}  // namespace ngs
