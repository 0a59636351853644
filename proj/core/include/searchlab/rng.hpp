#pragma once

#include <cstdint>
#include <random>

namespace searchlab {

// std::mt19937_64 output is fully specified by the standard; the standard
// distributions are not, so bounded draws go through uniform_int below to
// keep datasets identical across toolchains.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent stream seed for item `index` of a run seeded with `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Uniform integer in [lo, hi] by rejection; lo <= hi required.
template <typename Int>
Int uniform_int(std::mt19937_64& engine, Int lo, Int hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
  if (span == UINT64_MAX) return static_cast<Int>(engine());
  const std::uint64_t range = span + 1;
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % range);
  std::uint64_t draw = engine();
  while (draw >= limit) draw = engine();
  return static_cast<Int>(static_cast<std::uint64_t>(lo) + draw % range);
}

}  // namespace searchlab
