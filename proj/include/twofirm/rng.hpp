#pragma once

#include <cstdint>
#include <random>

namespace twofirm {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stream for path i is a pure function of (seed, i).
inline std::mt19937_64 path_engine(std::uint64_t seed, std::uint64_t path_id) {
  return std::mt19937_64{splitmix64(splitmix64(seed) ^ splitmix64(~path_id))};
}

}  // namespace twofirm
