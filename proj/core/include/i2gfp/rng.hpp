#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace i2gfp {

// splitmix64: derives independent sub-seeds from (seed, index) pairs so that
// per-sample randomness never depends on processing order.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline uint64_t sub_seed(uint64_t seed, uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 1));
}

inline std::string serialize_engine(const std::mt19937_64& eng) {
  std::ostringstream os;
  os << eng;
  return os.str();
}

inline void restore_engine(std::mt19937_64& eng, const std::string& state) {
  std::istringstream is(state);
  is >> eng;
}

}  // namespace i2gfp
