#ifndef RIESZWAVE_RNG_HPP
#define RIESZWAVE_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

namespace rieszwave {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of an independent substream identified by a master seed and a tuple
/// of integer ids (e.g. path, time index, component).
inline std::uint64_t substream_seed(std::uint64_t master, std::initializer_list<std::uint64_t> ids) {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t id : ids) h = splitmix64(h ^ splitmix64(id + 0x632be59bd9b4e019ULL));
  return h;
}

}  // namespace rieszwave

#endif  // RIESZWAVE_RNG_HPP
