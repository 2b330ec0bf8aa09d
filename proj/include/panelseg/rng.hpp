#ifndef PANELSEG_RNG_HPP
#define PANELSEG_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

namespace panelseg {

// Deterministic substream seeding.  Every randomized task derives its own
// generator from (master seed, stream tags) so results never depend on
// execution order or thread count.

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Stream tags: keep stable, they are part of the reproducibility contract.
namespace stream {
inline constexpr std::uint64_t noise_v = 0x01;
inline constexpr std::uint64_t noise_h = 0x02;
inline constexpr std::uint64_t signal = 0x03;
inline constexpr std::uint64_t boot_shock = 0x04;
inline constexpr std::uint64_t boot_idio = 0x05;
inline constexpr std::uint64_t null_rep = 0x06;
inline constexpr std::uint64_t alt_rep = 0x07;
inline constexpr std::uint64_t sbs_oracle = 0x08;
inline constexpr std::uint64_t jirak_boot = 0x09;
inline constexpr std::uint64_t generic = 0x0A;
}  // namespace stream

inline std::uint64_t mix_seed(std::uint64_t master,
                              std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = master;
  std::uint64_t out = splitmix64(s);
  for (std::uint64_t t : tags) {
    s ^= t * 0xD1B54A32D192ED03ull;
    out = splitmix64(s);
  }
  return out;
}

inline std::mt19937_64 make_rng(std::uint64_t master,
                                std::initializer_list<std::uint64_t> tags) {
  return std::mt19937_64(mix_seed(master, tags));
}

}  // namespace panelseg

#endif  // PANELSEG_RNG_HPP
