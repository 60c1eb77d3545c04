#pragma once

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include <concepts>
#include <cstdint>

namespace bnp {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seed for the independent substream of one Monte Carlo path.
inline constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t path) {
  return splitmix64(splitmix64(seed) ^ splitmix64(path + 0x632BE59BD9B4E019ULL));
}

template <class G>
concept NormalSource = requires(G& g) {
  { g.normal() } -> std::convertible_to<double>;
};

/// Seeded generator handing out standard normals (ziggurat) and uniforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng for_path(std::uint64_t seed, std::uint64_t path) {
    return Rng(substream_seed(seed, path));
  }

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }

  // Same sequence as std::mt19937_64, but Boost's generator is faster here.
  boost::random::mt19937_64& engine() { return engine_; }

 private:
  boost::random::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_{0.0, 1.0};
  boost::random::uniform_01<double> uniform_{};
};

}  // namespace bnp
