#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace nuidx {

/// SplitMix64 finalizer. Used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// FNV-1a over a string; stable across platforms.
constexpr std::uint64_t hash_name(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seed for stream `id` under `master`: splitmix64(splitmix64(master) ^ id).
/// Streams are a pure function of (master, id), so replicate results do not
/// depend on scheduling order or worker count.
constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t id) noexcept {
  return splitmix64(splitmix64(master) ^ splitmix64(id + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t a,
                                    std::uint64_t b) noexcept {
  return stream_seed(stream_seed(master, a), b);
}

/// The random stream handle passed explicitly to every sampling routine.
using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) {
  // 53 random bits -> [0,1)
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform on the open interval (0,1).
inline double uniform_open(Rng& rng) {
  double u;
  do {
    u = uniform01(rng);
  } while (u == 0.0);
  return u;
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

}  // namespace nuidx
