#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace profiler {

inline std::string trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

// FNV-1a, used for content fingerprints throughout the pipeline.
inline std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v);

// Derives an independent RNG stream from a base seed and a label
// (stage name, record id, ...). All pipeline randomness flows through this.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view label) {
  return fnv1a(label, base ^ 0x9e3779b97f4a7c15ULL);
}

inline std::mt19937_64 seeded_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

// Unbiased enough for test-corpus generation; avoids the
// implementation-defined std::uniform_int_distribution.
inline std::uint64_t rand_below(std::mt19937_64& rng, std::uint64_t n) {
  return n == 0 ? 0 : rng() % n;
}

inline double rand_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

}  // namespace profiler
