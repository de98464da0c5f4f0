#pragma once

#include <cstdint>
#include <string_view>

namespace netexp {

// Streams keep independent draws for the same (seed, unit) from colliding.
enum class HashStream : std::uint64_t {
  assignment = 0x41,
  link_routing = 0x4c,
  account = 0x61,
  access_rate = 0x62,
  queue_drain = 0x64,
  arrivals = 0x72,
  interval_label = 0x73,
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t stable_hash(std::uint64_t seed, std::uint64_t key,
                                    HashStream stream = HashStream::assignment) noexcept {
  return mix64(mix64(seed ^ (static_cast<std::uint64_t>(stream) * 0xd6e8feb86659fd93ULL)) ^ key);
}

/// Uniform in [0, 1) with 53 bits of resolution.
constexpr double stable_uniform(std::uint64_t seed, std::uint64_t key,
                                HashStream stream = HashStream::assignment) noexcept {
  return static_cast<double>(stable_hash(seed, key, stream) >> 11) * 0x1.0p-53;
}

/// 64-bit FNV-1a, used for config and log fingerprints.
constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace netexp
