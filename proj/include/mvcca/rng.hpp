#pragma once

#include <cstdint>
#include <random>

namespace mvcca {

/// splitmix64 finalizer. Fixed forever: changing it changes every emitted file.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Order-dependent combination of two 64-bit words.
constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) noexcept {
  return mix64(h ^ mix64(v + 0x632BE59BD9B4E019ULL));
}

/// A (seed, stream_id) pair naming one reproducible draw sequence.
///
/// Streams never share state; two workers holding different stream ids can
/// sample concurrently and each sees the same numbers it would see alone.
struct SeededStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  /// Child stream `k` of this stream.
  SeededStream substream(std::uint64_t k) const noexcept {
    return {seed, hash_combine(stream_id, k)};
  }

  std::mt19937_64 engine() const {
    return std::mt19937_64(hash_combine(mix64(seed), stream_id));
  }

  friend bool operator==(const SeededStream&, const SeededStream&) = default;
};

/// Stream for Monte Carlo trial `trial`. Samplers take per-view children of
/// it via substream(), so the draw for (seed, trial, view) depends on nothing
/// else.
inline SeededStream trial_stream(std::uint64_t seed, std::uint64_t trial) noexcept {
  return {seed, hash_combine(0x747269616CULL, trial)};
}

/// Stream identifiers reserved for non-trial draws.
namespace streams {
inline constexpr std::uint64_t kEnsemble = 0x656E73656D626C65ULL;  // "ensemble"
inline constexpr std::uint64_t kMaps = 0x6D617073ULL;               // "maps"
}  // namespace streams

}  // namespace mvcca
