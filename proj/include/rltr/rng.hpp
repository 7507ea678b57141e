#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace rltr {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent seed from a base seed and a path of indices, e.g.
/// (global seed, iteration, task index, rollout index). Parallel workers each
/// build their own stream from such a path so results never depend on
/// scheduling.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = splitmix64(base);
  for (auto p : path) {
    h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  }
  return h;
}

inline Rng make_stream(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
  return Rng{derive_seed(base, path)};
}

/// Uniform double in [0, 1) built from the top 53 bits.
inline double uniform01(Rng& rng) noexcept {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) noexcept {
  return uniform01(rng) < p;
}

/// Uniform integer in [lo, hi].
inline std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

// Stream tags for derive_seed paths.
namespace stream {
inline constexpr std::uint64_t kTasks = 0x7461736b;
inline constexpr std::uint64_t kEvalTasks = 0x6576616c;
inline constexpr std::uint64_t kColdStart = 0x636f6c64;
inline constexpr std::uint64_t kTrain = 0x7472616e;
inline constexpr std::uint64_t kEval = 0x65767274;
inline constexpr std::uint64_t kJudgeStudy = 0x6a756467;
}  // namespace stream

}  // namespace rltr
