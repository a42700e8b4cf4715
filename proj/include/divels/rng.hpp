#pragma once

#include <cstdint>
#include <random>

namespace divels {

using Rng = std::mt19937_64;

/// Independent sub-streams of one run seed. Each consumer owns its stream so
/// that swapping the policy never perturbs the environment draws.
enum class Stream : std::uint32_t {
  EnvSampling = 0,
  Rounds = 1,
  Policy = 2,
  RewardNoise = 3,
  Evaluation = 4,
};

inline std::uint64_t stream_seed(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), 0x9e3779b9u};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[1]) << 32) | words[0];
}

inline Rng make_stream(std::uint64_t seed, Stream stream) {
  return Rng(stream_seed(seed, stream));
}

}  // namespace divels
