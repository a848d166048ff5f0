#pragma once

#include <cstdint>

namespace odb {

// Deterministic RNG contract shared by every module:
//
//   * All randomness flows from 64-bit root seeds through xoshiro256++
//     generators, seeded via SplitMix64 expansion.
//   * Child streams derive as mix_seed(root, purpose_tag, index), so a
//     trial owns one root seed and each (purpose, arm) pair gets an
//     independent stream. Parallel trials never share generator state.
//   * Gaussian variates use the Marsaglia polar transform, fixed once;
//     identical seeds therefore give bit-identical trajectories on any
//     platform with IEEE-754 doubles.

inline constexpr std::uint64_t kPurposeOffline = 0x4f46464c494e4531ULL;
inline constexpr std::uint64_t kPurposeOnline = 0x4f4e4c494e453131ULL;
inline constexpr std::uint64_t kPurposeTrial = 0x545249414c313131ULL;

// Advances `state` and returns the next SplitMix64 output.
std::uint64_t splitmix64(std::uint64_t& state);

// Derives the child seed for (purpose, index) under a root seed.
std::uint64_t mix_seed(std::uint64_t root, std::uint64_t purpose,
                       std::uint64_t index);

class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53 random bits.
  double next_double();

 private:
  std::uint64_t s_[4];
};

// Sequential stream of reward draws for one (trial, purpose, arm) triple.
// The n-th call is a pure function of the seed, which is what makes
// shared-seed trajectory comparisons across policies meaningful.
class RewardStream {
 public:
  explicit RewardStream(std::uint64_t seed) : gen_(seed) {}

  // Standard normal via the polar method (one spare cached).
  double gaussian();

  bool bernoulli(double p);

 private:
  Xoshiro256pp gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace odb
