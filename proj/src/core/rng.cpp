#include "core/rng.hpp"

#include <cmath>

namespace odb {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t mix_seed(std::uint64_t root, std::uint64_t purpose,
                       std::uint64_t index) {
  std::uint64_t state = root;
  state = splitmix64(state) ^ purpose;
  state = splitmix64(state) ^ index;
  return splitmix64(state);
}

namespace {
inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}
}  // namespace

Xoshiro256pp::Xoshiro256pp(std::uint64_t seed) {
  // SplitMix64 expansion; never yields the all-zero state.
  for (auto& word : s_) word = splitmix64(seed);
}

std::uint64_t Xoshiro256pp::next_u64() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Xoshiro256pp::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RewardStream::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double x, y, s;
  do {
    x = 2.0 * gen_.next_double() - 1.0;
    y = 2.0 * gen_.next_double() - 1.0;
    s = x * x + y * y;
  } while (s >= 1.0 || s == 0.0);
  const double r = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = y * r;
  has_spare_ = true;
  return x * r;
}

bool RewardStream::bernoulli(double p) { return gen_.next_double() < p; }

}  // namespace odb
