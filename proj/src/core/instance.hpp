#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace odb {

// Product of a pooling weight in [0, 1] with an extended-real factor.
// Fixed convention 0 * (+inf) = 0, so arms with no offline samples keep
// finite indices even under an infinite bias bound.
inline double weight_times(double weight, double x) {
  return weight == 0.0 ? 0.0 : weight * x;
}

// One arm's online and offline reward means; both laws have variance 1.
struct GaussianArmPair {
  double mu_on = 0.0;
  double mu_off = 0.0;
};

struct MabInstance {
  std::vector<GaussianArmPair> arms;
  std::vector<std::int64_t> offline_counts;  // T_S(a) >= 0
  std::int64_t horizon = 0;                  // T >= 1

  std::size_t num_arms() const { return arms.size(); }

  // Throws PreconditionError unless K >= 1, T >= 1, counts are
  // non-negative, and all means are finite.
  void validate() const;
};

// Per-arm upper bound on |mu_off - mu_on|; +inf means "no knowledge".
struct BiasBound {
  std::vector<double> v;

  static BiasBound all_infinite(std::size_t k);
  // The tight bound V(a) = |mu_off(a) - mu_on(a)|.
  static BiasBound exact_gap(const MabInstance& instance);
};

struct OfflineDataset {
  std::vector<std::vector<double>> samples;
  // nullopt when an arm has no samples; downstream code must branch
  // explicitly instead of reading a placeholder value.
  std::vector<std::optional<double>> mean_cache;
};

struct GapProfile {
  std::vector<double> delta;  // mu_star - mu_on(a)
  double mu_star = 0.0;
  std::vector<std::size_t> optimal_arms;  // argmax set, ascending
};

// Draws T_S(a) samples per arm from Normal(mu_off(a), 1). Pure function
// of (instance, seed): arm a reads the stream mix_seed(seed,
// kPurposeOffline, a).
OfflineDataset sample_offline(const MabInstance& instance,
                              std::uint64_t seed);

// True iff V(a) >= |mu_off(a) - mu_on(a)| for every arm. Throws
// PreconditionError on a length mismatch.
bool validate_bias_bound(const MabInstance& instance, const BiasBound& bound);

GapProfile gap_profile(const MabInstance& instance);

// Instance files bundle the arm parameters with a bias bound, as a
// human-readable key-value file:
//
//   k = 2
//   t = 10000
//   mu_on = 1 0
//   mu_off = 0.7 0.3
//   t_s = 1000 1000
//   v = 0.3 inf
struct InstanceFile {
  MabInstance instance;
  BiasBound v;
};

InstanceFile parse_instance_text(const std::string& text);
std::string format_instance_text(const InstanceFile& file);
InstanceFile load_instance(const std::string& path);
void save_instance(const InstanceFile& file, const std::string& path);

}  // namespace odb
