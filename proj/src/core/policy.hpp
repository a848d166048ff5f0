#pragma once

#include <optional>
#include <string_view>

#include "core/instance.hpp"

namespace odb {

// The four arm-selection rules compared by the experiment harness.
//   MinUcb        : argmax over min(vanilla UCB, warm-start UCB).
//   PureUcb       : vanilla UCB, offline data ignored.
//   UcbSOnly      : warm-start UCB alone.
//   MonUcbPooled  : vanilla UCB whose counts and means are seeded with
//                   the offline samples (pooled warm start).
enum class PolicyKind { MinUcb, PureUcb, UcbSOnly, MonUcbPooled };

// CLI names: min-ucb | pure-ucb | ucbs | monucb.
const char* policy_name(PolicyKind kind);
std::optional<PolicyKind> parse_policy(std::string_view name);

enum class ScheduleTag { InstanceDependent, InstanceIndependent };

// Confidence schedule delta_t. The dependent schedule is 1/(2Kt^2); the
// independent one scales a caller-supplied global delta as
// delta/(2Kt^2).
struct DeltaSchedule {
  ScheduleTag tag = ScheduleTag::InstanceDependent;
  std::optional<double> global_delta;

  double at(std::int64_t t, std::int64_t k) const;

  static DeltaSchedule dependent() { return {}; }
  static DeltaSchedule independent(double delta) {
    return {ScheduleTag::InstanceIndependent, delta};
  }
};

struct Radii {
  double rad;
  double rad_s;  // extended real; +inf under an infinite bias bound
};

// rad   = sqrt(2 log(2t/dt) / n)
// rad_s = sqrt(2 log(2t/dt) / (n + t_s)) + (t_s / (n + t_s)) * v
// with the 0*(+inf)=0 convention, so t_s = 0 collapses rad_s to rad.
Radii compute_radii(std::int64_t t, double dt, std::int64_t n_a,
                    std::int64_t t_s_a, double v_a);

struct IndexPair {
  std::vector<double> ucb;
  std::vector<double> ucb_s;
  std::vector<double> rad;
  std::vector<double> rad_s;
};

struct PolicyState {
  PolicyKind kind = PolicyKind::MinUcb;
  std::size_t k = 0;
  std::int64_t t = 1;  // round about to be played, 1-based
  std::vector<std::int64_t> n;
  std::vector<double> r_hat;
  DeltaSchedule schedule;
  BiasBound v;
  std::vector<std::optional<double>> offline_means;
  std::vector<std::int64_t> t_s;
};

// Validates shapes (dataset lengths against T_S, bound length against K)
// and prepares the per-kind initial state.
PolicyState init_policy(PolicyKind kind, const OfflineDataset& dataset,
                        const BiasBound& v, const MabInstance& instance,
                        DeltaSchedule schedule);

// Both indices for every arm at round t; requires every n[a] >= 1.
// Kinds that use a single index report the unused one as +inf so the
// min-selection reduces correctly.
IndexPair compute_indices(const PolicyState& state, std::int64_t t);

// Rounds t <= K are a forced round-robin over arms (indices unused);
// afterwards the argmax of min(ucb, ucb_s), lowest index on ties.
std::size_t select_arm(const PolicyState& state, const IndexPair& indices);

// Credits one observed reward: incremental mean, count, and round bump.
void policy_update(PolicyState& state, std::size_t arm, double reward);

// Test-harness helper: whether the per-round confidence event (each
// index covers the true online mean from above and by no more than its
// stated envelope, the warm envelope including the offline bias shift)
// holds against the true means. Evaluated with the MinUcb index
// formulas regardless of state.kind.
bool xi_holds(const MabInstance& instance, const PolicyState& state,
              std::int64_t t, double dt);

// Shared per-arm index computation, also used by the combinatorial
// policy so reductions between the two are bit-exact.
struct WarmIndex {
  double ucb;
  double ucb_s;
  double rad;
  double rad_s;
};
WarmIndex warm_index(std::int64_t t, double dt, std::int64_t n, double r_hat,
                     std::int64_t t_s, const std::optional<double>& xhat,
                     double v_a);

}  // namespace odb
