#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "core/policy.hpp"

namespace odb {

// A feasible action: sorted list of base-arm indices.
using Action = std::vector<std::uint32_t>;

struct Graph {
  struct Edge {
    std::uint32_t from;
    std::uint32_t to;
  };
  std::uint32_t num_nodes = 0;
  std::vector<Edge> edges;  // base arm i corresponds to edges[i]
};

// "u v p" per line; p is the edge's activation probability.
struct GraphFile {
  Graph graph;
  std::vector<double> probs;
};
GraphFile load_graph(const std::string& path);
GraphFile parse_graph_text(const std::string& text);

// One action per line, space-separated base-arm indices.
std::vector<Action> load_actions(const std::string& path, std::size_t k);
std::vector<Action> parse_actions_text(const std::string& text,
                                       std::size_t k);

struct TopMFamily {
  std::int64_t m;  // all subsets of exactly m base arms
};
struct MPathFamily {
  std::int64_t m;  // K/m disjoint paths of m consecutive arms
};
struct ExplicitFamily {
  std::vector<Action> actions;
};
struct InfluenceFamily {
  Graph graph;
  std::int64_t seed_budget = 1;  // seed sets of this size
};

using Family =
    std::variant<TopMFamily, MPathFamily, ExplicitFamily, InfluenceFamily>;

// Selector syntax: topm:M | mpath:M | influence:GRAPHFILE[:SEEDS] |
// explicit:ACTIONSFILE. k is the base-arm count the family must fit.
Family parse_family_spec(const std::string& spec, std::size_t k);

struct CombInstance {
  std::vector<GaussianArmPair> base;
  std::vector<std::int64_t> offline_counts;
  std::int64_t horizon = 0;
  Family family;

  std::size_t num_base() const { return base.size(); }
  // Maximum feasible-action cardinality.
  std::int64_t max_cardinality() const;
  void validate() const;
  // View of the base arms as a plain bandit instance (shared sampling
  // and gap code).
  MabInstance base_instance() const;
};

// Expected action reward as a function of the per-arm mean vector.
// Linear sums the member means; Smooth wraps a monotone evaluator with
// modulus f(x) = gamma * x^rho.
struct RewardModel {
  enum class Kind { Linear, Smooth };
  Kind kind = Kind::Linear;
  double gamma = 1.0;
  double rho = 1.0;
  std::function<double(const CombInstance&, const std::vector<double>&,
                       const Action&)>
      eval;

  double value(const CombInstance& instance, const std::vector<double>& u,
               const Action& action) const;

  static RewardModel linear(std::int64_t m);
  // One-step influence spread on edge values clamped into [0, 1].
  static RewardModel influence_spread();
};

enum class OracleSolver { ExactTopM, ExactEnumerate, GreedyInfluence };

struct OracleSpec {
  double alpha = 1.0;
  double beta = 1.0;
  OracleSolver solver = OracleSolver::ExactTopM;

  static OracleSpec for_family(const CombInstance& instance);
};

// Materializes the feasible collection; throws PreconditionError when
// the family is not enumerable or exceeds `cap` actions.
std::vector<Action> enumerate_actions(const CombInstance& instance,
                                      std::size_t cap = 1000000);

// Maximizer over the feasible collection for the value vector u, whose
// entries are finite or +inf. Infinite entries rank actions first by
// how many +inf members they contain, then by the finite part of the
// sum, then lexicographically; this makes the initialization loop pick
// unobserved arms first and terminate deterministically.
Action oracle_solve(const OracleSpec& spec, const RewardModel& model,
                    const CombInstance& instance,
                    const std::vector<double>& u);

// |S| + sum over non-seeds v of 1 - prod_{(u,v): u in S} (1 - p(u,v)).
// Seeds count as activated.
double influence_expected_reward(const Graph& graph,
                                 const std::vector<double>& probs,
                                 const std::vector<std::uint32_t>& seeds);

// Standard greedy seed selection on the one-step spread; ties break to
// the lowest node id.
std::vector<std::uint32_t> greedy_influence_seeds(
    const Graph& graph, const std::vector<double>& probs,
    std::int64_t budget);

struct CombPolicyState {
  std::size_t k = 0;
  std::int64_t t = 1;
  std::int64_t t0 = 0;  // first round after initialization (0 while running)
  std::vector<std::int64_t> n;
  std::vector<double> r_hat;  // +inf sentinel before the first observation
  DeltaSchedule schedule;
  BiasBound v;
  std::vector<std::optional<double>> offline_means;
  std::vector<std::int64_t> t_s;
  std::vector<bool> reachable;  // arm appears in some feasible action

  bool initializing() const;
};

CombPolicyState init_comb_policy(const OfflineDataset& dataset,
                                 const BiasBound& v,
                                 const CombInstance& instance,
                                 DeltaSchedule schedule);

// One action choice: sentinel means through the oracle while some
// reachable arm is unobserved, per-arm min(ucb, ucb_s) afterwards.
Action comb_select_action(const CombPolicyState& state,
                          const CombInstance& instance,
                          const RewardModel& model, const OracleSpec& spec);

// Semi-bandit update: every member of `action` folds its observed
// reward into the running mean.
void comb_update(CombPolicyState& state, const Action& action,
                 const std::vector<double>& rewards);

struct CombRegret {
  double value = 0.0;
  // True when the optimum itself comes from an approximation oracle
  // (influence), so the scaled regret is only indicative.
  bool approximate = false;
};

// Optimal expected reward under the true online means; greedy value for
// influence families (sets *approximate).
double optimal_value(const CombInstance& instance, const RewardModel& model,
                     const OracleSpec& spec, bool* approximate = nullptr);

// Sum over the trajectory of alpha*beta*r_star - r(A_t) under the true
// online means.
CombRegret comb_regret(const std::vector<Action>& trajectory,
                       const CombInstance& instance, const RewardModel& model,
                       const OracleSpec& spec);

}  // namespace odb
