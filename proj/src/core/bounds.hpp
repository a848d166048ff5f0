#pragma once

#include "core/comb.hpp"

namespace odb {

// Discrepancy measure omega(a) = V(a) + (mu_off(a) - mu_on(a)); lies in
// [0, 2 V(a)] whenever V is a valid bias bound.
double discrepancy(double v_a, double mu_off_a, double mu_on_a);

// Saving term of the instance-dependent bound:
// T_S(a) * Delta(a) * max(1 - omega(a)/Delta(a), 0)^2. Defined only for
// sub-optimal arms (delta_a > 0).
double sav0(std::int64_t t_s_a, double delta_a, double omega_a);

struct BoundQuery {
  double epsilon = 0.5;        // lower-bound slack, in (0, 1]
  double consistency_c = 1.0;  // C of a (C,p)-consistent policy, > 0
  double consistency_p = 0.5;  // p, in (0, 1)
  double delta = 0.1;          // confidence for independent profiles
  void validate() const;
};

struct SavEps {
  double sav_eps;
  double kappa;  // may be negative; reported as-is
};
SavEps sav_eps_and_kappa(const BoundQuery& query, std::int64_t t_s_a,
                         double delta_a, double omega_a);

// Fully explicit instance-dependent upper bound (dependent schedule):
// (pi^2/6) Delta_max
//   + sum_{Delta(a)>0} max(32 log(4 K T^4)/Delta(a) - Sav0(a), Delta(a)).
double dep_upper_explicit(const MabInstance& instance, const BiasBound& v);

// Water-filling solution of   max tau  s.t. tau <= T_S(a) + n(a),
// sum_a n(a) = mass, n >= 0:  the unique tau with
// sum_a max(tau - T_S(a), 0) = mass, found by a breakpoint scan over
// the sorted counts. When mass is integral the final segment is exact:
// tau = tau_num / tau_den.
struct Waterfill {
  double tau_star = 0.0;
  std::vector<double> n_star;  // max(tau - T_S(a), 0)
  std::int64_t tau_num = 0;
  std::int64_t tau_den = 1;
  bool exact = false;
};
Waterfill tau_star_waterfill(const std::vector<std::int64_t>& t_s,
                             double mass);

// Order-level instance-independent profile (leading constants fixed to
// one; both branches reported).
struct IndepProfile {
  double branch_ucb;   // sqrt(K T log(T/delta))
  double branch_warm;  // (sqrt(log(T/delta)/tau_star) + V_max) * T
  double min;
};
IndepProfile indep_upper_profile(const MabInstance& instance,
                                 const BiasBound& v, double delta);

// Combinatorial profiles: the general smooth-reward branches
//   T1 = (K log(T/d))^(rho/2) T^(1-rho/2),
//   T2 = (V_max^rho + log(T/d)^(rho/2) tau_star^(-rho/2)) T,
// reported as gamma * min(T1, T2); for linear rewards the sharper pair
// sqrt(mKT log(T/d)) vs (sqrt(log(T/d)/tau_star_c) + V_max) m T, where
// tau_star_c water-fills mass m*T.
struct CombIndepProfile {
  double t1 = 0.0;
  double t2 = 0.0;
  double general_min = 0.0;
  double linear_branch_ucb = 0.0;
  double linear_branch_warm = 0.0;
  double linear_min = 0.0;
  double tau_star = 0.0;
  double tau_star_c = 0.0;
  bool has_linear = false;
};
CombIndepProfile comb_indep_upper_profile(
    const std::vector<std::int64_t>& t_s, std::int64_t horizon, double delta,
    double gamma, double rho, std::int64_t m, bool linear, double v_max);

// Per-arm minimum sub-optimality gaps over an enumerable linear family.
// Arms appearing in no sub-optimal action carry no value.
struct GapStats {
  std::vector<std::optional<double>> delta_min;
  double delta_max = 0.0;
  Action optimal_action;
  double optimal_value = 0.0;
};
GapStats delta_min_profile(const CombInstance& instance,
                           const RewardModel& model);

// Order-level combinatorial dependent bound:
// sum over sub-optimal-capable arms of
//   max(m log(T)/Delta_min(a) - SavCom(a), Delta_max),
// SavCom(a) = m T_S(a) Delta_min(a) max(1 - omega(a)/Delta_min(a), 0)^2.
double comb_dep_upper(const CombInstance& instance, const BiasBound& v,
                      const RewardModel& model);

// Two-arm adversarial pair: P has aligned offline/online laws with arm 1
// optimal; Q shares P's offline laws but flips the optimum to arm 2 by
// a margin tied to the assumed consistency constant. Requires
// c < T^eps / (4 log T); rejected otherwise (the threshold is included
// in the error message and the result).
struct ImpossiblePair {
  MabInstance p;
  MabInstance q;
  double threshold = 0.0;
};
ImpossiblePair impossibility_pair(double beta, double eps, double c,
                                  double horizon);

struct BoundReport {
  std::int64_t k = 0;
  std::int64_t horizon = 0;
  BoundQuery query;
  double mu_star = 0.0;
  double delta_max = 0.0;
  double v_max = 0.0;
  std::vector<double> omega;
  // nullopt on optimal arms (the saving terms need Delta(a) > 0).
  std::vector<std::optional<double>> sav0_per_arm;
  std::vector<std::optional<double>> sav_eps_per_arm;
  std::vector<std::optional<double>> kappa_per_arm;
  double dep_upper = 0.0;
  Waterfill waterfill;
  IndepProfile indep{};
};
BoundReport evaluate_bounds(const MabInstance& instance, const BiasBound& v,
                            const BoundQuery& query);
std::string format_bound_report(const BoundReport& report);

struct CombBoundReport {
  std::int64_t m = 0;
  bool linear = false;
  CombIndepProfile profile;
  std::optional<GapStats> gaps;  // linear enumerable families only
  std::vector<std::optional<double>> sav_com;
  std::optional<double> dep_upper;
};
CombBoundReport evaluate_comb_bounds(const CombInstance& instance,
                                     const BiasBound& v,
                                     const BoundQuery& query);
std::string format_comb_bound_report(const CombBoundReport& report);

}  // namespace odb
