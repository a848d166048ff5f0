#include "core/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "core/csv.hpp"
#include "core/errors.hpp"

namespace odb {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double clamped_square(double one_minus_ratio) {
  const double m = std::max(one_minus_ratio, 0.0);
  return m * m;
}
}  // namespace

double discrepancy(double v_a, double mu_off_a, double mu_on_a) {
  return v_a + (mu_off_a - mu_on_a);
}

double sav0(std::int64_t t_s_a, double delta_a, double omega_a) {
  if (!(delta_a > 0.0))
    throw PreconditionError("saving term defined only for sub-optimal arms");
  return static_cast<double>(t_s_a) * delta_a *
         clamped_square(1.0 - omega_a / delta_a);
}

void BoundQuery::validate() const {
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw PreconditionError("epsilon must lie in (0,1]");
  if (!(consistency_c > 0.0))
    throw PreconditionError("consistency constant must be > 0");
  if (!(consistency_p > 0.0 && consistency_p < 1.0))
    throw PreconditionError("consistency exponent must lie in (0,1)");
  if (!(delta > 0.0 && delta < 1.0))
    throw PreconditionError("confidence delta must lie in (0,1)");
}

SavEps sav_eps_and_kappa(const BoundQuery& query, std::int64_t t_s_a,
                         double delta_a, double omega_a) {
  query.validate();
  if (!(delta_a > 0.0))
    throw PreconditionError("saving term defined only for sub-optimal arms");
  const double one_plus = 1.0 + query.epsilon;
  SavEps out;
  out.sav_eps = static_cast<double>(t_s_a) * delta_a *
                clamped_square(1.0 - omega_a / (one_plus * delta_a));
  out.kappa = 1.0 / (2.0 * one_plus * one_plus * delta_a) *
              std::log(query.epsilon * delta_a / (8.0 * query.consistency_c));
  return out;
}

double dep_upper_explicit(const MabInstance& instance, const BiasBound& v) {
  if (v.v.size() != instance.num_arms())
    throw PreconditionError("bias bound length does not match arm count");
  const GapProfile gaps = gap_profile(instance);
  const double delta_max =
      *std::max_element(gaps.delta.begin(), gaps.delta.end());
  const double log_term =
      std::log(4.0 * static_cast<double>(instance.num_arms()) *
               std::pow(static_cast<double>(instance.horizon), 4.0));
  double sum = 0.0;
  for (std::size_t a = 0; a < instance.num_arms(); ++a) {
    const double delta_a = gaps.delta[a];
    if (delta_a <= 0.0) continue;
    const double omega_a = discrepancy(v.v[a], instance.arms[a].mu_off,
                                       instance.arms[a].mu_on);
    const double saving = sav0(instance.offline_counts[a], delta_a, omega_a);
    sum += std::max(32.0 * log_term / delta_a - saving, delta_a);
  }
  return std::numbers::pi * std::numbers::pi / 6.0 * delta_max + sum;
}

Waterfill tau_star_waterfill(const std::vector<std::int64_t>& t_s,
                             double mass) {
  if (t_s.empty())
    throw PreconditionError("water-fill needs at least one arm");
  if (!(mass > 0.0)) throw PreconditionError("water-fill needs mass > 0");
  for (std::int64_t c : t_s)
    if (c < 0) throw PreconditionError("water-fill counts must be >= 0");

  std::vector<std::int64_t> sorted = t_s;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t k = sorted.size();

  // tau lies on the segment with j active arms (those with T_S < tau);
  // there   j * tau - prefix_j = mass.
  std::int64_t prefix = 0;
  std::size_t j = 0;
  double tau = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    prefix += sorted[i];
    j = i + 1;
    tau = (mass + static_cast<double>(prefix)) / static_cast<double>(j);
    if (j == k || tau <= static_cast<double>(sorted[i + 1])) break;
  }

  Waterfill out;
  out.tau_star = tau;
  const double mass_floor = std::floor(mass);
  if (mass_floor == mass &&
      std::abs(mass) <= 9.0e15) {  // integral and exactly representable
    out.exact = true;
    out.tau_num = static_cast<std::int64_t>(mass_floor) + prefix;
    out.tau_den = static_cast<std::int64_t>(j);
  }
  out.n_star.reserve(t_s.size());
  for (std::int64_t c : t_s)
    out.n_star.push_back(std::max(tau - static_cast<double>(c), 0.0));
  return out;
}

IndepProfile indep_upper_profile(const MabInstance& instance,
                                 const BiasBound& v, double delta) {
  instance.validate();
  if (v.v.size() != instance.num_arms())
    throw PreconditionError("bias bound length does not match arm count");
  const auto k = static_cast<std::int64_t>(instance.num_arms());
  if (k < 2 || k > instance.horizon)
    throw PreconditionError("independent profile requires 2 <= K <= T");
  if (!(delta > 0.0 && delta < 1.0))
    throw PreconditionError("confidence delta must lie in (0,1)");
  const double t = static_cast<double>(instance.horizon);
  const double log_term = std::log(t / delta);
  const double tau =
      tau_star_waterfill(instance.offline_counts, t).tau_star;
  const double v_max = *std::max_element(v.v.begin(), v.v.end());
  IndepProfile out;
  out.branch_ucb = std::sqrt(static_cast<double>(k) * t * log_term);
  out.branch_warm = (std::sqrt(log_term / tau) + v_max) * t;
  out.min = std::min(out.branch_ucb, out.branch_warm);
  return out;
}

CombIndepProfile comb_indep_upper_profile(
    const std::vector<std::int64_t>& t_s, std::int64_t horizon, double delta,
    double gamma, double rho, std::int64_t m, bool linear, double v_max) {
  if (!(rho > 0.0 && rho <= 1.0))
    throw PreconditionError("smoothness exponent rho must lie in (0,1]");
  if (!(gamma > 0.0))
    throw PreconditionError("smoothness factor gamma must be > 0");
  const auto k = static_cast<std::int64_t>(t_s.size());
  if (k < 2 || k > horizon)
    throw PreconditionError("independent profile requires 2 <= K <= T");
  if (!(delta > 0.0 && delta < 1.0))
    throw PreconditionError("confidence delta must lie in (0,1)");
  if (m < 1) throw PreconditionError("action cardinality m must be >= 1");

  const double t = static_cast<double>(horizon);
  const double log_term = std::log(t / delta);
  CombIndepProfile out;
  out.tau_star = tau_star_waterfill(t_s, t).tau_star;
  out.t1 = std::pow(static_cast<double>(k) * log_term, rho / 2.0) *
           std::pow(t, 1.0 - rho / 2.0);
  out.t2 = (std::pow(v_max, rho) +
            std::pow(log_term, rho / 2.0) * std::pow(out.tau_star, -rho / 2.0)) *
           t;
  out.general_min = gamma * std::min(out.t1, out.t2);
  if (linear) {
    out.has_linear = true;
    const double md = static_cast<double>(m);
    out.tau_star_c = tau_star_waterfill(t_s, md * t).tau_star;
    out.linear_branch_ucb =
        std::sqrt(md * static_cast<double>(k) * t * log_term);
    out.linear_branch_warm =
        (std::sqrt(log_term / out.tau_star_c) + v_max) * md * t;
    out.linear_min = std::min(out.linear_branch_ucb, out.linear_branch_warm);
  }
  return out;
}

GapStats delta_min_profile(const CombInstance& instance,
                           const RewardModel& model) {
  if (model.kind != RewardModel::Kind::Linear)
    throw PreconditionError("gap profile requires the linear reward model");
  const auto actions = enumerate_actions(instance);
  std::vector<double> mu(instance.num_base());
  for (std::size_t a = 0; a < instance.num_base(); ++a)
    mu[a] = instance.base[a].mu_on;

  GapStats stats;
  stats.optimal_value = -kInf;
  std::vector<double> values(actions.size());
  for (std::size_t i = 0; i < actions.size(); ++i) {
    values[i] = model.value(instance, mu, actions[i]);
    if (values[i] > stats.optimal_value) {
      stats.optimal_value = values[i];
      stats.optimal_action = actions[i];
    }
  }
  stats.delta_min.assign(instance.num_base(), std::nullopt);
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const double gap = stats.optimal_value - values[i];
    stats.delta_max = std::max(stats.delta_max, gap);
    if (gap <= 0.0) continue;
    for (std::uint32_t a : actions[i]) {
      auto& slot = stats.delta_min[a];
      if (!slot || gap < *slot) slot = gap;
    }
  }
  return stats;
}

double comb_dep_upper(const CombInstance& instance, const BiasBound& v,
                      const RewardModel& model) {
  if (v.v.size() != instance.num_base())
    throw PreconditionError("bias bound length does not match arm count");
  const GapStats stats = delta_min_profile(instance, model);
  const double m = static_cast<double>(instance.max_cardinality());
  const double log_t = std::log(static_cast<double>(instance.horizon));
  std::vector<bool> in_optimal(instance.num_base(), false);
  for (std::uint32_t a : stats.optimal_action) in_optimal[a] = true;
  double sum = 0.0;
  for (std::size_t a = 0; a < instance.num_base(); ++a) {
    if (in_optimal[a] || !stats.delta_min[a]) continue;
    const double dmin = *stats.delta_min[a];
    const double omega_a = discrepancy(v.v[a], instance.base[a].mu_off,
                                       instance.base[a].mu_on);
    const double saving = m * static_cast<double>(instance.offline_counts[a]) *
                          dmin * clamped_square(1.0 - omega_a / dmin);
    sum += std::max(m * log_t / dmin - saving, stats.delta_max);
  }
  return sum;
}

ImpossiblePair impossibility_pair(double beta, double eps, double c,
                                  double horizon) {
  if (!(beta > 0.0 && beta < 0.5))
    throw PreconditionError("beta must lie in (0, 1/2)");
  if (!(eps > 0.0 && eps < beta))
    throw PreconditionError("eps must lie in (0, beta)");
  if (!(c > 0.0)) throw PreconditionError("c must be > 0");
  if (!(horizon >= 2.0 && std::floor(horizon) == horizon &&
        horizon <= 9.0e15))
    throw PreconditionError("horizon must be an integer >= 2");
  const double t = horizon;
  const double threshold = std::pow(t, eps) / (4.0 * std::log(t));
  if (!(c < threshold))
    throw PreconditionError(
        "inadmissible: need c < T^eps / (4 log T) = " + fmt_g9(threshold));

  const double gap = std::pow(t, -beta);
  const double q2 =
      1.0 / (std::sqrt(c * std::log(t)) * std::pow(t, beta - eps / 2.0)) - gap;
  if (!(q2 > gap))
    throw ContractError("pair construction lost the optimal-arm flip");

  // Offline sample size at the level where pooled warm starts would
  // provably help on the aligned instance.
  const double ts_real =
      128.0 * (std::pow(t, 2.0 * beta) - std::pow(t, 2.0 * beta - eps)) *
      std::log(t);
  const auto ts = static_cast<std::int64_t>(std::ceil(std::max(ts_real, 1.0)));

  ImpossiblePair pair;
  pair.threshold = threshold;
  pair.p.arms = {{0.0, 0.0}, {-gap, -gap}};
  pair.p.offline_counts = {ts, ts};
  pair.p.horizon = static_cast<std::int64_t>(horizon);
  pair.q = pair.p;
  pair.q.arms[1].mu_on = q2;  // offline laws stay identical to P's
  return pair;
}

BoundReport evaluate_bounds(const MabInstance& instance, const BiasBound& v,
                            const BoundQuery& query) {
  instance.validate();
  query.validate();
  if (v.v.size() != instance.num_arms())
    throw PreconditionError("bias bound length does not match arm count");

  BoundReport report;
  report.k = static_cast<std::int64_t>(instance.num_arms());
  report.horizon = instance.horizon;
  report.query = query;
  const GapProfile gaps = gap_profile(instance);
  report.mu_star = gaps.mu_star;
  report.delta_max = *std::max_element(gaps.delta.begin(), gaps.delta.end());
  report.v_max = *std::max_element(v.v.begin(), v.v.end());
  report.omega.resize(instance.num_arms());
  report.sav0_per_arm.resize(instance.num_arms());
  report.sav_eps_per_arm.resize(instance.num_arms());
  report.kappa_per_arm.resize(instance.num_arms());
  for (std::size_t a = 0; a < instance.num_arms(); ++a) {
    report.omega[a] = discrepancy(v.v[a], instance.arms[a].mu_off,
                                  instance.arms[a].mu_on);
    if (gaps.delta[a] > 0.0) {
      report.sav0_per_arm[a] =
          sav0(instance.offline_counts[a], gaps.delta[a], report.omega[a]);
      const SavEps se = sav_eps_and_kappa(query, instance.offline_counts[a],
                                          gaps.delta[a], report.omega[a]);
      report.sav_eps_per_arm[a] = se.sav_eps;
      report.kappa_per_arm[a] = se.kappa;
    }
  }
  report.dep_upper = dep_upper_explicit(instance, v);
  report.waterfill = tau_star_waterfill(
      instance.offline_counts, static_cast<double>(instance.horizon));
  report.indep = indep_upper_profile(instance, v, query.delta);
  return report;
}

namespace {
std::string opt_str(const std::optional<double>& x) {
  return x ? fmt_g9(*x) : "n/a";
}
}  // namespace

std::string format_bound_report(const BoundReport& report) {
  std::ostringstream out;
  out << "k=" << report.k << "\n";
  out << "t=" << report.horizon << "\n";
  out << "epsilon=" << fmt_g9(report.query.epsilon) << "\n";
  out << "consistency_c=" << fmt_g9(report.query.consistency_c) << "\n";
  out << "consistency_p=" << fmt_g9(report.query.consistency_p) << "\n";
  out << "delta=" << fmt_g9(report.query.delta) << "\n";
  out << "mu_star=" << fmt_g9(report.mu_star) << "\n";
  out << "delta_max=" << fmt_g9(report.delta_max) << "\n";
  out << "v_max=" << fmt_g9(report.v_max) << "\n";
  for (std::size_t a = 0; a < report.omega.size(); ++a)
    out << "omega[" << a << "]=" << fmt_g9(report.omega[a]) << "\n";
  for (std::size_t a = 0; a < report.sav0_per_arm.size(); ++a)
    out << "sav0[" << a << "]=" << opt_str(report.sav0_per_arm[a]) << "\n";
  for (std::size_t a = 0; a < report.sav_eps_per_arm.size(); ++a)
    out << "sav_eps[" << a << "]=" << opt_str(report.sav_eps_per_arm[a])
        << "\n";
  for (std::size_t a = 0; a < report.kappa_per_arm.size(); ++a)
    out << "kappa_eps[" << a << "]=" << opt_str(report.kappa_per_arm[a])
        << "\n";
  out << "dep_upper_explicit=" << fmt_g9(report.dep_upper) << "\n";
  out << "tau_star=" << fmt_g9(report.waterfill.tau_star) << "\n";
  for (std::size_t a = 0; a < report.waterfill.n_star.size(); ++a)
    out << "n_star[" << a << "]=" << fmt_g9(report.waterfill.n_star[a])
        << "\n";
  out << "indep_branch_ucb=" << fmt_g9(report.indep.branch_ucb) << "\n";
  out << "indep_branch_warm=" << fmt_g9(report.indep.branch_warm) << "\n";
  out << "indep_min=" << fmt_g9(report.indep.min) << "\n";
  out << "indep_profile_note=order-level\n";
  return out.str();
}

CombBoundReport evaluate_comb_bounds(const CombInstance& instance,
                                     const BiasBound& v,
                                     const BoundQuery& query) {
  instance.validate();
  query.validate();
  if (v.v.size() != instance.num_base())
    throw PreconditionError("bias bound length does not match arm count");

  CombBoundReport report;
  report.m = instance.max_cardinality();
  const bool influence =
      std::holds_alternative<InfluenceFamily>(instance.family);
  report.linear = !influence;
  double gamma = static_cast<double>(report.m);
  if (influence) {
    const auto& fam = std::get<InfluenceFamily>(instance.family);
    gamma = static_cast<double>(fam.graph.num_nodes) *
            static_cast<double>(fam.graph.edges.size());
  }
  const double v_max = *std::max_element(v.v.begin(), v.v.end());
  report.profile = comb_indep_upper_profile(
      instance.offline_counts, instance.horizon, query.delta, gamma,
      /*rho=*/1.0, report.m, report.linear, v_max);
  if (report.linear) {
    const RewardModel model = RewardModel::linear(report.m);
    report.gaps = delta_min_profile(instance, model);
    report.sav_com.assign(instance.num_base(), std::nullopt);
    const double md = static_cast<double>(report.m);
    for (std::size_t a = 0; a < instance.num_base(); ++a) {
      if (!report.gaps->delta_min[a]) continue;
      const double dmin = *report.gaps->delta_min[a];
      const double omega_a = discrepancy(v.v[a], instance.base[a].mu_off,
                                         instance.base[a].mu_on);
      report.sav_com[a] = md *
                          static_cast<double>(instance.offline_counts[a]) *
                          dmin * clamped_square(1.0 - omega_a / dmin);
    }
    report.dep_upper = comb_dep_upper(instance, v, model);
  }
  return report;
}

std::string format_comb_bound_report(const CombBoundReport& report) {
  std::ostringstream out;
  out << "comb_m=" << report.m << "\n";
  out << "comb_linear=" << (report.linear ? "true" : "false") << "\n";
  out << "comb_tau_star=" << fmt_g9(report.profile.tau_star) << "\n";
  out << "comb_t1=" << fmt_g9(report.profile.t1) << "\n";
  out << "comb_t2=" << fmt_g9(report.profile.t2) << "\n";
  out << "comb_general_min=" << fmt_g9(report.profile.general_min) << "\n";
  if (report.profile.has_linear) {
    out << "comb_tau_star_c=" << fmt_g9(report.profile.tau_star_c) << "\n";
    out << "comb_linear_branch_ucb="
        << fmt_g9(report.profile.linear_branch_ucb) << "\n";
    out << "comb_linear_branch_warm="
        << fmt_g9(report.profile.linear_branch_warm) << "\n";
    out << "comb_linear_min=" << fmt_g9(report.profile.linear_min) << "\n";
  }
  if (report.gaps) {
    out << "comb_delta_max=" << fmt_g9(report.gaps->delta_max) << "\n";
    for (std::size_t a = 0; a < report.gaps->delta_min.size(); ++a)
      out << "comb_delta_min[" << a
          << "]=" << opt_str(report.gaps->delta_min[a]) << "\n";
    for (std::size_t a = 0; a < report.sav_com.size(); ++a)
      out << "comb_sav[" << a << "]=" << opt_str(report.sav_com[a]) << "\n";
  }
  if (report.dep_upper)
    out << "comb_dep_upper=" << fmt_g9(*report.dep_upper) << "\n";
  out << "comb_profile_note=order-level\n";
  return out.str();
}

}  // namespace odb
