#include <doctest.h>

#include <cmath>
#include <limits>

#include "core/bounds.hpp"
#include "core/errors.hpp"
#include "core/rng.hpp"
#include "core/sim.hpp"

using namespace odb;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Independent oracle: bisection on the water level.
double bisect_tau(const std::vector<std::int64_t>& t_s, double mass) {
  auto supply = [&](double tau) {
    double s = 0.0;
    for (std::int64_t c : t_s) s += std::max(tau - static_cast<double>(c), 0.0);
    return s;
  };
  double lo = 0.0, hi = 1.0;
  while (supply(hi) < mass) hi *= 2.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (supply(mid) < mass)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}
}  // namespace

TEST_CASE("discrepancy measure") {
  const MabTrialConfig optimistic = preset_optimistic(0.3);
  for (std::size_t a = 1; a < 10; ++a) {
    CHECK(discrepancy(optimistic.v.v[a], optimistic.instance.arms[a].mu_off,
                      optimistic.instance.arms[a].mu_on) ==
          doctest::Approx(0.6));
  }
  const MabTrialConfig pessimistic = preset_pessimistic(0.7);
  for (std::size_t a = 0; a < 10; ++a) {
    CHECK(discrepancy(pessimistic.v.v[a],
                      pessimistic.instance.arms[a].mu_off,
                      pessimistic.instance.arms[a].mu_on) ==
          doctest::Approx(0.0));
  }
  CHECK(discrepancy(0.0, 0.5, 0.5) == 0.0);
}

TEST_CASE("discrepancy lies in [0, 2V] under a valid bound") {
  Xoshiro256pp gen(17);
  for (int rep = 0; rep < 200; ++rep) {
    const double mu_on = 4.0 * gen.next_double() - 2.0;
    const double mu_off = 4.0 * gen.next_double() - 2.0;
    const double v = std::abs(mu_off - mu_on) + gen.next_double();
    const double omega = discrepancy(v, mu_off, mu_on);
    CHECK(omega >= 0.0);
    CHECK(omega <= 2.0 * v + 1e-12);
  }
}

TEST_CASE("dependent saving term") {
  CHECK(sav0(1000, 1.0, 1.5) == 0.0);  // clamped
  CHECK(sav0(1000, 1.0, 0.0) == doctest::Approx(1000.0));
  CHECK(sav0(1000, 1.0, 0.4) == doctest::Approx(360.0));
  CHECK_THROWS_AS(sav0(10, 0.0, 0.0), PreconditionError);
}

TEST_CASE("saving term is monotone in its drivers") {
  for (std::int64_t t_s : {0, 10, 100, 1000, 5000}) {
    CHECK(sav0(t_s, 1.0, 0.3) <= sav0(t_s + 1, 1.0, 0.3));
  }
  double prev = kInf;
  for (double omega : {0.0, 0.2, 0.4, 0.8, 1.0, 1.5}) {
    const double s = sav0(1000, 1.0, omega);
    CHECK(s <= prev);
    prev = s;
  }
}

TEST_CASE("slack saving term and its offset") {
  BoundQuery query;
  SUBCASE("tends to the dependent saving term as the slack vanishes") {
    query.epsilon = 1e-8;
    const SavEps se = sav_eps_and_kappa(query, 100, 1.0, 0.4);
    CHECK(std::abs(se.sav_eps - sav0(100, 1.0, 0.4)) <= 1e-6);
  }
  SUBCASE("clamps at the slack boundary") {
    query.epsilon = 1.0;
    CHECK(sav_eps_and_kappa(query, 500, 1.0, 2.0).sav_eps == 0.0);
  }
  SUBCASE("offset vanishes at the matched constant") {
    query.epsilon = 1.0;
    query.consistency_c = 0.125;
    CHECK(sav_eps_and_kappa(query, 1, 1.0, 0.0).kappa ==
          doctest::Approx(0.0));
  }
  SUBCASE("offset may be negative and is reported as-is") {
    query.epsilon = 0.5;
    query.consistency_c = 100.0;
    CHECK(sav_eps_and_kappa(query, 1, 1.0, 0.0).kappa < 0.0);
  }
}

TEST_CASE("explicit dependent bound") {
  SUBCASE("all-optimal instances cost nothing") {
    MabInstance instance;
    instance.arms.assign(3, GaussianArmPair{0.5, 0.5});
    instance.offline_counts.assign(3, 10);
    instance.horizon = 100;
    CHECK(dep_upper_explicit(instance, BiasBound::all_infinite(3)) == 0.0);
  }
  MabInstance instance;
  instance.arms = {{1.0, 1.0}, {0.0, 0.0}};
  instance.offline_counts = {0, 0};
  instance.horizon = 10000;
  SUBCASE("no offline data") {
    CHECK(dep_upper_explicit(instance, BiasBound{{0.0, 0.0}}) ==
          doctest::Approx(1247.1106310135544).epsilon(1e-9));
  }
  SUBCASE("large aligned offline data clamps to the gap") {
    instance.offline_counts = {0, 1000000};
    CHECK(dep_upper_explicit(instance, BiasBound{{0.0, 0.0}}) ==
          doctest::Approx(2.6449340668482264).epsilon(1e-9));
  }
}

TEST_CASE("water-filling closed forms") {
  SUBCASE("uniform counts") {
    const Waterfill wf =
        tau_star_waterfill(std::vector<std::int64_t>(10, 1000), 10000.0);
    CHECK(wf.tau_star == 2000.0);
    for (double n : wf.n_star) CHECK(n == 1000.0);
    CHECK(wf.exact);
    CHECK(wf.tau_num == 20000);
    CHECK(wf.tau_den == 10);
  }
  SUBCASE("half the arms hold data, light-data regime") {
    std::vector<std::int64_t> t_s(10, 0);
    for (int a = 0; a < 5; ++a) t_s[a] = 100;
    CHECK(tau_star_waterfill(t_s, 1000.0).tau_star == 150.0);
  }
  SUBCASE("most arms hold data, heavy-data regime") {
    std::vector<std::int64_t> t_s(10, 1000);
    t_s[8] = 0;
    t_s[9] = 0;
    CHECK(tau_star_waterfill(t_s, 1000.0).tau_star == 500.0);
  }
  SUBCASE("degenerate single arm") {
    const Waterfill wf = tau_star_waterfill({7}, 5.0);
    CHECK(wf.tau_star == 12.0);
    CHECK(wf.n_star[0] == 5.0);
  }
  CHECK_THROWS_AS(tau_star_waterfill({}, 10.0), PreconditionError);
  CHECK_THROWS_AS(tau_star_waterfill({1}, 0.0), PreconditionError);
}

TEST_CASE("water-filling matches bisection and stays feasible") {
  Xoshiro256pp gen(99);
  for (int rep = 0; rep < 200; ++rep) {
    const auto k = 1 + gen.next_u64() % 20;
    std::vector<std::int64_t> t_s(k);
    for (auto& c : t_s)
      c = static_cast<std::int64_t>(gen.next_u64() % 10001);
    const double mass =
        static_cast<double>(1 + gen.next_u64() % 100000);
    const Waterfill wf = tau_star_waterfill(t_s, mass);
    const double oracle = bisect_tau(t_s, mass);
    CHECK(std::abs(wf.tau_star - oracle) <= 1e-9 * wf.tau_star);

    REQUIRE(wf.exact);
    // exact feasibility on the rational representation
    std::int64_t allocated = 0;
    for (std::int64_t c : t_s)
      allocated += std::max<std::int64_t>(wf.tau_num - wf.tau_den * c, 0);
    CHECK(allocated == wf.tau_den * static_cast<std::int64_t>(mass));
    for (std::size_t a = 0; a < k; ++a)
      CHECK(wf.tau_num <=
            wf.tau_den * t_s[a] +
                std::max<std::int64_t>(wf.tau_num - wf.tau_den * t_s[a], 0));
  }
}

TEST_CASE("water level dominates the feasible floor") {
  Xoshiro256pp gen(3);
  for (int rep = 0; rep < 50; ++rep) {
    const auto k = 1 + gen.next_u64() % 12;
    std::vector<std::int64_t> t_s(k);
    std::int64_t min_ts = 1 << 30;
    for (auto& c : t_s) {
      c = static_cast<std::int64_t>(gen.next_u64() % 5000);
      min_ts = std::min(min_ts, c);
    }
    const double mass = static_cast<double>(1 + gen.next_u64() % 20000);
    const double floor =
        mass / static_cast<double>(k) + static_cast<double>(min_ts);
    CHECK(tau_star_waterfill(t_s, mass).tau_star >= floor - 1e-9);
  }
}

TEST_CASE("independent profile") {
  MabInstance instance;
  instance.arms.assign(10, GaussianArmPair{0.0, 0.0});
  instance.arms[0].mu_on = 1.0;
  instance.offline_counts.assign(10, 1000);
  instance.horizon = 10000;
  SUBCASE("frozen branches") {
    const IndepProfile p =
        indep_upper_profile(instance, BiasBound{std::vector<double>(10, 0.0)},
                            0.1);
    CHECK(p.branch_ucb == doctest::Approx(1072.9830131446736).epsilon(1e-12));
    CHECK(p.branch_warm == doctest::Approx(758.7135646925732).epsilon(1e-12));
    CHECK(p.min == p.branch_warm);
  }
  SUBCASE("infinite bias bound disables the warm branch") {
    const IndepProfile p =
        indep_upper_profile(instance, BiasBound::all_infinite(10), 0.1);
    CHECK(p.branch_warm == kInf);
    CHECK(p.min == p.branch_ucb);
  }
  SUBCASE("no offline data makes both branches coincide") {
    instance.offline_counts.assign(10, 0);
    const IndepProfile p =
        indep_upper_profile(instance, BiasBound{std::vector<double>(10, 0.0)},
                            0.1);
    CHECK(p.branch_warm ==
          doctest::Approx(p.branch_ucb).epsilon(1e-12));
  }
  SUBCASE("theorem hypothesis is enforced") {
    instance.horizon = 5;
    CHECK_THROWS_AS(
        indep_upper_profile(instance, BiasBound::all_infinite(10), 0.1),
        PreconditionError);
  }
}

TEST_CASE("combinatorial independent profile") {
  SUBCASE("rho=1, gamma=1, m=1 reduces to the plain profile") {
    const std::vector<std::int64_t> t_s(10, 1000);
    const CombIndepProfile comb =
        comb_indep_upper_profile(t_s, 10000, 0.1, 1.0, 1.0, 1, true, 0.0);
    MabInstance instance;
    instance.arms.assign(10, GaussianArmPair{0.0, 0.0});
    instance.offline_counts = t_s;
    instance.horizon = 10000;
    const IndepProfile plain = indep_upper_profile(
        instance, BiasBound{std::vector<double>(10, 0.0)}, 0.1);
    CHECK(comb.t1 == doctest::Approx(plain.branch_ucb).epsilon(1e-12));
    CHECK(comb.t2 == doctest::Approx(plain.branch_warm).epsilon(1e-12));
    CHECK(comb.linear_branch_ucb ==
          doctest::Approx(plain.branch_ucb).epsilon(1e-12));
    CHECK(comb.linear_branch_warm ==
          doctest::Approx(plain.branch_warm).epsilon(1e-12));
    CHECK(comb.tau_star_c == comb.tau_star);
  }
  SUBCASE("linear mass scales with the cardinality") {
    const std::vector<std::int64_t> t_s(4, 0);
    const CombIndepProfile comb =
        comb_indep_upper_profile(t_s, 10000, 0.1, 2.0, 1.0, 2, true, 0.0);
    CHECK(comb.tau_star_c == doctest::Approx(5000.0));
  }
  SUBCASE("rho outside (0,1] is rejected") {
    CHECK_THROWS_AS(comb_indep_upper_profile({0, 0}, 100, 0.1, 1.0, 0.0, 1,
                                             false, 0.0),
                    PreconditionError);
    CHECK_THROWS_AS(comb_indep_upper_profile({0, 0}, 100, 0.1, 1.0, 1.5, 1,
                                             false, 0.0),
                    PreconditionError);
  }
}

TEST_CASE("per-arm minimum gaps over enumerable families") {
  SUBCASE("two disjoint paths") {
    CombInstance instance;
    for (double mu : {1.0, 1.0, 0.0, 3.0}) instance.base.push_back({mu, mu});
    instance.offline_counts.assign(4, 0);
    instance.horizon = 100;
    instance.family = MPathFamily{2};
    const GapStats stats =
        delta_min_profile(instance, RewardModel::linear(2));
    CHECK(stats.optimal_action == Action{2, 3});
    CHECK(stats.delta_max == doctest::Approx(1.0));
    CHECK(*stats.delta_min[0] == doctest::Approx(1.0));
    CHECK(*stats.delta_min[1] == doctest::Approx(1.0));
    CHECK_FALSE(stats.delta_min[2].has_value());
    CHECK_FALSE(stats.delta_min[3].has_value());
  }
  SUBCASE("a single action has no sub-optimal gaps") {
    CombInstance instance;
    instance.base = {{1, 1}, {0, 0}};
    instance.offline_counts = {0, 0};
    instance.horizon = 10;
    instance.family = ExplicitFamily{{Action{0, 1}}};
    const GapStats stats =
        delta_min_profile(instance, RewardModel::linear(2));
    CHECK(stats.delta_max == 0.0);
    CHECK_FALSE(stats.delta_min[0].has_value());
    CHECK_FALSE(stats.delta_min[1].has_value());
  }
  SUBCASE("singleton family recovers per-arm gaps") {
    CombInstance instance;
    for (double mu : {2.0, 1.0, 0.0}) instance.base.push_back({mu, mu});
    instance.offline_counts.assign(3, 0);
    instance.horizon = 10;
    instance.family = TopMFamily{1};
    const GapStats stats =
        delta_min_profile(instance, RewardModel::linear(1));
    CHECK_FALSE(stats.delta_min[0].has_value());
    CHECK(*stats.delta_min[1] == doctest::Approx(1.0));
    CHECK(*stats.delta_min[2] == doctest::Approx(2.0));
    CHECK(stats.delta_max == doctest::Approx(2.0));
  }
}

TEST_CASE("combinatorial dependent bound") {
  SUBCASE("m=1 matches the per-arm expression") {
    CombInstance instance;
    for (double mu : {2.0, 1.0, 0.0}) instance.base.push_back({mu, mu});
    instance.offline_counts = {0, 50, 80};
    instance.horizon = 1000;
    instance.family = TopMFamily{1};
    const BiasBound v{{0.1, 0.1, 0.1}};
    for (std::size_t a = 0; a < 3; ++a)
      instance.base[a].mu_off = instance.base[a].mu_on + 0.1;
    const double got =
        comb_dep_upper(instance, v, RewardModel::linear(1));
    const double log_t = std::log(1000.0);
    double expected = 0.0;
    for (std::size_t a = 1; a < 3; ++a) {
      const double delta = 2.0 - instance.base[a].mu_on;
      const double omega = 0.2;
      const double saving = sav0(instance.offline_counts[a], delta, omega);
      expected += std::max(log_t / delta - saving, 2.0);
    }
    CHECK(got == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("misleading offline data zeroes the saving") {
    CombInstance instance;
    for (double mu : {1.0, 0.0}) instance.base.push_back({mu, mu + 2.0});
    instance.offline_counts = {100, 100};
    instance.horizon = 1000;
    instance.family = TopMFamily{1};
    const BiasBound v{{2.0, 2.0}};  // omega = 4 >= any gap
    const double got = comb_dep_upper(instance, v, RewardModel::linear(1));
    CHECK(got == doctest::Approx(std::max(std::log(1000.0) / 1.0, 1.0)));
  }
  SUBCASE("aligned data builds the scaled saving") {
    CombInstance instance;
    for (double mu : {1.0, 1.0, 0.0, 0.0}) instance.base.push_back({mu, mu});
    instance.offline_counts.assign(4, 50);
    instance.horizon = 1000;
    instance.family = MPathFamily{2};
    const BoundQuery query;
    const CombBoundReport report = evaluate_comb_bounds(
        instance, BiasBound{{0, 0, 0, 0}}, query);
    REQUIRE(report.sav_com[2].has_value());
    // m * T_S * Delta_min * 1 = 2 * 50 * 2
    CHECK(*report.sav_com[2] == doctest::Approx(200.0));
  }
}

TEST_CASE("adversarial pair generator") {
  SUBCASE("frozen numeric example") {
    const ImpossiblePair pair = impossibility_pair(0.25, 0.2, 0.5, 1e8);
    CHECK(pair.threshold == doctest::Approx(0.5402992105546894).epsilon(1e-9));
    CHECK(pair.q.arms[1].mu_on ==
          doctest::Approx(0.010790367203196568).epsilon(1e-9));
    CHECK(pair.q.arms[1].mu_on > std::pow(1e8, -0.25));
    CHECK(pair.p.arms[1].mu_on == doctest::Approx(-0.01).epsilon(1e-12));
  }
  SUBCASE("offline laws are shared") {
    const ImpossiblePair pair = impossibility_pair(0.3, 0.2, 0.2, 1e6);
    for (int a = 0; a < 2; ++a) {
      CHECK(pair.p.arms[static_cast<std::size_t>(a)].mu_off ==
            pair.q.arms[static_cast<std::size_t>(a)].mu_off);
    }
    CHECK(pair.p.offline_counts == pair.q.offline_counts);
    CHECK(pair.p.arms[0].mu_on == pair.q.arms[0].mu_on);
  }
  SUBCASE("inadmissible constants are rejected with the threshold") {
    CHECK_THROWS_AS(impossibility_pair(0.25, 0.2, 10.0, 1e8),
                    PreconditionError);
    CHECK_THROWS_AS(impossibility_pair(0.6, 0.2, 0.1, 1e8),
                    PreconditionError);
    CHECK_THROWS_AS(impossibility_pair(0.25, 0.3, 0.1, 1e8),
                    PreconditionError);
    CHECK_THROWS_AS(impossibility_pair(0.25, 0.2, -1.0, 1e8),
                    PreconditionError);
  }
}

TEST_CASE("bound report carries every section") {
  const MabTrialConfig config = preset_optimistic(0.3);
  const BoundQuery query;
  const BoundReport report =
      evaluate_bounds(config.instance, config.v, query);
  CHECK(report.k == 10);
  CHECK(report.delta_max == 1.0);
  CHECK(report.omega[3] == doctest::Approx(0.6));
  REQUIRE(report.sav0_per_arm[3].has_value());
  CHECK(*report.sav0_per_arm[3] == doctest::Approx(1000.0 * 0.16));
  CHECK_FALSE(report.sav0_per_arm[0].has_value());
  CHECK(report.waterfill.tau_star == doctest::Approx(2000.0));
  const std::string text = format_bound_report(report);
  CHECK(text.find("tau_star=2000") != std::string::npos);
  CHECK(text.find("sav0[0]=n/a") != std::string::npos);
  CHECK(text.find("dep_upper_explicit=") != std::string::npos);
}
