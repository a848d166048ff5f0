#include <doctest.h>

#include <cmath>
#include <limits>

#include "core/errors.hpp"
#include "core/policy.hpp"
#include "core/rng.hpp"

using namespace odb;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

PolicyState make_state(PolicyKind kind, const MabInstance& instance,
                       const BiasBound& v, std::uint64_t seed = 1) {
  return init_policy(kind, sample_offline(instance, seed), v, instance,
                     DeltaSchedule::dependent());
}

MabInstance simple_instance(std::size_t k, std::int64_t t_s,
                            std::int64_t horizon) {
  MabInstance instance;
  instance.arms.assign(k, GaussianArmPair{0.0, 0.0});
  instance.arms[0] = {1.0, 1.0};
  instance.offline_counts.assign(k, t_s);
  instance.horizon = horizon;
  return instance;
}

// Action sequence under shared streams, for trajectory-equality checks.
std::vector<std::size_t> trajectory(PolicyKind kind,
                                    const MabInstance& instance,
                                    const BiasBound& v, std::uint64_t seed) {
  PolicyState state = make_state(kind, instance, v, seed);
  std::vector<RewardStream> streams;
  for (std::size_t a = 0; a < instance.num_arms(); ++a)
    streams.emplace_back(mix_seed(seed, kPurposeOnline, a));
  std::vector<std::size_t> actions;
  for (std::int64_t t = 1; t <= instance.horizon; ++t) {
    std::size_t arm;
    if (state.t <= static_cast<std::int64_t>(instance.num_arms())) {
      arm = static_cast<std::size_t>(state.t - 1);
    } else {
      arm = select_arm(state, compute_indices(state, state.t));
    }
    actions.push_back(arm);
    policy_update(state, arm,
                  instance.arms[arm].mu_on + streams[arm].gaussian());
  }
  return actions;
}
}  // namespace

TEST_CASE("delta schedules") {
  CHECK(DeltaSchedule::dependent().at(1, 10) == doctest::Approx(0.05));
  CHECK(DeltaSchedule::independent(0.1).at(10, 10) ==
        doctest::Approx(5e-5));
  CHECK(DeltaSchedule::dependent().at(100, 10) == doctest::Approx(5e-6));
  DeltaSchedule missing;
  missing.tag = ScheduleTag::InstanceIndependent;
  CHECK_THROWS_AS(missing.at(1, 2), PreconditionError);
}

TEST_CASE("confidence radii") {
  SUBCASE("no offline mass collapses the warm radius") {
    const Radii r = compute_radii(100, 5e-6, 100, 0, kInf);
    CHECK(r.rad == doctest::Approx(0.5916821784).epsilon(1e-5));
    CHECK(r.rad == r.rad_s);
  }
  SUBCASE("pooled radius with zero bias bound") {
    const Radii r = compute_radii(100, 5e-6, 100, 300, 0.0);
    CHECK(r.rad_s == doctest::Approx(0.2958410892).epsilon(1e-5));
  }
  SUBCASE("infinite bias bound with offline mass") {
    const Radii r = compute_radii(17, 1e-3, 1, 5, kInf);
    CHECK(r.rad_s == kInf);
    CHECK(std::isfinite(r.rad));
  }
  CHECK_THROWS_AS(compute_radii(1, 0.5, 0, 0, 0.0), ContractError);
}

TEST_CASE("index computation") {
  SUBCASE("indices coincide without offline data") {
    MabInstance instance = simple_instance(1, 0, 10);
    PolicyState state = make_state(PolicyKind::MinUcb, instance,
                                   BiasBound::all_infinite(1));
    state.n = {4};
    state.r_hat = {0.0};
    state.t = 5;
    const IndexPair idx = compute_indices(state, 5);
    CHECK(idx.ucb[0] == idx.ucb_s[0]);
  }
  SUBCASE("pure-ucb reports an infinite warm index") {
    MabInstance instance = simple_instance(3, 10, 10);
    PolicyState state = make_state(PolicyKind::PureUcb, instance,
                                   BiasBound::all_infinite(3));
    state.n = {1, 1, 1};
    const IndexPair idx = compute_indices(state, 4);
    for (double x : idx.ucb_s) CHECK(x == kInf);
  }
  SUBCASE("warm index pools online and offline means") {
    MabInstance instance;
    instance.arms = {{0.0, 0.0}};
    instance.offline_counts = {300};
    instance.horizon = 200;
    OfflineDataset ds;
    ds.samples = {std::vector<double>(300, 0.1)};
    ds.mean_cache = {0.1};
    // delta_t = 0.1/(2*1*100^2) = 5e-6 at t = 100
    PolicyState state =
        init_policy(PolicyKind::MinUcb, ds, BiasBound{{0.0}}, instance,
                    DeltaSchedule::independent(0.1));
    state.n = {100};
    state.r_hat = {0.2};
    const IndexPair idx = compute_indices(state, 100);
    // pooled mean (100*0.2 + 300*0.1)/400 = 0.125 plus the pooled radius
    CHECK(idx.ucb_s[0] == doctest::Approx(0.4208410892).epsilon(1e-5));
  }
  SUBCASE("uninitialized arm is a contract violation") {
    MabInstance instance = simple_instance(2, 0, 10);
    PolicyState state = make_state(PolicyKind::MinUcb, instance,
                                   BiasBound::all_infinite(2));
    CHECK_THROWS_AS(compute_indices(state, 3), ContractError);
  }
}

TEST_CASE("arm selection") {
  MabInstance instance = simple_instance(10, 0, 100);
  PolicyState state = make_state(PolicyKind::MinUcb, instance,
                                 BiasBound::all_infinite(10));
  SUBCASE("forced round-robin during initialization") {
    state.t = 3;
    CHECK(select_arm(state, IndexPair{}) == 2);
  }
  SUBCASE("argmax of the min index afterwards") {
    state.t = 11;
    IndexPair idx;
    idx.ucb = {0.5, 0.7, 0.6};
    idx.ucb_s = {kInf, kInf, kInf};
    state.k = 3;
    CHECK(select_arm(state, idx) == 1);
    idx.ucb = {0.7, 0.7};
    idx.ucb_s = {kInf, kInf};
    state.k = 2;
    CHECK(select_arm(state, idx) == 0);
  }
}

TEST_CASE("policy update keeps running means") {
  MabInstance instance = simple_instance(1, 0, 10);
  PolicyState state = make_state(PolicyKind::MinUcb, instance,
                                 BiasBound::all_infinite(1));
  state.n = {1};
  state.r_hat = {0.0};
  policy_update(state, 0, 1.0);
  CHECK(state.n[0] == 2);
  CHECK(state.r_hat[0] == doctest::Approx(0.5));

  state.n = {3};
  state.r_hat = {2.0};
  policy_update(state, 0, -1.0);
  CHECK(state.r_hat[0] == doctest::Approx(1.25));

  state.n = {1};
  state.r_hat = {0.7};
  for (int i = 0; i < 20; ++i) policy_update(state, 0, 0.7);
  CHECK(state.r_hat[0] == doctest::Approx(0.7));
}

TEST_CASE("initialization per policy kind") {
  SUBCASE("min-ucb with empty dataset matches pure-ucb state") {
    MabInstance instance = simple_instance(4, 0, 10);
    const PolicyState a = make_state(PolicyKind::MinUcb, instance,
                                     BiasBound::all_infinite(4));
    const PolicyState b = make_state(PolicyKind::PureUcb, instance,
                                     BiasBound::all_infinite(4));
    CHECK(a.n == b.n);
    CHECK(a.r_hat == b.r_hat);
  }
  SUBCASE("pooled warm start seeds counts and means") {
    MabInstance instance;
    instance.arms = {{0.0, 0.3}};
    instance.offline_counts = {5};
    instance.horizon = 10;
    OfflineDataset ds;
    ds.samples = {{0.3, 0.3, 0.3, 0.3, 0.3}};
    ds.mean_cache = {0.3};
    const PolicyState state =
        init_policy(PolicyKind::MonUcbPooled, ds, BiasBound{{0.3}}, instance,
                    DeltaSchedule::dependent());
    CHECK(state.n[0] == 5);
    CHECK(state.r_hat[0] == doctest::Approx(0.3));
  }
  SUBCASE("ucbs-only reports infinite vanilla indices") {
    MabInstance instance = simple_instance(2, 4, 10);
    PolicyState state =
        make_state(PolicyKind::UcbSOnly, instance, BiasBound{{0.0, 0.0}});
    state.n = {1, 1};
    const IndexPair idx = compute_indices(state, 3);
    CHECK(idx.ucb[0] == kInf);
    CHECK(idx.ucb[1] == kInf);
    CHECK(std::isfinite(idx.ucb_s[0]));
  }
  SUBCASE("shape mismatches are rejected") {
    MabInstance instance = simple_instance(2, 3, 10);
    OfflineDataset ds;  // wrong shape on purpose
    ds.samples = {{0.0}};
    ds.mean_cache = {0.0};
    CHECK_THROWS_AS(init_policy(PolicyKind::MinUcb, ds,
                                BiasBound::all_infinite(2), instance,
                                DeltaSchedule::dependent()),
                    PreconditionError);
  }
}

TEST_CASE("policy names parse both ways") {
  for (PolicyKind kind :
       {PolicyKind::MinUcb, PolicyKind::PureUcb, PolicyKind::UcbSOnly,
        PolicyKind::MonUcbPooled})
    CHECK(parse_policy(policy_name(kind)) == kind);
  CHECK_FALSE(parse_policy("nope").has_value());
}

TEST_CASE("confidence event holds for exact estimates") {
  MabInstance instance;
  instance.arms = {{0.5, 0.6}, {0.1, -0.1}};
  instance.offline_counts = {40, 40};
  instance.horizon = 100;
  const BiasBound v = BiasBound::exact_gap(instance);
  OfflineDataset ds;
  ds.samples = {std::vector<double>(40, 0.6), std::vector<double>(40, -0.1)};
  ds.mean_cache = {0.6, -0.1};
  PolicyState state = init_policy(PolicyKind::MinUcb, ds, v, instance,
                                  DeltaSchedule::dependent());
  state.n = {10, 10};
  state.r_hat = {0.5, 0.1};  // zero estimation error
  const double dt = state.schedule.at(50, 2);
  CHECK(xi_holds(instance, state, 50, dt));
}

TEST_CASE("min index never exceeds the vanilla index") {
  MabInstance instance = simple_instance(5, 200, 400);
  for (std::size_t a = 0; a < 5; ++a)
    instance.arms[a].mu_off = instance.arms[a].mu_on + 0.2;
  const BiasBound v = BiasBound::exact_gap(instance);
  PolicyState state = make_state(PolicyKind::MinUcb, instance, v, 9);
  std::vector<RewardStream> streams;
  for (std::size_t a = 0; a < 5; ++a)
    streams.emplace_back(mix_seed(9, kPurposeOnline, a));
  for (std::int64_t t = 1; t <= instance.horizon; ++t) {
    std::size_t arm;
    if (state.t <= 5) {
      arm = static_cast<std::size_t>(state.t - 1);
    } else {
      const IndexPair idx = compute_indices(state, state.t);
      arm = select_arm(state, idx);
      double chosen = std::min(idx.ucb[arm], idx.ucb_s[arm]);
      for (std::size_t a = 0; a < 5; ++a) {
        CHECK(std::min(idx.ucb[a], idx.ucb_s[a]) <= idx.ucb[a]);
        CHECK(chosen >= std::min(idx.ucb[a], idx.ucb_s[a]));
      }
    }
    policy_update(state, arm,
                  instance.arms[arm].mu_on + streams[arm].gaussian());
  }
}

TEST_CASE("infinite bias bounds reduce min-ucb to pure-ucb trajectories") {
  MabInstance instance = simple_instance(6, 500, 3000);
  for (std::size_t a = 0; a < 6; ++a) instance.arms[a].mu_off = 5.0;  // junk
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    CHECK(trajectory(PolicyKind::MinUcb, instance,
                     BiasBound::all_infinite(6), seed) ==
          trajectory(PolicyKind::PureUcb, instance,
                     BiasBound::all_infinite(6), seed));
  }
}

TEST_CASE("without offline data all warm variants match pure-ucb") {
  MabInstance instance = simple_instance(5, 0, 2000);
  const BiasBound v{{0.0, 0.0, 0.0, 0.0, 0.0}};
  const auto pure =
      trajectory(PolicyKind::PureUcb, instance, v, 77);
  CHECK(trajectory(PolicyKind::MinUcb, instance, v, 77) == pure);
  CHECK(trajectory(PolicyKind::UcbSOnly, instance, v, 77) == pure);
}

TEST_CASE("large aligned offline datasets stop sub-optimal pulls") {
  // Two arms, unit gap, zero discrepancy on the weak arm, offline mass
  // beyond the elimination threshold: whenever the confidence event
  // held all run long, the weak arm keeps only its forced pull.
  MabInstance instance;
  instance.arms = {{1.0, 1.0}, {0.0, -0.5}};
  instance.offline_counts = {0, 2000};
  instance.horizon = 2000;
  const BiasBound v{{0.0, 0.5}};  // omega(2) = 0.5 - 0.5 = 0
  int clean_trials = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    PolicyState state = make_state(PolicyKind::MinUcb, instance, v, seed);
    std::vector<RewardStream> streams;
    for (std::size_t a = 0; a < 2; ++a)
      streams.emplace_back(mix_seed(seed, kPurposeOnline, a));
    bool xi_all = true;
    std::int64_t weak_pulls = 0;
    for (std::int64_t t = 1; t <= instance.horizon; ++t) {
      std::size_t arm;
      if (state.t <= 2) {
        arm = static_cast<std::size_t>(state.t - 1);
      } else {
        const double dt = state.schedule.at(state.t, 2);
        if (!xi_holds(instance, state, state.t, dt)) xi_all = false;
        arm = select_arm(state, compute_indices(state, state.t));
      }
      if (arm == 1) ++weak_pulls;
      policy_update(state, arm,
                    instance.arms[arm].mu_on + streams[arm].gaussian());
    }
    if (xi_all) {
      ++clean_trials;
      CHECK(weak_pulls <= 2);
    }
  }
  CHECK(clean_trials >= 15);  // the confidence event rarely fails
}

TEST_CASE("confidence event failure rate stays under the union bound") {
  // Fresh redraws of a fixed-time state; the failure frequency must stay
  // below 2K delta_t plus three standard errors.
  const std::int64_t t = 200;
  const std::size_t k = 5;
  const std::int64_t n_per_arm = 20, t_s = 50;
  MabInstance instance;
  instance.arms = {{0.5, 0.6}, {0.3, 0.2}, {-0.2, -0.2}, {0.0, 0.2},
                   {0.1, -0.2}};
  instance.offline_counts.assign(k, t_s);
  instance.horizon = t;
  const BiasBound v = BiasBound::exact_gap(instance);
  const double dt = DeltaSchedule::dependent().at(t, static_cast<int>(k));

  const int redraws = 20000;
  int failures = 0;
  RewardStream noise(424242);
  for (int rep = 0; rep < redraws; ++rep) {
    PolicyState state;
    state.kind = PolicyKind::MinUcb;
    state.k = k;
    state.t = t;
    state.schedule = DeltaSchedule::dependent();
    state.v = v;
    state.t_s.assign(k, t_s);
    state.n.assign(k, n_per_arm);
    state.r_hat.resize(k);
    state.offline_means.resize(k);
    for (std::size_t a = 0; a < k; ++a) {
      double sum = 0.0;
      for (std::int64_t i = 0; i < n_per_arm; ++i)
        sum += instance.arms[a].mu_on + noise.gaussian();
      state.r_hat[a] = sum / static_cast<double>(n_per_arm);
      sum = 0.0;
      for (std::int64_t i = 0; i < t_s; ++i)
        sum += instance.arms[a].mu_off + noise.gaussian();
      state.offline_means[a] = sum / static_cast<double>(t_s);
    }
    if (!xi_holds(instance, state, t, dt)) ++failures;
  }
  const double p = 2.0 * static_cast<double>(k) * dt;
  const double allowed =
      redraws * p + 3.0 * std::sqrt(p * (1.0 - p) * redraws);
  CHECK(static_cast<double>(failures) <= allowed);
}
