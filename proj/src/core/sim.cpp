#include "core/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "core/csv.hpp"
#include "core/errors.hpp"
#include "core/rng.hpp"

namespace odb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

OfflineDataset draw_offline_dataset(const MabTrialConfig& config,
                                    std::uint64_t root_seed) {
  const std::uint64_t seed =
      config.fixed_dataset ? config.dataset_seed : root_seed;
  if (config.env.kind == EnvSpec::Kind::Gaussian)
    return sample_offline(config.instance, seed);
  // Price environment: offline samples follow the shifted market law.
  const std::size_t k = config.instance.num_arms();
  OfflineDataset ds;
  ds.samples.resize(k);
  ds.mean_cache.resize(k);
  for (std::size_t a = 0; a < k; ++a) {
    const std::int64_t count = config.instance.offline_counts[a];
    if (count == 0) continue;
    RewardStream stream(mix_seed(seed, kPurposeOffline, a));
    double sum = 0.0;
    auto& samples = ds.samples[a];
    samples.reserve(static_cast<std::size_t>(count));
    for (std::int64_t s = 0; s < count; ++s) {
      const double x =
          stream.bernoulli(config.env.p_off[a]) ? config.env.price[a] : 0.0;
      samples.push_back(x);
      sum += x;
    }
    ds.mean_cache[a] = sum / static_cast<double>(count);
  }
  return ds;
}

double draw_online(const EnvSpec& env, const MabInstance& instance,
                   std::size_t arm, RewardStream& stream) {
  if (env.kind == EnvSpec::Kind::Gaussian)
    return instance.arms[arm].mu_on + stream.gaussian();
  return stream.bernoulli(env.p_on[arm]) ? env.price[arm] : 0.0;
}

}  // namespace

TrialResult run_trial(const MabTrialConfig& config, PolicyKind kind,
                      std::uint64_t root_seed, TrialRecord record) {
  const MabInstance& instance = config.instance;
  instance.validate();
  const std::size_t k = instance.num_arms();
  const OfflineDataset dataset = draw_offline_dataset(config, root_seed);
  PolicyState state =
      init_policy(kind, dataset, config.v, instance, config.schedule);
  const GapProfile gaps = gap_profile(instance);

  std::vector<RewardStream> streams;
  streams.reserve(k);
  for (std::size_t a = 0; a < k; ++a)
    streams.emplace_back(mix_seed(root_seed, kPurposeOnline, a));

  TrialResult result;
  result.pulls.assign(k, 0);
  if (record.trajectory)
    result.cum_regret.reserve(static_cast<std::size_t>(instance.horizon));
  if (record.actions)
    result.actions.reserve(static_cast<std::size_t>(instance.horizon));

  double cum = 0.0;
  for (std::int64_t t = 1; t <= instance.horizon; ++t) {
    std::size_t arm;
    if (state.t <= static_cast<std::int64_t>(k)) {
      arm = static_cast<std::size_t>(state.t - 1);
    } else {
      const IndexPair indices = compute_indices(state, state.t);
      arm = select_arm(state, indices);
    }
    const double reward = draw_online(config.env, instance, arm, streams[arm]);
    policy_update(state, arm, reward);
    result.pulls[arm] += 1;
    cum += gaps.delta[arm];
    if (record.trajectory) result.cum_regret.push_back(cum);
    if (record.actions)
      result.actions.push_back(static_cast<std::uint32_t>(arm));
  }
  result.final_regret = cum;
  return result;
}

CombTrialResult run_comb_trial(const CombTrialConfig& config,
                               std::uint64_t root_seed, TrialRecord record) {
  const CombInstance& instance = config.instance;
  instance.validate();
  const std::size_t k = instance.num_base();
  const bool influence =
      std::holds_alternative<InfluenceFamily>(instance.family);
  const MabInstance base = instance.base_instance();

  OfflineDataset dataset;
  if (!influence) {
    dataset = sample_offline(base, root_seed);
  } else {
    dataset.samples.resize(k);
    dataset.mean_cache.resize(k);
    for (std::size_t a = 0; a < k; ++a) {
      const std::int64_t count = instance.offline_counts[a];
      if (count == 0) continue;
      RewardStream stream(mix_seed(root_seed, kPurposeOffline, a));
      double sum = 0.0;
      auto& samples = dataset.samples[a];
      for (std::int64_t s = 0; s < count; ++s) {
        const double x = stream.bernoulli(base.arms[a].mu_off) ? 1.0 : 0.0;
        samples.push_back(x);
        sum += x;
      }
      dataset.mean_cache[a] = sum / static_cast<double>(count);
    }
  }

  CombPolicyState state =
      init_comb_policy(dataset, config.v, instance, config.schedule);
  const RewardModel model = influence
                                ? RewardModel::influence_spread()
                                : RewardModel::linear(instance.max_cardinality());
  const OracleSpec spec = OracleSpec::for_family(instance);

  CombTrialResult result;
  const double r_star = optimal_value(instance, model, spec,
                                      &result.approximate);
  const double scaled_star = spec.alpha * spec.beta * r_star;
  std::vector<double> mu(k);
  for (std::size_t a = 0; a < k; ++a) mu[a] = base.arms[a].mu_on;

  std::vector<RewardStream> streams;
  streams.reserve(k);
  for (std::size_t a = 0; a < k; ++a)
    streams.emplace_back(mix_seed(root_seed, kPurposeOnline, a));

  if (record.trajectory)
    result.cum_regret.reserve(static_cast<std::size_t>(instance.horizon));
  std::vector<double> rewards;
  double cum = 0.0;
  for (std::int64_t t = 1; t <= instance.horizon; ++t) {
    const Action action = comb_select_action(state, instance, model, spec);
    rewards.clear();
    for (std::uint32_t a : action) {
      rewards.push_back(influence
                            ? (streams[a].bernoulli(mu[a]) ? 1.0 : 0.0)
                            : mu[a] + streams[a].gaussian());
    }
    comb_update(state, action, rewards);
    cum += scaled_star - model.value(instance, mu, action);
    if (record.trajectory) result.cum_regret.push_back(cum);
    if (record.actions) result.actions.push_back(action);
  }
  result.final_regret = cum;
  result.observe_counts = state.n;
  return result;
}

ExperimentData run_experiment(const std::vector<SimJob>& jobs,
                              std::int64_t trials, std::uint64_t seed,
                              int workers, bool want_trajectories) {
  if (trials < 1) throw PreconditionError("experiments need trials >= 1");
  if (jobs.empty()) throw PreconditionError("experiments need jobs");
  if (workers < 1) workers = 1;

  ExperimentData data;
  data.finals.assign(jobs.size(), std::vector<double>(
                                      static_cast<std::size_t>(trials), 0.0));
  if (want_trajectories)
    data.trajectories.assign(
        jobs.size(),
        std::vector<std::vector<double>>(static_cast<std::size_t>(trials)));

  const std::size_t total =
      jobs.size() * static_cast<std::size_t>(trials);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string failure;
  std::mutex failure_mutex;

  auto body = [&]() {
    TrialRecord record;
    record.trajectory = want_trajectories;
    for (std::size_t task = next.fetch_add(1); task < total;
         task = next.fetch_add(1)) {
      if (failed.load()) return;
      const std::size_t job_index = task / static_cast<std::size_t>(trials);
      const std::size_t trial = task % static_cast<std::size_t>(trials);
      const std::uint64_t root = mix_seed(seed, kPurposeTrial, trial);
      try {
        const SimJob& job = jobs[job_index];
        double final_regret;
        std::vector<double> traj;
        if (const auto* mab = std::get_if<SimJob::MabWork>(&job.work)) {
          TrialResult r = run_trial(mab->config, mab->kind, root, record);
          final_regret = r.final_regret;
          traj = std::move(r.cum_regret);
        } else {
          const auto& comb = std::get<SimJob::CombWork>(job.work);
          CombTrialResult r = run_comb_trial(comb.config, root, record);
          final_regret = r.final_regret;
          traj = std::move(r.cum_regret);
        }
        data.finals[job_index][trial] = final_regret;
        if (want_trajectories)
          data.trajectories[job_index][trial] = std::move(traj);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failed.exchange(true)) failure = e.what();
        return;
      }
    }
  };

  if (workers == 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& th : pool) th.join();
  }
  if (failed.load()) throw PreconditionError("trial failed: " + failure);

  data.summary.reserve(jobs.size());
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    SummaryRow row;
    row.experiment = jobs[j].experiment;
    row.policy = jobs[j].policy;
    row.param = jobs[j].param;
    row.trials = trials;
    double sum = 0.0;
    for (double x : data.finals[j]) sum += x;
    row.mean = sum / static_cast<double>(trials);
    double sq = 0.0;
    for (double x : data.finals[j]) sq += (x - row.mean) * (x - row.mean);
    row.stddev =
        trials > 1 ? std::sqrt(sq / static_cast<double>(trials - 1)) : 0.0;
    data.summary.push_back(std::move(row));
  }
  return data;
}

std::string raw_csv(const std::vector<SimJob>& jobs,
                    const ExperimentData& data) {
  std::ostringstream out;
  out << "experiment,policy,param,trial,final_regret\n";
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    for (std::size_t i = 0; i < data.finals[j].size(); ++i) {
      out << jobs[j].experiment << ',' << jobs[j].policy << ','
          << fmt_g9(jobs[j].param) << ',' << i << ','
          << fmt_g9(data.finals[j][i]) << "\n";
    }
  }
  return out.str();
}

std::string summary_csv(const ExperimentData& data) {
  std::ostringstream out;
  out << "experiment,policy,param,mean,std,trials\n";
  for (const auto& row : data.summary) {
    out << row.experiment << ',' << row.policy << ',' << fmt_g9(row.param)
        << ',' << fmt_g9(row.mean) << ',' << fmt_g9(row.stddev) << ','
        << row.trials << "\n";
  }
  return out.str();
}

std::string trajectory_csv(const std::vector<SimJob>& jobs,
                           const ExperimentData& data) {
  std::ostringstream out;
  out << "experiment,policy,param,trial,t,cum_regret\n";
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    for (std::size_t i = 0; i < data.trajectories[j].size(); ++i) {
      const auto& traj = data.trajectories[j][i];
      for (std::size_t t = 0; t < traj.size(); ++t) {
        out << jobs[j].experiment << ',' << jobs[j].policy << ','
            << fmt_g9(jobs[j].param) << ',' << i << ',' << (t + 1) << ','
            << fmt_g9(traj[t]) << "\n";
      }
    }
  }
  return out.str();
}

// ---- presets -----------------------------------------------------------

namespace {

MabTrialConfig bias_sweep_config(double v, bool optimistic,
                                 std::int64_t horizon, std::int64_t t_s) {
  if (!(v > 0.0 && v <= 1.0))
    throw PreconditionError("bias level v must lie in (0, 1]");
  MabTrialConfig config;
  config.instance.arms.resize(10);
  config.instance.arms[0].mu_on = 1.0;
  for (std::size_t a = 1; a < 10; ++a) config.instance.arms[a].mu_on = 0.0;
  for (std::size_t a = 0; a < 10; ++a) {
    const double mu_on = config.instance.arms[a].mu_on;
    config.instance.arms[a].mu_off =
        optimistic ? (a == 0 ? mu_on - v : mu_on + v) : mu_on - v;
  }
  config.instance.offline_counts.assign(10, t_s);
  config.instance.horizon = horizon;
  config.v = BiasBound::exact_gap(config.instance);
  config.schedule = DeltaSchedule::dependent();
  return config;
}

const std::vector<std::int64_t>& fig2_grid() {
  static const std::vector<std::int64_t> grid{50, 500, 1500, 3000, 5000, 7000};
  return grid;
}

constexpr PolicyKind kAllKinds[] = {PolicyKind::MinUcb, PolicyKind::PureUcb,
                                    PolicyKind::UcbSOnly,
                                    PolicyKind::MonUcbPooled};

}  // namespace

MabTrialConfig preset_optimistic(double v) {
  return bias_sweep_config(v, /*optimistic=*/true, 10000, 1000);
}

MabTrialConfig preset_pessimistic(double v) {
  return bias_sweep_config(v, /*optimistic=*/false, 10000, 1000);
}

MabTrialConfig preset_t_sweep(double v, std::int64_t horizon) {
  if (v != 0.4 && v != 0.5 && v != 0.6)
    throw PreconditionError("horizon sweep uses v in {0.4, 0.5, 0.6}");
  const auto& grid = fig2_grid();
  if (std::find(grid.begin(), grid.end(), horizon) == grid.end())
    throw PreconditionError(
        "horizon sweep uses T in {50, 500, 1500, 3000, 5000, 7000}");
  return bias_sweep_config(v, /*optimistic=*/true, horizon, 10000);
}

MabTrialConfig preset_pricing(const PricingSpec& spec) {
  if (spec.prices.empty()) throw PreconditionError("pricing needs prices");
  if (!(spec.utility_hi > spec.utility_lo))
    throw PreconditionError("pricing needs utility_hi > utility_lo");
  if (spec.horizon < 1) throw PreconditionError("pricing needs horizon >= 1");
  const double width = spec.utility_hi - spec.utility_lo;
  auto tail = [&](double a, double shift) {
    // Pr(U + shift >= a) for U ~ Uniform[lo, hi].
    const double p = (spec.utility_hi + shift - a) / width;
    return std::min(1.0, std::max(0.0, p));
  };
  MabTrialConfig config;
  const std::size_t k = spec.prices.size();
  config.instance.arms.resize(k);
  config.env.kind = EnvSpec::Kind::PriceBernoulli;
  config.env.price = spec.prices;
  config.env.p_on.resize(k);
  config.env.p_off.resize(k);
  for (std::size_t a = 0; a < k; ++a) {
    const double price = spec.prices[a];
    if (!(price > 0.0)) throw PreconditionError("prices must be positive");
    config.env.p_on[a] = tail(price, 0.0);
    config.env.p_off[a] = tail(price, spec.shift);
    config.instance.arms[a].mu_on = price * config.env.p_on[a];
    config.instance.arms[a].mu_off = price * config.env.p_off[a];
  }
  config.instance.offline_counts.assign(k, spec.t_s);
  config.instance.horizon = spec.horizon;
  config.v = BiasBound::exact_gap(config.instance);
  config.schedule = DeltaSchedule::dependent();
  return config;
}

ImpossibleConfigs preset_impossibility(double beta, double eps, double c,
                                       double horizon) {
  const ImpossiblePair pair = impossibility_pair(beta, eps, c, horizon);
  ImpossibleConfigs out;
  out.threshold = pair.threshold;
  out.p.instance = pair.p;
  out.q.instance = pair.q;
  // The adversarial setting grants no bias information.
  out.p.v = BiasBound::all_infinite(2);
  out.q.v = BiasBound::all_infinite(2);
  out.p.schedule = DeltaSchedule::dependent();
  out.q.schedule = DeltaSchedule::dependent();
  return out;
}

CombTrialConfig preset_mpath(double bias_bound) {
  if (!(bias_bound >= 0.0))
    throw PreconditionError("bias bound must be >= 0");
  CombTrialConfig config;
  const std::size_t k = 10;
  config.instance.base.resize(k);
  for (std::size_t a = 0; a < k; ++a) {
    const double mu = a < 2 ? 1.0 : 0.0;  // first path optimal
    config.instance.base[a] = {mu, mu};
  }
  config.instance.offline_counts.assign(k, 1000);
  config.instance.horizon = 10000;
  config.instance.family = MPathFamily{2};
  config.v.v.assign(k, bias_bound);
  config.schedule = DeltaSchedule::dependent();
  return config;
}

std::vector<SimJob> preset_jobs(const std::string& name) {
  std::vector<SimJob> jobs;
  auto push_mab = [&](const std::string& experiment, double param,
                      const MabTrialConfig& config, PolicyKind kind) {
    SimJob job;
    job.experiment = experiment;
    job.policy = policy_name(kind);
    job.param = param;
    job.work = SimJob::MabWork{config, kind};
    jobs.push_back(std::move(job));
  };

  if (name == "fig1a" || name == "fig1b") {
    const bool optimistic = name == "fig1a";
    for (int i = 1; i <= 10; ++i) {
      const double v = static_cast<double>(i) / 10.0;
      const MabTrialConfig config =
          optimistic ? preset_optimistic(v) : preset_pessimistic(v);
      for (PolicyKind kind : kAllKinds) push_mab(name, v, config, kind);
    }
  } else if (name == "fig2") {
    for (double v : {0.4, 0.5, 0.6}) {
      const std::string experiment = "fig2_v" + fmt_g9(v);
      for (std::int64_t horizon : fig2_grid()) {
        const MabTrialConfig config = preset_t_sweep(v, horizon);
        for (PolicyKind kind : kAllKinds)
          push_mab(experiment, static_cast<double>(horizon), config, kind);
      }
    }
  } else if (name == "pricing") {
    for (double shift : {0.0, 0.05, 0.1}) {
      PricingSpec spec;
      spec.shift = shift;
      const MabTrialConfig config = preset_pricing(spec);
      for (PolicyKind kind : kAllKinds)
        push_mab("pricing", shift, config, kind);
    }
  } else if (name == "mpath") {
    for (double bias : {0.0, kInf}) {
      SimJob job;
      job.experiment = "mpath";
      job.policy = "min-comb-ucb";
      job.param = bias;
      job.work = SimJob::CombWork{preset_mpath(bias)};
      jobs.push_back(std::move(job));
    }
  } else if (name == "impossibility") {
    const ImpossibleConfigs pair =
        preset_impossibility(0.3, 0.25, 0.1, 1e6);
    for (PolicyKind kind : {PolicyKind::MonUcbPooled, PolicyKind::PureUcb}) {
      push_mab("impossibility_p", 0.3, pair.p, kind);
      push_mab("impossibility_q", 0.3, pair.q, kind);
    }
  } else {
    throw UsageError("unknown preset '" + name + "'");
  }
  return jobs;
}

std::vector<std::pair<std::string, std::string>> preset_files(
    const std::string& name) {
  std::vector<std::pair<std::string, std::string>> files;
  auto add_instance = [&](const std::string& filename,
                          const MabTrialConfig& config) {
    files.emplace_back(filename,
                       format_instance_text({config.instance, config.v}));
  };
  if (name == "fig1a" || name == "fig1b") {
    for (int i = 1; i <= 10; ++i) {
      const double v = static_cast<double>(i) / 10.0;
      const MabTrialConfig config =
          name == "fig1a" ? preset_optimistic(v) : preset_pessimistic(v);
      add_instance(name + "_v" + fmt_g9(v) + ".instance", config);
    }
  } else if (name == "fig2") {
    for (double v : {0.4, 0.5, 0.6})
      for (std::int64_t horizon : fig2_grid())
        add_instance("fig2_v" + fmt_g9(v) + "_T" + std::to_string(horizon) +
                         ".instance",
                     preset_t_sweep(v, horizon));
  } else if (name == "pricing") {
    for (double shift : {0.0, 0.05, 0.1}) {
      PricingSpec spec;
      spec.shift = shift;
      add_instance("pricing_shift" + fmt_g9(shift) + ".instance",
                   preset_pricing(spec));
    }
  } else if (name == "mpath") {
    const CombTrialConfig config = preset_mpath(0.0);
    files.emplace_back(
        "mpath_base.instance",
        format_instance_text({config.instance.base_instance(), config.v}));
    std::ostringstream actions;
    for (const auto& action : enumerate_actions(config.instance)) {
      for (std::size_t i = 0; i < action.size(); ++i)
        actions << (i ? " " : "") << action[i];
      actions << "\n";
    }
    files.emplace_back("mpath.actions", actions.str());
  } else if (name == "impossibility") {
    const ImpossibleConfigs pair = preset_impossibility(0.3, 0.25, 0.1, 1e6);
    files.emplace_back(
        "impossibility_p.instance",
        format_instance_text(
            {pair.p.instance, BiasBound::exact_gap(pair.p.instance)}));
    files.emplace_back(
        "impossibility_q.instance",
        format_instance_text(
            {pair.q.instance, BiasBound::exact_gap(pair.q.instance)}));
  } else {
    throw UsageError("unknown preset '" + name + "'");
  }
  return files;
}

}  // namespace odb
