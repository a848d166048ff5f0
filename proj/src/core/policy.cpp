#include "core/policy.hpp"

#include <cmath>
#include <limits>

#include "core/errors.hpp"

namespace odb {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

const char* policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::MinUcb:
      return "min-ucb";
    case PolicyKind::PureUcb:
      return "pure-ucb";
    case PolicyKind::UcbSOnly:
      return "ucbs";
    case PolicyKind::MonUcbPooled:
      return "monucb";
  }
  return "?";
}

std::optional<PolicyKind> parse_policy(std::string_view name) {
  if (name == "min-ucb") return PolicyKind::MinUcb;
  if (name == "pure-ucb") return PolicyKind::PureUcb;
  if (name == "ucbs") return PolicyKind::UcbSOnly;
  if (name == "monucb") return PolicyKind::MonUcbPooled;
  return std::nullopt;
}

double DeltaSchedule::at(std::int64_t t, std::int64_t k) const {
  if (t < 1) throw PreconditionError("delta schedule requires t >= 1");
  const double base =
      2.0 * static_cast<double>(k) * static_cast<double>(t) *
      static_cast<double>(t);
  if (tag == ScheduleTag::InstanceDependent) return 1.0 / base;
  if (!global_delta)
    throw PreconditionError(
        "instance-independent schedule needs a global delta");
  if (!(*global_delta > 0.0 && *global_delta < 1.0))
    throw PreconditionError("global delta must lie in (0,1)");
  return *global_delta / base;
}

Radii compute_radii(std::int64_t t, double dt, std::int64_t n_a,
                    std::int64_t t_s_a, double v_a) {
  if (n_a < 1) throw ContractError("compute_radii needs n >= 1");
  if (!(dt > 0.0 && dt < 1.0))
    throw ContractError("compute_radii needs dt in (0,1)");
  const double log_term = 2.0 * std::log(2.0 * static_cast<double>(t) / dt);
  const double pooled = static_cast<double>(n_a + t_s_a);
  const double weight = static_cast<double>(t_s_a) / pooled;
  Radii r;
  r.rad = std::sqrt(log_term / static_cast<double>(n_a));
  r.rad_s = std::sqrt(log_term / pooled) + weight_times(weight, v_a);
  return r;
}

WarmIndex warm_index(std::int64_t t, double dt, std::int64_t n, double r_hat,
                     std::int64_t t_s, const std::optional<double>& xhat,
                     double v_a) {
  const Radii radii = compute_radii(t, dt, n, t_s, v_a);
  WarmIndex idx;
  idx.rad = radii.rad;
  idx.rad_s = radii.rad_s;
  idx.ucb = r_hat + radii.rad;
  double pooled_mean = r_hat;
  if (t_s > 0) {
    if (!xhat) throw ContractError("offline mean missing for arm with t_s>0");
    pooled_mean = (static_cast<double>(n) * r_hat +
                   static_cast<double>(t_s) * *xhat) /
                  static_cast<double>(n + t_s);
  }
  idx.ucb_s = pooled_mean + radii.rad_s;
  return idx;
}

PolicyState init_policy(PolicyKind kind, const OfflineDataset& dataset,
                        const BiasBound& v, const MabInstance& instance,
                        DeltaSchedule schedule) {
  instance.validate();
  const std::size_t k = instance.num_arms();
  if (v.v.size() != k)
    throw PreconditionError("bias bound length does not match arm count");
  if (dataset.samples.size() != k || dataset.mean_cache.size() != k)
    throw PreconditionError("dataset shape does not match arm count");
  for (std::size_t a = 0; a < k; ++a) {
    const auto count = static_cast<std::size_t>(instance.offline_counts[a]);
    if (dataset.samples[a].size() != count)
      throw PreconditionError("dataset sample counts do not match t_s");
    if ((count > 0) != dataset.mean_cache[a].has_value())
      throw PreconditionError("dataset mean cache inconsistent with t_s");
  }

  PolicyState state;
  state.kind = kind;
  state.k = k;
  state.t = 1;
  state.schedule = schedule;
  state.v = v;
  state.offline_means = dataset.mean_cache;
  state.t_s = instance.offline_counts;
  state.n.assign(k, 0);
  state.r_hat.assign(k, 0.0);
  if (kind == PolicyKind::MonUcbPooled) {
    for (std::size_t a = 0; a < k; ++a) {
      if (instance.offline_counts[a] > 0) {
        state.n[a] = instance.offline_counts[a];
        state.r_hat[a] = *dataset.mean_cache[a];
      }
    }
  }
  return state;
}

IndexPair compute_indices(const PolicyState& state, std::int64_t t) {
  const double dt = state.schedule.at(t, static_cast<std::int64_t>(state.k));
  IndexPair out;
  out.ucb.resize(state.k);
  out.ucb_s.resize(state.k);
  out.rad.resize(state.k);
  out.rad_s.resize(state.k);
  for (std::size_t a = 0; a < state.k; ++a) {
    if (state.n[a] < 1)
      throw ContractError("compute_indices before initialization finished");
    switch (state.kind) {
      case PolicyKind::MinUcb:
      case PolicyKind::PureUcb:
      case PolicyKind::UcbSOnly: {
        const WarmIndex idx =
            warm_index(t, dt, state.n[a], state.r_hat[a], state.t_s[a],
                       state.offline_means[a], state.v.v[a]);
        out.ucb[a] = idx.ucb;
        out.ucb_s[a] = idx.ucb_s;
        out.rad[a] = idx.rad;
        out.rad_s[a] = idx.rad_s;
        if (state.kind == PolicyKind::PureUcb) out.ucb_s[a] = kInf;
        if (state.kind == PolicyKind::UcbSOnly) out.ucb[a] = kInf;
        break;
      }
      case PolicyKind::MonUcbPooled: {
        // Vanilla index over the pooled state; n already includes T_S.
        const Radii radii = compute_radii(t, dt, state.n[a], 0, 0.0);
        out.rad[a] = radii.rad;
        out.rad_s[a] = radii.rad_s;
        out.ucb[a] = state.r_hat[a] + radii.rad;
        out.ucb_s[a] = kInf;
        break;
      }
    }
  }
  return out;
}

std::size_t select_arm(const PolicyState& state, const IndexPair& indices) {
  if (state.t <= static_cast<std::int64_t>(state.k))
    return static_cast<std::size_t>(state.t - 1);
  std::size_t best = 0;
  double best_value = -kInf;
  for (std::size_t a = 0; a < state.k; ++a) {
    const double value = std::min(indices.ucb[a], indices.ucb_s[a]);
    if (value > best_value) {
      best_value = value;
      best = a;
    }
  }
  return best;
}

void policy_update(PolicyState& state, std::size_t arm, double reward) {
  if (arm >= state.k) throw ContractError("policy_update: bad arm index");
  const auto n_old = static_cast<double>(state.n[arm]);
  state.r_hat[arm] = (n_old * state.r_hat[arm] + reward) / (n_old + 1.0);
  state.n[arm] += 1;
  state.t += 1;
}

bool xi_holds(const MabInstance& instance, const PolicyState& state,
              std::int64_t t, double dt) {
  for (std::size_t a = 0; a < state.k; ++a) {
    const double mu_on = instance.arms[a].mu_on;
    const double mu_off = instance.arms[a].mu_off;
    const WarmIndex idx =
        warm_index(t, dt, state.n[a], state.r_hat[a], state.t_s[a],
                   state.offline_means[a], state.v.v[a]);
    if (!(mu_on <= idx.ucb && idx.ucb <= mu_on + 2.0 * idx.rad)) return false;
    const double pooled = static_cast<double>(state.n[a] + state.t_s[a]);
    const double log_term =
        std::sqrt(2.0 * std::log(2.0 * static_cast<double>(t) / dt) / pooled);
    const double bias_shift =
        weight_times(static_cast<double>(state.t_s[a]) / pooled,
                     mu_off - mu_on);
    const double upper = mu_on + idx.rad_s + log_term + bias_shift;
    if (!(mu_on <= idx.ucb_s && idx.ucb_s <= upper)) return false;
  }
  return true;
}

}  // namespace odb
