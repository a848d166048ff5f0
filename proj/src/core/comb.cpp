#include "core/comb.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "core/csv.hpp"
#include "core/errors.hpp"

namespace odb {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

GraphFile parse_graph_text(const std::string& text) {
  GraphFile gf;
  std::istringstream in(text);
  std::string line;
  std::uint32_t max_node = 0;
  bool any = false;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    std::int64_t u, v;
    double p;
    if (!(row >> u)) continue;  // blank line
    if (!(row >> v >> p) || u < 0 || v < 0)
      throw IoError("graph file: expected 'u v p' per line, got '" + line +
                    "'");
    std::string extra;
    if (row >> extra) throw IoError("graph file: trailing tokens in '" + line + "'");
    if (p < 0.0 || p > 1.0)
      throw IoError("graph file: probability outside [0,1] in '" + line + "'");
    gf.graph.edges.push_back({static_cast<std::uint32_t>(u),
                              static_cast<std::uint32_t>(v)});
    gf.probs.push_back(p);
    max_node = std::max({max_node, static_cast<std::uint32_t>(u),
                         static_cast<std::uint32_t>(v)});
    any = true;
  }
  if (!any) throw IoError("graph file: no edges");
  gf.graph.num_nodes = max_node + 1;
  return gf;
}

GraphFile load_graph(const std::string& path) {
  return parse_graph_text(read_file(path));
}

std::vector<Action> parse_actions_text(const std::string& text,
                                       std::size_t k) {
  std::vector<Action> actions;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    Action action;
    std::int64_t arm;
    while (row >> arm) {
      if (arm < 0 || static_cast<std::size_t>(arm) >= k)
        throw IoError("actions file: base arm out of range in '" + line + "'");
      action.push_back(static_cast<std::uint32_t>(arm));
    }
    if (action.empty()) continue;
    std::sort(action.begin(), action.end());
    action.erase(std::unique(action.begin(), action.end()), action.end());
    actions.push_back(std::move(action));
  }
  if (actions.empty()) throw IoError("actions file: no actions");
  return actions;
}

std::vector<Action> load_actions(const std::string& path, std::size_t k) {
  return parse_actions_text(read_file(path), k);
}

Family parse_family_spec(const std::string& spec, std::size_t k) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos || colon + 1 == spec.size())
    throw UsageError("family spec must look like kind:arg, got '" + spec +
                     "'");
  const std::string kind = spec.substr(0, colon);
  const std::string arg = spec.substr(colon + 1);
  auto parse_m = [&](const std::string& tok) {
    try {
      std::size_t pos = 0;
      const long long m = std::stoll(tok, &pos);
      if (pos != tok.size()) throw std::invalid_argument(tok);
      return static_cast<std::int64_t>(m);
    } catch (const std::exception&) {
      throw UsageError("family spec: bad cardinality '" + tok + "'");
    }
  };
  if (kind == "topm") return TopMFamily{parse_m(arg)};
  if (kind == "mpath") return MPathFamily{parse_m(arg)};
  if (kind == "explicit") return ExplicitFamily{load_actions(arg, k)};
  if (kind == "influence") {
    std::string path = arg;
    std::int64_t budget = 1;
    const auto extra = arg.rfind(':');
    if (extra != std::string::npos) {
      path = arg.substr(0, extra);
      budget = parse_m(arg.substr(extra + 1));
    }
    GraphFile gf = load_graph(path);
    if (gf.graph.edges.size() != k)
      throw PreconditionError(
          "influence family: graph edge count must match the arm count");
    return InfluenceFamily{std::move(gf.graph), budget};
  }
  throw UsageError("unknown family kind '" + kind + "'");
}

std::int64_t CombInstance::max_cardinality() const {
  struct Visitor {
    const CombInstance* self;
    std::int64_t operator()(const TopMFamily& f) const { return f.m; }
    std::int64_t operator()(const MPathFamily& f) const { return f.m; }
    std::int64_t operator()(const ExplicitFamily& f) const {
      std::size_t m = 0;
      for (const auto& a : f.actions) m = std::max(m, a.size());
      return static_cast<std::int64_t>(m);
    }
    std::int64_t operator()(const InfluenceFamily& f) const {
      // An action is the out-edge set of a seed set, so the largest
      // action sums the seed_budget largest out-degrees.
      std::vector<std::int64_t> outdeg(f.graph.num_nodes, 0);
      for (const auto& e : f.graph.edges) outdeg[e.from] += 1;
      std::sort(outdeg.begin(), outdeg.end(), std::greater<>());
      std::int64_t m = 0;
      for (std::int64_t i = 0; i < f.seed_budget &&
                               i < static_cast<std::int64_t>(outdeg.size());
           ++i)
        m += outdeg[static_cast<std::size_t>(i)];
      return std::max<std::int64_t>(m, 1);
    }
  };
  return std::visit(Visitor{this}, family);
}

MabInstance CombInstance::base_instance() const {
  return MabInstance{base, offline_counts, horizon};
}

void CombInstance::validate() const {
  base_instance().validate();
  const auto k = static_cast<std::int64_t>(base.size());
  if (const auto* top = std::get_if<TopMFamily>(&family)) {
    if (top->m < 1 || top->m > k)
      throw PreconditionError("topm: m must lie in [1, K]");
  } else if (const auto* path = std::get_if<MPathFamily>(&family)) {
    if (path->m < 1 || k % path->m != 0)
      throw PreconditionError("mpath: K/m must be an integer");
  } else if (const auto* exp = std::get_if<ExplicitFamily>(&family)) {
    if (exp->actions.empty())
      throw PreconditionError("explicit family: empty action collection");
    for (const auto& action : exp->actions) {
      if (action.empty())
        throw PreconditionError("explicit family: empty action");
      for (std::size_t i = 0; i < action.size(); ++i) {
        if (action[i] >= base.size())
          throw PreconditionError("explicit family: arm out of range");
        if (i > 0 && action[i] <= action[i - 1])
          throw PreconditionError(
              "explicit family: actions must be sorted and duplicate-free");
      }
    }
  } else if (const auto* inf = std::get_if<InfluenceFamily>(&family)) {
    if (inf->graph.edges.size() != base.size())
      throw PreconditionError("influence: one base arm per edge required");
    if (inf->seed_budget < 1)
      throw PreconditionError("influence: seed budget must be >= 1");
    for (const auto& e : inf->graph.edges) {
      if (e.from >= inf->graph.num_nodes || e.to >= inf->graph.num_nodes)
        throw PreconditionError("influence: edge endpoint out of range");
    }
    for (const auto& arm : base) {
      if (arm.mu_on < 0.0 || arm.mu_on > 1.0)
        throw PreconditionError(
            "influence: edge activation means must lie in [0,1]");
    }
  }
}

double RewardModel::value(const CombInstance& instance,
                          const std::vector<double>& u,
                          const Action& action) const {
  if (kind == Kind::Linear) {
    double sum = 0.0;
    for (std::uint32_t a : action) sum += u[a];
    return sum;
  }
  return eval(instance, u, action);
}

RewardModel RewardModel::linear(std::int64_t m) {
  RewardModel model;
  model.kind = Kind::Linear;
  model.gamma = static_cast<double>(m);
  model.rho = 1.0;
  return model;
}

RewardModel RewardModel::influence_spread() {
  RewardModel model;
  model.kind = Kind::Smooth;
  model.rho = 1.0;
  model.eval = [](const CombInstance& instance, const std::vector<double>& u,
                  const Action& action) {
    const auto& fam = std::get<InfluenceFamily>(instance.family);
    // Clamp index values into probability range; +inf sentinels act as
    // certain activation.
    std::vector<double> clamped(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
      clamped[i] = std::min(1.0, std::max(0.0, u[i]));
    // Seeds are the source endpoints of the action's edges.
    std::vector<std::uint32_t> seeds;
    for (std::uint32_t arm : action) seeds.push_back(fam.graph.edges[arm].from);
    std::sort(seeds.begin(), seeds.end());
    seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
    return influence_expected_reward(fam.graph, clamped, seeds);
  };
  return model;
}

OracleSpec OracleSpec::for_family(const CombInstance& instance) {
  OracleSpec spec;
  if (std::holds_alternative<TopMFamily>(instance.family)) {
    spec.solver = OracleSolver::ExactTopM;
  } else if (std::holds_alternative<InfluenceFamily>(instance.family)) {
    spec.solver = OracleSolver::GreedyInfluence;
    spec.alpha = 1.0 - 1.0 / std::exp(1.0);
  } else {
    spec.solver = OracleSolver::ExactEnumerate;
  }
  return spec;
}

namespace {

void enumerate_subsets(std::size_t k, std::int64_t m, std::size_t cap,
                       std::vector<Action>& out) {
  Action current;
  current.reserve(static_cast<std::size_t>(m));
  // Iterative lexicographic enumeration of m-subsets of {0..k-1}.
  std::vector<std::uint32_t> idx(static_cast<std::size_t>(m));
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    out.emplace_back(idx.begin(), idx.end());
    if (out.size() > cap)
      throw PreconditionError("feasible collection exceeds enumeration cap");
    // advance
    std::int64_t i = m - 1;
    while (i >= 0 &&
           idx[static_cast<std::size_t>(i)] ==
               static_cast<std::uint32_t>(k - static_cast<std::size_t>(m) +
                                          static_cast<std::size_t>(i)))
      --i;
    if (i < 0) break;
    ++idx[static_cast<std::size_t>(i)];
    for (std::int64_t j = i + 1; j < m; ++j)
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

}  // namespace

std::vector<Action> enumerate_actions(const CombInstance& instance,
                                      std::size_t cap) {
  std::vector<Action> out;
  if (const auto* top = std::get_if<TopMFamily>(&instance.family)) {
    enumerate_subsets(instance.num_base(), top->m, cap, out);
  } else if (const auto* path = std::get_if<MPathFamily>(&instance.family)) {
    const auto m = static_cast<std::uint32_t>(path->m);
    const auto paths = static_cast<std::uint32_t>(instance.num_base() / m);
    for (std::uint32_t j = 0; j < paths; ++j) {
      Action action(m);
      for (std::uint32_t l = 0; l < m; ++l) action[l] = j * m + l;
      out.push_back(std::move(action));
    }
  } else if (const auto* exp = std::get_if<ExplicitFamily>(&instance.family)) {
    if (exp->actions.size() > cap)
      throw PreconditionError("feasible collection exceeds enumeration cap");
    out = exp->actions;
  } else {
    throw PreconditionError("influence families are not enumerable");
  }
  return out;
}

namespace {

struct ActionRank {
  std::int64_t inf_count = 0;
  double score = 0.0;  // finite-part sum, or model value when all-finite
};

ActionRank rank_action(const RewardModel& model, const CombInstance& instance,
                       const std::vector<double>& u, const Action& action,
                       bool sentinel_mode) {
  ActionRank r;
  if (sentinel_mode) {
    for (std::uint32_t a : action) {
      if (std::isinf(u[a]))
        r.inf_count += 1;
      else
        r.score += u[a];
    }
  } else {
    r.score = model.value(instance, u, action);
  }
  return r;
}

bool lex_less(const Action& a, const Action& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

Action solve_top_m(std::int64_t m, const std::vector<double>& u) {
  std::vector<std::uint32_t> order(u.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::uint32_t i, std::uint32_t j) {
    if (u[i] != u[j]) return u[i] > u[j];
    return i < j;
  });
  Action action(order.begin(), order.begin() + m);
  std::sort(action.begin(), action.end());
  return action;
}

}  // namespace

Action oracle_solve(const OracleSpec& spec, const RewardModel& model,
                    const CombInstance& instance,
                    const std::vector<double>& u) {
  if (u.size() != instance.num_base())
    throw PreconditionError("oracle: value vector length mismatch");
  switch (spec.solver) {
    case OracleSolver::ExactTopM: {
      const auto* top = std::get_if<TopMFamily>(&instance.family);
      if (!top) throw PreconditionError("ExactTopM needs a topm family");
      return solve_top_m(top->m, u);
    }
    case OracleSolver::ExactEnumerate: {
      const auto actions = enumerate_actions(instance);
      const bool sentinel_mode =
          std::any_of(u.begin(), u.end(), [](double x) { return std::isinf(x); });
      const Action* best = nullptr;
      ActionRank best_rank;
      for (const auto& action : actions) {
        const ActionRank r =
            rank_action(model, instance, u, action, sentinel_mode);
        bool better = false;
        if (!best) {
          better = true;
        } else if (r.inf_count != best_rank.inf_count) {
          better = r.inf_count > best_rank.inf_count;
        } else if (r.score != best_rank.score) {
          better = r.score > best_rank.score;
        } else {
          better = lex_less(action, *best);
        }
        if (better) {
          best = &action;
          best_rank = r;
        }
      }
      return *best;
    }
    case OracleSolver::GreedyInfluence: {
      const auto* fam = std::get_if<InfluenceFamily>(&instance.family);
      if (!fam)
        throw PreconditionError("GreedyInfluence needs an influence family");
      const Graph& graph = fam->graph;
      std::vector<std::uint32_t> seeds;
      const bool sentinel_mode =
          std::any_of(u.begin(), u.end(), [](double x) { return std::isinf(x); });
      if (sentinel_mode) {
        // Unobserved arms first: pick the seeds covering the most
        // unobserved out-edges so initialization always makes progress.
        std::vector<std::int64_t> unseen(graph.num_nodes, 0);
        for (std::size_t i = 0; i < graph.edges.size(); ++i)
          if (std::isinf(u[i])) unseen[graph.edges[i].from] += 1;
        std::vector<std::uint32_t> order(graph.num_nodes);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::uint32_t a, std::uint32_t b) {
                    if (unseen[a] != unseen[b]) return unseen[a] > unseen[b];
                    return a < b;
                  });
        const auto budget = std::min<std::size_t>(
            static_cast<std::size_t>(fam->seed_budget), graph.num_nodes);
        seeds.assign(order.begin(), order.begin() + budget);
      } else {
        std::vector<double> clamped(u.size());
        for (std::size_t i = 0; i < u.size(); ++i)
          clamped[i] = std::min(1.0, std::max(0.0, u[i]));
        seeds = greedy_influence_seeds(graph, clamped, fam->seed_budget);
      }
      std::sort(seeds.begin(), seeds.end());
      Action action;
      for (std::size_t i = 0; i < graph.edges.size(); ++i)
        if (std::binary_search(seeds.begin(), seeds.end(),
                               graph.edges[i].from))
          action.push_back(static_cast<std::uint32_t>(i));
      return action;
    }
  }
  throw ContractError("unreachable oracle solver");
}

double influence_expected_reward(const Graph& graph,
                                 const std::vector<double>& probs,
                                 const std::vector<std::uint32_t>& seeds) {
  if (probs.size() != graph.edges.size())
    throw PreconditionError("influence: one probability per edge required");
  for (double p : probs)
    if (!(p >= 0.0 && p <= 1.0))
      throw PreconditionError("influence: probabilities must lie in [0,1]");
  std::vector<bool> is_seed(graph.num_nodes, false);
  for (std::uint32_t s : seeds) {
    if (s >= graph.num_nodes)
      throw PreconditionError("influence: seed out of range");
    is_seed[s] = true;
  }
  std::vector<double> survive(graph.num_nodes, 1.0);
  for (std::size_t i = 0; i < graph.edges.size(); ++i) {
    const auto& e = graph.edges[i];
    if (is_seed[e.from] && !is_seed[e.to]) survive[e.to] *= 1.0 - probs[i];
  }
  double reward = 0.0;
  for (std::uint32_t v = 0; v < graph.num_nodes; ++v)
    reward += is_seed[v] ? 1.0 : 1.0 - survive[v];
  return reward;
}

std::vector<std::uint32_t> greedy_influence_seeds(
    const Graph& graph, const std::vector<double>& probs,
    std::int64_t budget) {
  std::vector<std::uint32_t> seeds;
  std::vector<bool> chosen(graph.num_nodes, false);
  const auto want =
      std::min<std::size_t>(static_cast<std::size_t>(budget), graph.num_nodes);
  double current = 0.0;
  for (std::size_t round = 0; round < want; ++round) {
    double best_gain = -kInf;
    std::uint32_t best_node = 0;
    for (std::uint32_t v = 0; v < graph.num_nodes; ++v) {
      if (chosen[v]) continue;
      std::vector<std::uint32_t> trial = seeds;
      trial.push_back(v);
      const double gain =
          influence_expected_reward(graph, probs, trial) - current;
      if (gain > best_gain) {
        best_gain = gain;
        best_node = v;
      }
    }
    chosen[best_node] = true;
    seeds.push_back(best_node);
    current += best_gain;
  }
  std::sort(seeds.begin(), seeds.end());
  return seeds;
}

bool CombPolicyState::initializing() const {
  for (std::size_t a = 0; a < k; ++a)
    if (reachable[a] && n[a] == 0) return true;
  return false;
}

CombPolicyState init_comb_policy(const OfflineDataset& dataset,
                                 const BiasBound& v,
                                 const CombInstance& instance,
                                 DeltaSchedule schedule) {
  instance.validate();
  const std::size_t k = instance.num_base();
  if (v.v.size() != k)
    throw PreconditionError("bias bound length does not match arm count");
  if (dataset.samples.size() != k)
    throw PreconditionError("dataset shape does not match arm count");
  for (std::size_t a = 0; a < k; ++a) {
    if (dataset.samples[a].size() !=
        static_cast<std::size_t>(instance.offline_counts[a]))
      throw PreconditionError("dataset sample counts do not match t_s");
  }
  CombPolicyState state;
  state.k = k;
  state.t = 1;
  state.schedule = schedule;
  state.v = v;
  state.offline_means = dataset.mean_cache;
  state.t_s = instance.offline_counts;
  state.n.assign(k, 0);
  state.r_hat.assign(k, kInf);
  state.reachable.assign(k, false);
  if (std::holds_alternative<TopMFamily>(instance.family) ||
      std::holds_alternative<MPathFamily>(instance.family)) {
    state.reachable.assign(k, true);
  } else if (const auto* exp =
                 std::get_if<ExplicitFamily>(&instance.family)) {
    for (const auto& action : exp->actions)
      for (std::uint32_t a : action) state.reachable[a] = true;
  } else {
    // Influence: every edge is reachable through a seed set containing
    // its source node.
    state.reachable.assign(k, true);
  }
  return state;
}

Action comb_select_action(const CombPolicyState& state,
                          const CombInstance& instance,
                          const RewardModel& model, const OracleSpec& spec) {
  if (state.initializing())
    return oracle_solve(spec, model, instance, state.r_hat);
  const auto k = static_cast<std::int64_t>(state.k);
  const double dt = state.schedule.at(state.t, k);
  std::vector<double> u(state.k);
  for (std::size_t a = 0; a < state.k; ++a) {
    const WarmIndex idx =
        warm_index(state.t, dt, state.n[a], state.r_hat[a], state.t_s[a],
                   state.offline_means[a], state.v.v[a]);
    u[a] = std::min(idx.ucb, idx.ucb_s);
  }
  return oracle_solve(spec, model, instance, u);
}

void comb_update(CombPolicyState& state, const Action& action,
                 const std::vector<double>& rewards) {
  if (rewards.size() != action.size())
    throw ContractError("comb_update: one reward per action member");
  const bool was_initializing = state.initializing();
  for (std::size_t i = 0; i < action.size(); ++i) {
    const std::uint32_t a = action[i];
    if (a >= state.k) throw ContractError("comb_update: bad arm index");
    if (state.n[a] == 0) {
      state.r_hat[a] = rewards[i];
    } else {
      const auto n_old = static_cast<double>(state.n[a]);
      state.r_hat[a] = (n_old * state.r_hat[a] + rewards[i]) / (n_old + 1.0);
    }
    state.n[a] += 1;
  }
  state.t += 1;
  if (was_initializing && !state.initializing()) state.t0 = state.t;
}

double optimal_value(const CombInstance& instance, const RewardModel& model,
                     const OracleSpec& spec, bool* approximate) {
  std::vector<double> mu(instance.num_base());
  for (std::size_t a = 0; a < instance.num_base(); ++a)
    mu[a] = instance.base[a].mu_on;
  if (std::holds_alternative<InfluenceFamily>(instance.family)) {
    if (approximate) *approximate = true;
    const Action best = oracle_solve(spec, model, instance, mu);
    return model.value(instance, mu, best);
  }
  if (approximate) *approximate = false;
  double best = -kInf;
  for (const auto& action : enumerate_actions(instance))
    best = std::max(best, model.value(instance, mu, action));
  return best;
}

CombRegret comb_regret(const std::vector<Action>& trajectory,
                       const CombInstance& instance, const RewardModel& model,
                       const OracleSpec& spec) {
  CombRegret out;
  const double r_star =
      optimal_value(instance, model, spec, &out.approximate);
  std::vector<double> mu(instance.num_base());
  for (std::size_t a = 0; a < instance.num_base(); ++a)
    mu[a] = instance.base[a].mu_on;
  const double scaled = spec.alpha * spec.beta * r_star;
  for (const auto& action : trajectory)
    out.value += scaled - model.value(instance, mu, action);
  return out;
}

}  // namespace odb
