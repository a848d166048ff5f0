#pragma once

#include <string>
#include <variant>
#include <vector>

#include "core/bounds.hpp"
#include "core/comb.hpp"

namespace odb {

// How a trial draws rewards. Gaussian environments draw mu + N(0,1);
// price environments draw price * Bernoulli(p) (bounded rewards; the
// 1-sub-Gaussian radii are used unchanged, which is conservative for
// prices up to 2).
struct EnvSpec {
  enum class Kind { Gaussian, PriceBernoulli };
  Kind kind = Kind::Gaussian;
  std::vector<double> price;
  std::vector<double> p_on;
  std::vector<double> p_off;
};

struct MabTrialConfig {
  MabInstance instance;
  BiasBound v;
  DeltaSchedule schedule;
  EnvSpec env;
  // Offline data are redrawn per trial by default; fixed_dataset pins
  // them to dataset_seed for variance studies.
  bool fixed_dataset = false;
  std::uint64_t dataset_seed = 0;
};

struct TrialResult {
  std::vector<double> cum_regret;     // filled when requested
  std::vector<std::uint32_t> actions;  // filled when requested
  std::vector<std::int64_t> pulls;    // online pulls only
  double final_regret = 0.0;
};

struct TrialRecord {
  bool trajectory = false;
  bool actions = false;
};

// Runs one seeded trial: offline dataset from the seed's offline
// streams, policy initialization, then T rounds of select/observe/
// update with pseudo-regret accounting against the true means.
TrialResult run_trial(const MabTrialConfig& config, PolicyKind kind,
                      std::uint64_t root_seed, TrialRecord record = {});

struct CombTrialConfig {
  CombInstance instance;
  BiasBound v;
  DeltaSchedule schedule;
};

struct CombTrialResult {
  std::vector<double> cum_regret;
  std::vector<Action> actions;  // filled when requested
  std::vector<std::int64_t> observe_counts;
  double final_regret = 0.0;
  bool approximate = false;  // optimum from an approximation oracle
};

CombTrialResult run_comb_trial(const CombTrialConfig& config,
                               std::uint64_t root_seed,
                               TrialRecord record = {});

// One experiment cell: a named configuration run for `trials` seeds.
struct SimJob {
  std::string experiment;
  std::string policy;
  double param = 0.0;
  struct MabWork {
    MabTrialConfig config;
    PolicyKind kind;
  };
  struct CombWork {
    CombTrialConfig config;
  };
  std::variant<MabWork, CombWork> work;
};

struct SummaryRow {
  std::string experiment;
  std::string policy;
  double param = 0.0;
  double mean = 0.0;
  double stddev = 0.0;  // unbiased; 0 when trials == 1
  std::int64_t trials = 0;
};

struct ExperimentData {
  std::vector<SummaryRow> summary;                       // one row per job
  std::vector<std::vector<double>> finals;               // [job][trial]
  std::vector<std::vector<std::vector<double>>> trajectories;  // optional
};

// Trial i of every job runs under root seed mix_seed(seed, kPurposeTrial,
// i): shared seeds across jobs give paired comparisons, and the result
// is independent of the worker count by construction.
ExperimentData run_experiment(const std::vector<SimJob>& jobs,
                              std::int64_t trials, std::uint64_t seed,
                              int workers, bool want_trajectories);

std::string raw_csv(const std::vector<SimJob>& jobs,
                    const ExperimentData& data);
std::string summary_csv(const ExperimentData& data);
std::string trajectory_csv(const std::vector<SimJob>& jobs,
                           const ExperimentData& data);

// ---- experiment presets ------------------------------------------------

// Bias sweep, optimistic direction: K=10, T=1e4, T_S=1000; the optimal
// arm's offline mean sits v below its online mean while every
// sub-optimal arm's sits v above; V is the exact per-arm gap.
MabTrialConfig preset_optimistic(double v);

// Bias sweep, pessimistic direction: every offline mean sits v below
// its online mean, so the discrepancy vanishes on all arms.
MabTrialConfig preset_pessimistic(double v);

// Horizon sweep: optimistic shape with T_S=1e4 at v in {0.4, 0.5, 0.6}
// and T drawn from {50, 500, 1500, 3000, 5000, 7000}.
MabTrialConfig preset_t_sweep(double v, std::int64_t horizon);

struct PricingSpec {
  std::vector<double> prices{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  double utility_lo = 0.0;  // customer utility ~ Uniform[lo, hi]
  double utility_hi = 1.0;
  double shift = 0.0;  // offline market utility is U + shift
  std::int64_t horizon = 5000;
  std::int64_t t_s = 1000;
};
MabTrialConfig preset_pricing(const PricingSpec& spec);

struct ImpossibleConfigs {
  MabTrialConfig p;
  MabTrialConfig q;
  double threshold = 0.0;
};
// Paired two-arm configurations from the adversarial construction; the
// two share offline seed streams and differ only in online means.
ImpossibleConfigs preset_impossibility(double beta, double eps, double c,
                                       double horizon);

// Disjoint-paths instance (K=10 arms, paths of m=2) with aligned
// offline data; bias_bound is the constant per-arm V (0 enables the
// warm start, +inf disables it).
CombTrialConfig preset_mpath(double bias_bound);

// Known names: fig1a | fig1b | fig2 | pricing | mpath | impossibility.
std::vector<SimJob> preset_jobs(const std::string& name);

// Files materialized by the `preset` subcommand: (filename, content).
std::vector<std::pair<std::string, std::string>> preset_files(
    const std::string& name);

}  // namespace odb
