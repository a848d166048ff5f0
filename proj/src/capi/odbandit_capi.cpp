#include "odbandit.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <sstream>
#include <thread>

#include "core/bounds.hpp"
#include "core/csv.hpp"
#include "core/errors.hpp"
#include "core/sim.hpp"
#include "core/svg.hpp"

struct odb_instance {
  odb::InstanceFile file;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& message) { g_last_error = message; }

template <typename Fn>
odb_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const odb::UsageError& e) {
    set_error(e.what());
    return ODB_ERR_USAGE;
  } catch (const odb::PreconditionError& e) {
    set_error(e.what());
    return ODB_ERR_PRECONDITION;
  } catch (const odb::IoError& e) {
    set_error(e.what());
    return ODB_ERR_IO;
  } catch (const std::exception& e) {
    set_error(e.what());
    return ODB_ERR_INTERNAL;
  }
}

char* dup_text(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

void require(bool ok, const char* message) {
  if (!ok) throw odb::UsageError(message);
}

odb::CombInstance make_comb_instance(const odb::InstanceFile& file,
                                     const std::string& family_spec) {
  odb::CombInstance comb;
  comb.base = file.instance.arms;
  comb.offline_counts = file.instance.offline_counts;
  comb.horizon = file.instance.horizon;
  comb.family =
      odb::parse_family_spec(family_spec, file.instance.num_arms());
  comb.validate();
  return comb;
}

int resolve_workers(int32_t workers) {
  if (workers > 0) return workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void write_outputs(const std::vector<odb::SimJob>& jobs,
                   const odb::ExperimentData& data,
                   const odb_sim_options& options,
                   const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec && !fs::is_directory(out_dir))
    throw odb::IoError("cannot create output directory '" + out_dir + "'");
  const std::string base = (fs::path(out_dir) / "").string();
  odb::atomic_write(base + "raw.csv", odb::raw_csv(jobs, data));
  const std::string summary = odb::summary_csv(data);
  odb::atomic_write(base + "summary.csv", summary);
  if (options.trajectories)
    odb::atomic_write(base + "trajectories.csv",
                      odb::trajectory_csv(jobs, data));
  if (options.plot) {
    const auto plots = odb::render_plots(odb::parse_summary_csv(summary));
    for (const auto& [experiment, svg] : plots) {
      const std::string name =
          plots.size() == 1 ? "plot.svg" : "plot_" + experiment + ".svg";
      odb::atomic_write(base + name, svg);
    }
  }
}

odb_status simulate(const std::vector<odb::SimJob>& jobs,
                    const odb_sim_options* options, const char* out_dir) {
  require(options != nullptr, "options must not be NULL");
  require(out_dir != nullptr, "out_dir must not be NULL");
  if (options->trials < 1)
    throw odb::PreconditionError("trials must be >= 1");
  odb::ExperimentData data = odb::run_experiment(
      jobs, options->trials, options->seed, resolve_workers(options->workers),
      options->trajectories != 0);
  write_outputs(jobs, data, *options, out_dir);
  return ODB_OK;
}

void apply_schedule(std::vector<odb::SimJob>& jobs, double global_delta) {
  if (global_delta <= 0.0) return;
  const odb::DeltaSchedule schedule =
      odb::DeltaSchedule::independent(global_delta);
  for (auto& job : jobs) {
    if (auto* mab = std::get_if<odb::SimJob::MabWork>(&job.work))
      mab->config.schedule = schedule;
    else
      std::get<odb::SimJob::CombWork>(job.work).config.schedule = schedule;
  }
}

void apply_fixed_dataset(std::vector<odb::SimJob>& jobs,
                         const odb_sim_options& options) {
  if (!options.fixed_dataset) return;
  for (auto& job : jobs) {
    if (auto* mab = std::get_if<odb::SimJob::MabWork>(&job.work)) {
      mab->config.fixed_dataset = true;
      mab->config.dataset_seed = options.seed;
    }
  }
}

}  // namespace

extern "C" {

const char* odb_version(void) { return "0.1.0"; }

const char* odb_last_error(void) { return g_last_error.c_str(); }

void odb_text_free(char* text) { std::free(text); }

odb_status odb_instance_create(int64_t k, const double* mu_on,
                               const double* mu_off, const int64_t* t_s,
                               const double* v, int64_t horizon,
                               odb_instance** out) {
  return guarded([&]() {
    require(out && mu_on && mu_off && t_s && v, "NULL argument");
    if (k < 1) throw odb::PreconditionError("k must be >= 1");
    odb::InstanceFile file;
    file.instance.arms.resize(static_cast<std::size_t>(k));
    for (std::size_t a = 0; a < static_cast<std::size_t>(k); ++a)
      file.instance.arms[a] = {mu_on[a], mu_off[a]};
    file.instance.offline_counts.assign(t_s, t_s + k);
    file.instance.horizon = horizon;
    file.v.v.assign(v, v + k);
    file.instance.validate();
    for (double bound : file.v.v)
      if (!(bound >= 0.0))
        throw odb::PreconditionError("bias bound entries must be >= 0");
    *out = new odb_instance{std::move(file)};
    return ODB_OK;
  });
}

odb_status odb_instance_load(const char* path, odb_instance** out) {
  return guarded([&]() {
    require(path && out, "NULL argument");
    *out = new odb_instance{odb::load_instance(path)};
    return ODB_OK;
  });
}

odb_status odb_instance_save(const odb_instance* instance, const char* path) {
  return guarded([&]() {
    require(instance && path, "NULL argument");
    odb::save_instance(instance->file, path);
    return ODB_OK;
  });
}

void odb_instance_free(odb_instance* instance) { delete instance; }

int64_t odb_instance_arms(const odb_instance* instance) {
  return instance ? static_cast<int64_t>(instance->file.instance.num_arms())
                  : 0;
}

int64_t odb_instance_horizon(const odb_instance* instance) {
  return instance ? instance->file.instance.horizon : 0;
}

odb_status odb_instance_arm(const odb_instance* instance, int64_t arm,
                            double* mu_on, double* mu_off, int64_t* t_s,
                            double* v) {
  return guarded([&]() {
    require(instance != nullptr, "NULL instance");
    if (arm < 0 ||
        arm >= static_cast<int64_t>(instance->file.instance.num_arms()))
      throw odb::PreconditionError("arm index out of range");
    const auto a = static_cast<std::size_t>(arm);
    if (mu_on) *mu_on = instance->file.instance.arms[a].mu_on;
    if (mu_off) *mu_off = instance->file.instance.arms[a].mu_off;
    if (t_s) *t_s = instance->file.instance.offline_counts[a];
    if (v) *v = instance->file.v.v[a];
    return ODB_OK;
  });
}

odb_status odb_bounds_report(const odb_instance* instance, double epsilon,
                             double consistency_c, double consistency_p,
                             double delta, const char* family_spec,
                             char** out_text) {
  return guarded([&]() {
    require(instance && out_text, "NULL argument");
    odb::BoundQuery query{epsilon, consistency_c, consistency_p, delta};
    std::string text = odb::format_bound_report(odb::evaluate_bounds(
        instance->file.instance, instance->file.v, query));
    if (family_spec && *family_spec) {
      const odb::CombInstance comb =
          make_comb_instance(instance->file, family_spec);
      text += odb::format_comb_bound_report(
          odb::evaluate_comb_bounds(comb, instance->file.v, query));
    }
    *out_text = dup_text(text);
    return ODB_OK;
  });
}

odb_status odb_tau(const int64_t* t_s, int64_t k, double mass,
                   double* tau_star, double* n_star) {
  return guarded([&]() {
    require(t_s != nullptr, "NULL t_s");
    if (k < 1) throw odb::PreconditionError("k must be >= 1");
    const std::vector<std::int64_t> counts(t_s, t_s + k);
    const odb::Waterfill wf = odb::tau_star_waterfill(counts, mass);
    if (tau_star) *tau_star = wf.tau_star;
    if (n_star)
      std::memcpy(n_star, wf.n_star.data(),
                  sizeof(double) * static_cast<std::size_t>(k));
    return ODB_OK;
  });
}

odb_status odb_tau_report(const int64_t* t_s, int64_t k, double mass,
                          char** out_text) {
  return guarded([&]() {
    require(t_s && out_text, "NULL argument");
    if (k < 1) throw odb::PreconditionError("k must be >= 1");
    const std::vector<std::int64_t> counts(t_s, t_s + k);
    const odb::Waterfill wf = odb::tau_star_waterfill(counts, mass);
    std::ostringstream out;
    out << "tau_star=" << odb::fmt_g9(wf.tau_star) << "\n";
    out << "arm,t_s,n_star\n";
    for (std::size_t a = 0; a < counts.size(); ++a)
      out << a << ',' << counts[a] << ',' << odb::fmt_g9(wf.n_star[a])
          << "\n";
    *out_text = dup_text(out.str());
    return ODB_OK;
  });
}

odb_status odb_pair(double beta, double eps, double c, double horizon,
                    double* p_mu_on, double* q_mu_on, double* mu_off,
                    int64_t* t_s, double* threshold) {
  return guarded([&]() {
    const odb::ImpossiblePair pair =
        odb::impossibility_pair(beta, eps, c, horizon);
    for (int a = 0; a < 2; ++a) {
      if (p_mu_on) p_mu_on[a] = pair.p.arms[static_cast<std::size_t>(a)].mu_on;
      if (q_mu_on) q_mu_on[a] = pair.q.arms[static_cast<std::size_t>(a)].mu_on;
      if (mu_off) mu_off[a] = pair.p.arms[static_cast<std::size_t>(a)].mu_off;
      if (t_s) t_s[a] = pair.p.offline_counts[static_cast<std::size_t>(a)];
    }
    if (threshold) *threshold = pair.threshold;
    return ODB_OK;
  });
}

odb_status odb_pair_report(double beta, double eps, double c, double horizon,
                           char** out_text) {
  return guarded([&]() {
    require(out_text != nullptr, "NULL out_text");
    const odb::ImpossiblePair pair =
        odb::impossibility_pair(beta, eps, c, horizon);
    std::ostringstream out;
    out << "threshold=" << odb::fmt_g9(pair.threshold) << "\n";
    out << "admissible=true\n";
    out << "t_s=" << pair.p.offline_counts[0] << "\n";
    out << "p_mu_on=" << odb::fmt_g9(pair.p.arms[0].mu_on) << ' '
        << odb::fmt_g9(pair.p.arms[1].mu_on) << "\n";
    out << "p_mu_off=" << odb::fmt_g9(pair.p.arms[0].mu_off) << ' '
        << odb::fmt_g9(pair.p.arms[1].mu_off) << "\n";
    out << "q_mu_on=" << odb::fmt_g9(pair.q.arms[0].mu_on) << ' '
        << odb::fmt_g9(pair.q.arms[1].mu_on) << "\n";
    out << "q_mu_off=" << odb::fmt_g9(pair.q.arms[0].mu_off) << ' '
        << odb::fmt_g9(pair.q.arms[1].mu_off) << "\n";
    out << "p_gap=" << odb::fmt_g9(pair.p.arms[0].mu_on -
                                   pair.p.arms[1].mu_on)
        << "\n";
    out << "q_optimal_arm=2\n";
    *out_text = dup_text(out.str());
    return ODB_OK;
  });
}

odb_status odb_pair_write(double beta, double eps, double c, double horizon,
                          const char* out_dir) {
  return guarded([&]() {
    require(out_dir != nullptr, "NULL out_dir");
    const odb::ImpossiblePair pair =
        odb::impossibility_pair(beta, eps, c, horizon);
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec && !fs::is_directory(out_dir))
      throw odb::IoError("cannot create output directory '" +
                         std::string(out_dir) + "'");
    odb::save_instance({pair.p, odb::BiasBound::exact_gap(pair.p)},
                       (fs::path(out_dir) / "impossibility_p.instance")
                           .string());
    odb::save_instance({pair.q, odb::BiasBound::exact_gap(pair.q)},
                       (fs::path(out_dir) / "impossibility_q.instance")
                           .string());
    return ODB_OK;
  });
}

void odb_sim_options_init(odb_sim_options* options) {
  if (!options) return;
  options->trials = 50;
  options->seed = 1;
  options->workers = 0;
  options->trajectories = 0;
  options->plot = 0;
  options->fixed_dataset = 0;
  options->global_delta = 0.0;
  options->label = nullptr;
}

odb_status odb_simulate_preset(const char* preset,
                               const odb_sim_options* options,
                               const char* out_dir) {
  return guarded([&]() {
    require(preset != nullptr, "NULL preset");
    std::vector<odb::SimJob> jobs = odb::preset_jobs(preset);
    apply_schedule(jobs, options ? options->global_delta : 0.0);
    if (options) apply_fixed_dataset(jobs, *options);
    return simulate(jobs, options, out_dir);
  });
}

odb_status odb_simulate_instance(const odb_instance* instance,
                                 const char* family_spec,
                                 const char* policies_csv,
                                 const odb_sim_options* options,
                                 const char* out_dir) {
  return guarded([&]() {
    require(instance != nullptr, "NULL instance");
    require(options != nullptr, "options must not be NULL");
    const std::string label =
        options->label && *options->label ? options->label : "custom";
    std::vector<odb::SimJob> jobs;
    if (family_spec && *family_spec) {
      odb::SimJob job;
      job.experiment = label;
      job.policy = "min-comb-ucb";
      job.param = 0.0;
      odb::CombTrialConfig config;
      config.instance = make_comb_instance(instance->file, family_spec);
      config.v = instance->file.v;
      config.schedule = odb::DeltaSchedule::dependent();
      job.work = odb::SimJob::CombWork{std::move(config)};
      jobs.push_back(std::move(job));
      if (policies_csv && *policies_csv &&
          std::string(policies_csv) != "min-comb-ucb")
        throw odb::UsageError(
            "combinatorial runs support only the min-comb-ucb policy");
    } else {
      std::vector<odb::PolicyKind> kinds;
      if (policies_csv && *policies_csv) {
        std::istringstream in(policies_csv);
        std::string token;
        while (std::getline(in, token, ',')) {
          const auto kind = odb::parse_policy(token);
          if (!kind)
            throw odb::UsageError("unknown policy '" + token + "'");
          kinds.push_back(*kind);
        }
      } else {
        kinds = {odb::PolicyKind::MinUcb, odb::PolicyKind::PureUcb,
                 odb::PolicyKind::UcbSOnly, odb::PolicyKind::MonUcbPooled};
      }
      for (odb::PolicyKind kind : kinds) {
        odb::SimJob job;
        job.experiment = label;
        job.policy = odb::policy_name(kind);
        job.param = 0.0;
        odb::MabTrialConfig config;
        config.instance = instance->file.instance;
        config.v = instance->file.v;
        config.schedule = odb::DeltaSchedule::dependent();
        job.work = odb::SimJob::MabWork{std::move(config), kind};
        jobs.push_back(std::move(job));
      }
    }
    apply_schedule(jobs, options->global_delta);
    apply_fixed_dataset(jobs, *options);
    return simulate(jobs, options, out_dir);
  });
}

odb_status odb_preset_materialize(const char* preset, const char* out_dir,
                                  char** manifest_out) {
  return guarded([&]() {
    require(preset && out_dir, "NULL argument");
    const auto files = odb::preset_files(preset);
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec && !fs::is_directory(out_dir))
      throw odb::IoError("cannot create output directory '" +
                         std::string(out_dir) + "'");
    std::ostringstream manifest;
    for (const auto& [name, content] : files) {
      odb::atomic_write((fs::path(out_dir) / name).string(), content);
      manifest << name << "\n";
    }
    if (manifest_out) *manifest_out = dup_text(manifest.str());
    return ODB_OK;
  });
}

odb_status odb_render_plot(const char* summary_csv_path,
                           const char* svg_path) {
  return guarded([&]() {
    require(summary_csv_path && svg_path, "NULL argument");
    const auto rows =
        odb::parse_summary_csv(odb::read_file(summary_csv_path));
    if (rows.empty()) {
      set_error("summary has no data rows; nothing rendered");
      return ODB_EMPTY;
    }
    const auto plots = odb::render_plots(rows);
    if (plots.size() == 1) {
      odb::atomic_write(svg_path, plots.front().second);
      return ODB_OK;
    }
    const std::string path(svg_path);
    const auto dot = path.rfind('.');
    const std::string stem =
        dot == std::string::npos ? path : path.substr(0, dot);
    const std::string ext =
        dot == std::string::npos ? std::string(".svg") : path.substr(dot);
    for (const auto& [experiment, svg] : plots)
      odb::atomic_write(stem + "_" + experiment + ext, svg);
    return ODB_OK;
  });
}

}  // extern "C"
