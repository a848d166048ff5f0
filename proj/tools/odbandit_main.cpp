// Command-line front end; everything below goes through the public C
// API of the shared library.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "odbandit.h"

namespace {

const char* status_class(odb_status status) {
  switch (status) {
    case ODB_OK:
    case ODB_EMPTY:
      return "ok";
    case ODB_ERR_USAGE:
      return "usage";
    case ODB_ERR_PRECONDITION:
      return "precondition";
    case ODB_ERR_IO:
      return "io";
    case ODB_ERR_INTERNAL:
      return "internal";
  }
  return "unknown";
}

int finish(odb_status status) {
  if (status == ODB_EMPTY) {
    std::fprintf(stderr, "warning: %s\n", odb_last_error());
    return 0;
  }
  if (status != ODB_OK) {
    std::fprintf(stderr, "error code=%d class=%s msg=%s\n",
                 static_cast<int>(status), status_class(status),
                 odb_last_error());
    return static_cast<int>(status);
  }
  return 0;
}

// "1000x10" and "100,200,0x3" style count lists.
bool parse_ts_list(const std::string& text, std::vector<int64_t>& out) {
  std::istringstream in(text);
  std::string token;
  while (std::getline(in, token, ',')) {
    if (token.empty()) return false;
    std::int64_t value = 0, repeat = 1;
    const auto x = token.find('x');
    try {
      std::size_t pos = 0;
      const std::string head = x == std::string::npos ? token
                                                      : token.substr(0, x);
      value = std::stoll(head, &pos);
      if (pos != head.size()) return false;
      if (x != std::string::npos) {
        const std::string tail = token.substr(x + 1);
        repeat = std::stoll(tail, &pos);
        if (pos != tail.size()) return false;
      }
    } catch (const std::exception&) {
      return false;
    }
    if (value < 0 || repeat < 1 || repeat > 1000000) return false;
    out.insert(out.end(), static_cast<std::size_t>(repeat), value);
  }
  return !out.empty();
}

std::string quote_if_needed(const std::string& s) {
  if (s.find(' ') == std::string::npos) return s;
  return "'" + s + "'";
}

struct Replay {
  std::ostringstream line;
  explicit Replay(const std::string& sub) {
    line << "replay: odbandit " << sub;
  }
  template <typename T>
  Replay& arg(const char* flag, const T& value) {
    line << ' ' << flag << ' ' << value;
    return *this;
  }
  Replay& arg(const char* flag, const std::string& value) {
    line << ' ' << flag << ' ' << quote_if_needed(value);
    return *this;
  }
  Replay& flag(const char* name, bool on) {
    if (on) line << ' ' << name;
    return *this;
  }
  void print() const { std::printf("%s\n", line.str().c_str()); }
};

struct InstanceHandle {
  odb_instance* ptr = nullptr;
  ~InstanceHandle() { odb_instance_free(ptr); }
};

struct TextHandle {
  char* ptr = nullptr;
  ~TextHandle() { odb_text_free(ptr); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"warm-start bandit simulator and bound laboratory"};
  app.require_subcommand(1);

  // ---- simulate ----------------------------------------------------------
  auto* simulate = app.add_subcommand(
      "simulate", "run seeded trials and write CSV/SVG outputs");
  std::string preset, instance_path, family, policies, out_dir, label;
  std::int64_t trials = 50;
  std::uint64_t seed = 1;
  int workers = 0;
  bool trajectories = false, plot = false, fixed_dataset = false;
  double global_delta = 0.0;
  simulate->add_option("--preset", preset,
                       "fig1a|fig1b|fig2|pricing|mpath|impossibility");
  simulate->add_option("--instance", instance_path, "instance file to run");
  simulate->add_option("--family", family,
                       "topm:m|mpath:m|influence:graph[:seeds]|explicit:file");
  simulate->add_option("--policies", policies,
                       "comma list of min-ucb,pure-ucb,ucbs,monucb");
  simulate->add_option("--trials", trials, "independent trials per cell");
  simulate->add_option("--seed", seed, "experiment seed");
  simulate->add_option("--workers", workers, "0 = hardware concurrency");
  simulate->add_option("--out", out_dir, "output directory")->required();
  simulate->add_option("--label", label, "experiment label for instance runs");
  simulate->add_option("--global-delta", global_delta,
                       "use the delta/(2Kt^2) confidence schedule");
  simulate->add_flag("--trajectories", trajectories,
                     "also write per-round trajectories.csv");
  simulate->add_flag("--plot", plot, "render summary curves as SVG");
  simulate->add_flag("--fixed-dataset", fixed_dataset,
                     "share one offline dataset across trials");

  // ---- bounds --------------------------------------------------------
  auto* bounds = app.add_subcommand(
      "bounds", "evaluate the analytic quantities for an instance");
  std::string bounds_instance, bounds_family;
  double eps = 0.5, consistency_c = 1.0, consistency_p = 0.5, delta = 0.1;
  bounds->add_option("--instance", bounds_instance, "instance file")
      ->required();
  bounds->add_option("--eps", eps, "lower-bound slack in (0,1]");
  bounds->add_option("--c", consistency_c, "consistency constant");
  bounds->add_option("--p", consistency_p, "consistency exponent");
  bounds->add_option("--delta", delta, "confidence level");
  bounds->add_option("--family", bounds_family,
                     "add the combinatorial section for this family");

  // ---- tau -----------------------------------------------------------
  auto* tau = app.add_subcommand(
      "tau", "water-filling level and allocation for offline counts");
  std::string ts_list;
  double tau_t = 0.0, tau_mass = 0.0;
  tau->add_option("--ts", ts_list, "counts, e.g. 1000x10 or 100,200,0x3")
      ->required();
  tau->add_option("--t", tau_t, "online horizon (default mass)")->required();
  tau->add_option("--mass", tau_mass, "override the allocated mass");

  // ---- preset ----------------------------------------------------------
  auto* preset_cmd =
      app.add_subcommand("preset", "materialize a preset's instance files");
  std::string preset_name, preset_out;
  preset_cmd->add_option("--name", preset_name, "preset name")->required();
  preset_cmd->add_option("--out", preset_out, "output directory")->required();

  // ---- pair ----------------------------------------------------------
  auto* pair = app.add_subcommand(
      "pair", "generate the adversarial two-arm instance pair");
  double pair_beta = 0.0, pair_eps = 0.0, pair_c = 0.0, pair_t = 0.0;
  std::string pair_out;
  pair->add_option("--beta", pair_beta, "exponent in (0, 1/2)")->required();
  pair->add_option("--eps", pair_eps, "exponent in (0, beta)")->required();
  pair->add_option("--c", pair_c, "consistency constant")->required();
  pair->add_option("--t", pair_t, "online horizon")->required();
  pair->add_option("--out", pair_out, "also write the instance files here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::fprintf(stderr, "error code=2 class=usage msg=%s\n", e.what());
    return 2;
  }

  if (simulate->parsed()) {
    if (preset.empty() == instance_path.empty()) {
      std::fprintf(stderr,
                   "error code=2 class=usage msg=simulate needs exactly one "
                   "of --preset or --instance\n");
      return 2;
    }
    odb_sim_options options;
    odb_sim_options_init(&options);
    options.trials = trials;
    options.seed = seed;
    options.workers = workers;
    options.trajectories = trajectories ? 1 : 0;
    options.plot = plot ? 1 : 0;
    options.fixed_dataset = fixed_dataset ? 1 : 0;
    options.global_delta = global_delta;
    options.label = label.empty() ? nullptr : label.c_str();

    odb_status status;
    if (!preset.empty()) {
      status = odb_simulate_preset(preset.c_str(), &options, out_dir.c_str());
    } else {
      InstanceHandle handle;
      status = odb_instance_load(instance_path.c_str(), &handle.ptr);
      if (status == ODB_OK)
        status = odb_simulate_instance(
            handle.ptr, family.empty() ? nullptr : family.c_str(),
            policies.empty() ? nullptr : policies.c_str(), &options,
            out_dir.c_str());
    }
    if (status == ODB_OK) {
      Replay replay("simulate");
      if (!preset.empty())
        replay.arg("--preset", preset);
      else
        replay.arg("--instance", instance_path);
      if (!family.empty()) replay.arg("--family", family);
      if (!policies.empty()) replay.arg("--policies", policies);
      if (!label.empty()) replay.arg("--label", label);
      replay.arg("--trials", trials).arg("--seed", seed);
      replay.arg("--workers", workers).arg("--out", out_dir);
      if (global_delta > 0.0) replay.arg("--global-delta", global_delta);
      replay.flag("--trajectories", trajectories);
      replay.flag("--plot", plot);
      replay.flag("--fixed-dataset", fixed_dataset);
      replay.print();
      std::printf("wrote %s/raw.csv and %s/summary.csv%s%s\n",
                  out_dir.c_str(), out_dir.c_str(),
                  trajectories ? " and trajectories.csv" : "",
                  plot ? " and plot SVG(s)" : "");
    }
    return finish(status);
  }

  if (bounds->parsed()) {
    InstanceHandle handle;
    odb_status status = odb_instance_load(bounds_instance.c_str(),
                                          &handle.ptr);
    TextHandle text;
    if (status == ODB_OK)
      status = odb_bounds_report(
          handle.ptr, eps, consistency_c, consistency_p, delta,
          bounds_family.empty() ? nullptr : bounds_family.c_str(), &text.ptr);
    if (status == ODB_OK) {
      Replay replay("bounds");
      replay.arg("--instance", bounds_instance)
          .arg("--eps", eps)
          .arg("--c", consistency_c)
          .arg("--p", consistency_p)
          .arg("--delta", delta);
      if (!bounds_family.empty()) replay.arg("--family", bounds_family);
      replay.print();
      std::fputs(text.ptr, stdout);
    }
    return finish(status);
  }

  if (tau->parsed()) {
    std::vector<int64_t> counts;
    if (!parse_ts_list(ts_list, counts)) {
      std::fprintf(stderr,
                   "error code=2 class=usage msg=cannot parse --ts list\n");
      return 2;
    }
    const double mass = tau_mass > 0.0 ? tau_mass : tau_t;
    TextHandle text;
    const odb_status status = odb_tau_report(
        counts.data(), static_cast<int64_t>(counts.size()), mass, &text.ptr);
    if (status == ODB_OK) {
      Replay replay("tau");
      replay.arg("--ts", ts_list).arg("--t", tau_t);
      if (tau_mass > 0.0) replay.arg("--mass", tau_mass);
      replay.print();
      std::fputs(text.ptr, stdout);
    }
    return finish(status);
  }

  if (preset_cmd->parsed()) {
    TextHandle manifest;
    const odb_status status = odb_preset_materialize(
        preset_name.c_str(), preset_out.c_str(), &manifest.ptr);
    if (status == ODB_OK) {
      Replay replay("preset");
      replay.arg("--name", preset_name).arg("--out", preset_out);
      replay.print();
      std::fputs(manifest.ptr, stdout);
    }
    return finish(status);
  }

  if (pair->parsed()) {
    TextHandle text;
    odb_status status =
        odb_pair_report(pair_beta, pair_eps, pair_c, pair_t, &text.ptr);
    if (status == ODB_OK && !pair_out.empty())
      status =
          odb_pair_write(pair_beta, pair_eps, pair_c, pair_t,
                         pair_out.c_str());
    if (status == ODB_OK) {
      Replay replay("pair");
      replay.arg("--beta", pair_beta)
          .arg("--eps", pair_eps)
          .arg("--c", pair_c)
          .arg("--t", pair_t);
      if (!pair_out.empty()) replay.arg("--out", pair_out);
      replay.print();
      std::fputs(text.ptr, stdout);
    }
    return finish(status);
  }

  return 0;
}
