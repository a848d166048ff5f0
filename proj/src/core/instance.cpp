#include "core/instance.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "core/csv.hpp"
#include "core/errors.hpp"
#include "core/rng.hpp"

namespace odb {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void MabInstance::validate() const {
  if (arms.empty()) throw PreconditionError("instance needs at least one arm");
  if (horizon < 1) throw PreconditionError("horizon must be >= 1");
  if (offline_counts.size() != arms.size())
    throw PreconditionError("offline_counts length does not match arm count");
  for (const auto& arm : arms) {
    if (!std::isfinite(arm.mu_on) || !std::isfinite(arm.mu_off))
      throw PreconditionError("arm means must be finite");
  }
  for (std::int64_t c : offline_counts) {
    if (c < 0) throw PreconditionError("offline counts must be >= 0");
  }
}

BiasBound BiasBound::all_infinite(std::size_t k) {
  return BiasBound{std::vector<double>(k, kInf)};
}

BiasBound BiasBound::exact_gap(const MabInstance& instance) {
  BiasBound b;
  b.v.reserve(instance.num_arms());
  for (const auto& arm : instance.arms)
    b.v.push_back(std::abs(arm.mu_off - arm.mu_on));
  return b;
}

OfflineDataset sample_offline(const MabInstance& instance,
                              std::uint64_t seed) {
  const std::size_t k = instance.num_arms();
  OfflineDataset ds;
  ds.samples.resize(k);
  ds.mean_cache.resize(k);
  for (std::size_t a = 0; a < k; ++a) {
    const std::int64_t count = instance.offline_counts[a];
    if (count == 0) continue;
    RewardStream stream(mix_seed(seed, kPurposeOffline, a));
    auto& arm_samples = ds.samples[a];
    arm_samples.reserve(static_cast<std::size_t>(count));
    double sum = 0.0;
    for (std::int64_t s = 0; s < count; ++s) {
      const double x = instance.arms[a].mu_off + stream.gaussian();
      arm_samples.push_back(x);
      sum += x;
    }
    ds.mean_cache[a] = sum / static_cast<double>(count);
  }
  return ds;
}

bool validate_bias_bound(const MabInstance& instance, const BiasBound& bound) {
  if (bound.v.size() != instance.num_arms())
    throw PreconditionError("bias bound length does not match arm count");
  for (std::size_t a = 0; a < instance.num_arms(); ++a) {
    if (bound.v[a] < 0.0)
      throw PreconditionError("bias bound entries must be >= 0");
    if (bound.v[a] <
        std::abs(instance.arms[a].mu_off - instance.arms[a].mu_on))
      return false;
  }
  return true;
}

GapProfile gap_profile(const MabInstance& instance) {
  instance.validate();
  GapProfile profile;
  profile.mu_star = -kInf;
  for (const auto& arm : instance.arms)
    profile.mu_star = std::max(profile.mu_star, arm.mu_on);
  profile.delta.reserve(instance.num_arms());
  for (std::size_t a = 0; a < instance.num_arms(); ++a) {
    profile.delta.push_back(profile.mu_star - instance.arms[a].mu_on);
    if (instance.arms[a].mu_on == profile.mu_star)
      profile.optimal_arms.push_back(a);
  }
  return profile;
}

namespace {

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double parse_real(const std::string& tok, const char* what) {
  if (tok == "inf" || tok == "+inf") return kInf;
  try {
    std::size_t pos = 0;
    const double x = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return x;
  } catch (const std::exception&) {
    throw IoError(std::string("cannot parse ") + what + " value '" + tok +
                  "'");
  }
}

std::int64_t parse_count(const std::string& tok, const char* what) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return x;
  } catch (const std::exception&) {
    throw IoError(std::string("cannot parse ") + what + " value '" + tok +
                  "'");
  }
}

}  // namespace

InstanceFile parse_instance_text(const std::string& text) {
  std::int64_t k = -1, horizon = -1;
  std::vector<double> mu_on, mu_off, v;
  std::vector<std::int64_t> t_s;
  bool saw[6] = {false, false, false, false, false, false};

  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (split_ws(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw IoError("instance file: expected 'key = values', got '" + line +
                    "'");
    const auto keys = split_ws(line.substr(0, eq));
    if (keys.size() != 1)
      throw IoError("instance file: malformed key in '" + line + "'");
    const std::string key = keys[0];
    const auto values = split_ws(line.substr(eq + 1));
    if (values.empty())
      throw IoError("instance file: no values for key '" + key + "'");

    if (key == "k") {
      k = parse_count(values[0], "k");
      saw[0] = true;
    } else if (key == "t") {
      horizon = parse_count(values[0], "t");
      saw[1] = true;
    } else if (key == "mu_on") {
      for (const auto& tok : values) mu_on.push_back(parse_real(tok, "mu_on"));
      saw[2] = true;
    } else if (key == "mu_off") {
      for (const auto& tok : values)
        mu_off.push_back(parse_real(tok, "mu_off"));
      saw[3] = true;
    } else if (key == "t_s") {
      for (const auto& tok : values) t_s.push_back(parse_count(tok, "t_s"));
      saw[4] = true;
    } else if (key == "v") {
      for (const auto& tok : values) v.push_back(parse_real(tok, "v"));
      saw[5] = true;
    } else {
      throw IoError("instance file: unknown key '" + key + "'");
    }
  }
  for (bool s : saw) {
    if (!s)
      throw IoError(
          "instance file: fields k, t, mu_on, mu_off, t_s, v are all "
          "required");
  }
  const auto n = static_cast<std::size_t>(k);
  if (k < 1 || mu_on.size() != n || mu_off.size() != n || t_s.size() != n ||
      v.size() != n)
    throw IoError("instance file: array lengths do not match k");

  InstanceFile file;
  file.instance.arms.resize(n);
  for (std::size_t a = 0; a < n; ++a)
    file.instance.arms[a] = {mu_on[a], mu_off[a]};
  file.instance.offline_counts = std::move(t_s);
  file.instance.horizon = horizon;
  file.v.v = std::move(v);
  file.instance.validate();
  for (double bound : file.v.v)
    if (std::isnan(bound) || bound < 0.0)
      throw IoError("instance file: v entries must be >= 0 or inf");
  return file;
}

std::string format_instance_text(const InstanceFile& file) {
  std::ostringstream out;
  out << "k = " << file.instance.num_arms() << "\n";
  out << "t = " << file.instance.horizon << "\n";
  out << "mu_on =";
  for (const auto& arm : file.instance.arms) out << ' ' << fmt_g9(arm.mu_on);
  out << "\nmu_off =";
  for (const auto& arm : file.instance.arms) out << ' ' << fmt_g9(arm.mu_off);
  out << "\nt_s =";
  for (std::int64_t c : file.instance.offline_counts) out << ' ' << c;
  out << "\nv =";
  for (double bound : file.v.v) out << ' ' << fmt_g9(bound);
  out << "\n";
  return out.str();
}

InstanceFile load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open instance file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_instance_text(buf.str());
}

void save_instance(const InstanceFile& file, const std::string& path) {
  atomic_write(path, format_instance_text(file));
}

}  // namespace odb
