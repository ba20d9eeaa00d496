// SPDX-License-Identifier: Apache-2.0
#include "qilens/run_config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "qilens/errors.hpp"

namespace qilens {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}

struct KeyValue {
  std::string value;
  std::string origin;  // "file:line" or env var name
};

using SectionMap = std::map<std::string, std::map<std::string, KeyValue>>;

[[noreturn]] void bad_key(const KeyValue& kv, const std::string& key,
                          const std::string& what) {
  throw ValidationError(kv.origin + ": key '" + key + "': " + what);
}

double as_double(const SectionMap& m, const std::string& sec, const std::string& key,
                 double fallback) {
  auto s = m.find(sec);
  if (s == m.end()) return fallback;
  auto k = s->second.find(key);
  if (k == s->second.end()) return fallback;
  const std::string v = k->second.value;
  if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
  double out = 0.0;
  const char* begin = v.data();
  const char* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc{} || ptr != end) bad_key(k->second, key, "not a number: '" + v + "'");
  return out;
}

std::uint64_t as_u64(const SectionMap& m, const std::string& sec, const std::string& key,
                     std::uint64_t fallback) {
  auto s = m.find(sec);
  if (s == m.end()) return fallback;
  auto k = s->second.find(key);
  if (k == s->second.end()) return fallback;
  std::uint64_t out = 0;
  const std::string& v = k->second.value;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    bad_key(k->second, key, "not an unsigned integer: '" + v + "'");
  }
  return out;
}

bool as_bool(const SectionMap& m, const std::string& sec, const std::string& key,
             bool fallback) {
  auto s = m.find(sec);
  if (s == m.end()) return fallback;
  auto k = s->second.find(key);
  if (k == s->second.end()) return fallback;
  const std::string v = k->second.value;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_key(k->second, key, "not a boolean: '" + v + "'");
}

bool has_key(const SectionMap& m, const std::string& sec, const std::string& key) {
  auto s = m.find(sec);
  return s != m.end() && s->second.count(key) > 0;
}

const std::map<std::string, std::vector<std::string>>& known_keys() {
  static const std::map<std::string, std::vector<std::string>> keys = {
      {"source",
       {"rep_rate", "mu_pair", "eta_i", "eta_s", "noise_rate_s", "bin_width", "seed",
        "m_singles"}},
      {"lens",
       {"theta_th", "theta_s", "t_th", "t_s", "k", "c_r", "m", "v_geom", "w_s_mm",
        "w_p_mm"}},
      {"scenario", {"t_on", "t_off", "duration", "relax_t_th", "relax_t_s"}},
      {"fit", {"free", "weights", "max_evals", "profiles"}},
      {"output", {"dir", "csv_only", "gsi_window"}},
  };
  return keys;
}

void apply_env_overrides(SectionMap& sections) {
  for (const auto& [section, keys] : known_keys()) {
    for (const std::string& key : keys) {
      const std::string var = "QILENS_" + upper(section) + "_" + upper(key);
      if (const char* value = std::getenv(var.c_str())) {
        sections[section][key] = KeyValue{trim(value), var};
      }
    }
  }
}

}  // namespace

void RunConfig::validate() const {
  source.validate();
  lens.validate();
  scenario.validate();
  if (beams) beams->check_consistent(lens.m);
  if (gsi_window < 1) throw ValidationError("[output] gsi_window must be >= 1");
  if (fit_max_evals < 10) throw ValidationError("[fit] max_evals must be >= 10");
}

std::vector<std::string> RunConfig::warnings() const {
  std::vector<std::string> out = source.warnings();
  for (auto& w : lens.warnings()) out.push_back(w);
  return out;
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
  SectionMap sections;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    // strip trailing comments
    if (const auto hash = s.find(" #"); hash != std::string::npos) s = trim(s.substr(0, hash));

    std::ostringstream where;
    where << origin << ":" << line_no;

    if (s.front() == '[') {
      if (s.back() != ']') {
        throw ValidationError(where.str() + ": malformed section header '" + s + "'");
      }
      section = trim(s.substr(1, s.size() - 2));
      if (known_keys().find(section) == known_keys().end()) {
        throw ValidationError(where.str() + ": unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw ValidationError(where.str() + ": expected key = value, got '" + s + "'");
    }
    if (section.empty()) {
      throw ValidationError(where.str() + ": key outside any [section]");
    }
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    const auto& allowed = known_keys().at(section);
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ValidationError(where.str() + ": unknown key '" + key + "' in [" + section + "]");
    }
    if (sections[section].count(key)) {
      throw ValidationError(where.str() + ": duplicate key '" + key + "'");
    }
    sections[section][key] = KeyValue{value, where.str()};
  }

  apply_env_overrides(sections);

  RunConfig cfg;
  // [source]
  cfg.source.rep_rate = as_double(sections, "source", "rep_rate", cfg.source.rep_rate);
  cfg.source.mu_pair = as_double(sections, "source", "mu_pair", cfg.source.mu_pair);
  cfg.source.eta_i = as_double(sections, "source", "eta_i", cfg.source.eta_i);
  cfg.source.eta_s = as_double(sections, "source", "eta_s", cfg.source.eta_s);
  cfg.source.noise_rate_s =
      as_double(sections, "source", "noise_rate_s", cfg.source.noise_rate_s);
  cfg.source.bin_width = as_double(sections, "source", "bin_width", cfg.source.bin_width);
  cfg.source.seed = as_u64(sections, "source", "seed", cfg.source.seed);
  if (has_key(sections, "source", "m_singles")) {
    cfg.source.m_singles = as_double(sections, "source", "m_singles", 0.0);
  }

  // [lens]
  cfg.lens.theta_th = as_double(sections, "lens", "theta_th", cfg.lens.theta_th);
  cfg.lens.theta_s = as_double(sections, "lens", "theta_s", cfg.lens.theta_s);
  cfg.lens.t_th = as_double(sections, "lens", "t_th", cfg.lens.t_th);
  cfg.lens.t_s = as_double(sections, "lens", "t_s", cfg.lens.t_s);
  cfg.lens.k = as_double(sections, "lens", "k", cfg.lens.k);
  cfg.lens.c_r = as_double(sections, "lens", "c_r", cfg.lens.c_r);
  cfg.lens.m = as_double(sections, "lens", "m", cfg.lens.m);
  cfg.lens.v_geom = as_double(sections, "lens", "v_geom", cfg.lens.v_geom);
  if (has_key(sections, "lens", "w_s_mm") || has_key(sections, "lens", "w_p_mm")) {
    BeamGeometry beams;
    beams.w_s_mm = as_double(sections, "lens", "w_s_mm", 0.0);
    beams.w_p_mm = as_double(sections, "lens", "w_p_mm", 0.0);
    cfg.beams = beams;
  }

  // [scenario]
  cfg.scenario.t_on = as_double(sections, "scenario", "t_on", cfg.scenario.t_on);
  cfg.scenario.t_off = as_double(sections, "scenario", "t_off", cfg.scenario.t_off);
  cfg.scenario.duration = as_double(sections, "scenario", "duration", cfg.scenario.duration);
  if (has_key(sections, "scenario", "relax_t_th") ||
      has_key(sections, "scenario", "relax_t_s")) {
    RelaxParams relax;
    relax.t_th = as_double(sections, "scenario", "relax_t_th", 0.0);
    relax.t_s = as_double(sections, "scenario", "relax_t_s", 0.0);
    cfg.scenario.relax = relax;
  }

  // [fit]
  if (has_key(sections, "fit", "free")) {
    const KeyValue& kv = sections.at("fit").at("free");
    std::istringstream fs(kv.value);
    std::string item;
    while (std::getline(fs, item, ',')) {
      const std::string name = trim(item);
      if (name.empty()) continue;
      const auto param = fit_param_from_string(name);
      if (!param) bad_key(kv, "free", "unknown parameter '" + name + "'");
      cfg.fit_free.push_back(*param);
    }
  } else {
    cfg.fit_free = {FitParam::theta_th, FitParam::theta_s, FitParam::t_th,
                    FitParam::t_s,      FitParam::k,       FitParam::c_r};
  }
  if (has_key(sections, "fit", "weights")) {
    const KeyValue& kv = sections.at("fit").at("weights");
    if (kv.value == "poisson") {
      cfg.fit_weights = FitSpec::Weights::poisson;
    } else if (kv.value == "uniform") {
      cfg.fit_weights = FitSpec::Weights::uniform;
    } else {
      bad_key(kv, "weights", "expected poisson or uniform");
    }
  }
  cfg.fit_max_evals = static_cast<int>(as_u64(sections, "fit", "max_evals",
                                               static_cast<std::uint64_t>(cfg.fit_max_evals)));
  cfg.fit_profiles = as_bool(sections, "fit", "profiles", cfg.fit_profiles);

  // [output]
  if (has_key(sections, "output", "dir")) {
    cfg.out_dir = sections.at("output").at("dir").value;
  }
  cfg.csv_only = as_bool(sections, "output", "csv_only", cfg.csv_only);
  cfg.gsi_window = as_u64(sections, "output", "gsi_window", cfg.gsi_window);

  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.string());
}

}  // namespace qilens
