#pragma once

/// Run configuration: a flat `key=value` grammar.
///
///   # comment            blank lines and '#' comments are ignored
///   species=Cr52         lab units live in the key name (field_gauss, temp_uk)
///   preset=27G-methodI   start from a built-in scenario, later keys override
///
/// Required: species, field_gauss, temp_uk. Everything is converted to SI.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dipolar/channels.hpp"
#include "dipolar/cloud.hpp"
#include "dipolar/errors.hpp"
#include "dipolar/thermal.hpp"
#include "dipolar/units.hpp"

namespace dipolar {

enum class RateSource { theory, fixed };

struct TrapPreset {
  std::string_view label;
  double freq_x, freq_y, freq_z;  // Hz
};

// Measured Ioffe-Pritchard frequencies at the two working points.
inline constexpr std::array<TrapPreset, 2> trap_presets{{
    {"clip-27G", 120.0, 120.0, 73.0},
    {"clip-0.7G", 806.0, 806.0, 42.0},
}};

struct RunConfig {
  SpeciesConfig species = species::chromium52();
  double field = 0.0;        // T
  double temperature = 0.0;  // K
  std::optional<std::array<double, 3>> trap_frequencies;  // Hz
  std::string trap_label;
  double density = 0.0;  // mean density N/V, m^-3
  double polarization = 1.0;
  double background_rate = 0.0;  // 1/s
  RateSource rate_source = RateSource::theory;
  double beta_event = 0.0;  // m^3/s, used when rate_source == fixed
  double beta_loss = 0.0;   // m^3/s
  double beta2 = 0.0;       // m^3/s
  EvolutionMode mode = EvolutionMode::free_evolution;
  double duration = 15.0;  // s
  std::size_t points = 31;
  RateUpdate rate_update = RateUpdate::frozen;
  double rtol = 1e-9;
  std::uint64_t seed = 0;
  double noise_fraction = 0.0;
  std::optional<double> rf_frequency;   // Hz
  std::optional<double> fit_window;     // s
  std::optional<double> fixed_volume;   // m^3
  std::string output;

  TrapConfig trap() const {
    if (!trap_frequencies)
      throw InvalidInput("configuration has no trap (set trap=... or freq_x_hz/freq_y_hz/freq_z_hz)");
    return {(*trap_frequencies)[0], (*trap_frequencies)[1], (*trap_frequencies)[2], field,
            background_rate};
  }

  RateInputs rates() const {
    RateInputs r{beta_event, beta_loss, beta2};
    if (rate_source == RateSource::theory) {
      r.beta_event = beta_event_rate(species, {temperature, field});
      r.beta_loss = beta_loss_rate(species, {temperature, field});
    }
    return r;
  }
};

struct ScenarioPreset {
  std::string_view name;
  std::string_view description;
  std::string_view text;
};

inline constexpr std::array<ScenarioPreset, 3> scenario_presets{{
    {"27G-methodI", "Doppler-cooled 52Cr at 27 G with rf shield (method i)",
     R"(# Doppler-cooled 52Cr, rf shield on, 27 G offset field
species=Cr52
trap=clip-27G
field_gauss=27
temp_uk=275
density_cm3=1e11
polarization=1
gamma_bg_per_s=0.005
rates=theory
mode=rf_shield
duration_s=2
points=41
)"},
    {"0.7G-methodII", "evaporated 52Cr at 0.7 G, free evolution (methods ii/iii)",
     R"(# rf-evaporated 52Cr at 0.7 G, Stern-Gerlach population readout
# density: 35% redistribution in 15 s at beta_loss = 3.1e-12 cm3/s, constant volume
species=Cr52
trap=clip-0.7G
field_gauss=0.7
temp_uk=50
density_cm3=1.2e10
polarization=1
gamma_bg_per_s=0
rates=theory
beta2_cm3s=1.1e-10
mode=free_evolution
duration_s=15
points=31
)"},
    {"20G-isotope", "52Cr/50Cr heating comparison at 20 G",
     R"(# isotope comparison at 20 G; switch species=Cr50 for the other isotope
species=Cr52
trap=clip-27G
field_gauss=20
temp_uk=275
density_cm3=1e10
polarization=1
gamma_bg_per_s=0.005
rates=theory
mode=free_evolution
duration_s=5
points=21
)"},
}};

inline const ScenarioPreset& scenario_preset(std::string_view name) {
  for (const auto& p : scenario_presets)
    if (p.name == name) return p;
  throw InvalidInput("unknown preset '" + std::string(name) + "'");
}

namespace detail {

struct Entry {
  std::string value;
  std::size_t line;
  std::string source;
};

using EntryMap = std::map<std::string, Entry, std::less<>>;

inline constexpr std::array<std::string_view, 26> known_keys{
    "preset",         "species",        "trap",          "freq_x_hz",   "freq_y_hz",
    "freq_z_hz",      "field_gauss",    "temp_uk",       "density_cm3", "polarization",
    "gamma_bg_per_s", "rates",          "beta_event_cm3s", "beta_loss_cm3s", "beta2_cm3s",
    "mode",           "duration_s",     "points",        "rate_update", "rtol",
    "seed",           "noise_fraction", "rf_mhz",        "fit_window_s", "volume_cm3",
    "output",
};

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline EntryMap parse_entries(std::string_view text, const std::string& source) {
  EntryMap entries;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    std::string_view raw = text.substr(start, nl == std::string_view::npos ? nl : nl - start);
    ++line_no;
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value in " + source, line_no);
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (std::find(known_keys.begin(), known_keys.end(), key) == known_keys.end())
      throw ParseError("unknown key '" + key + "' in " + source, line_no);
    if (value.empty()) throw ParseError("empty value for '" + key + "' in " + source, line_no);
    if (entries.count(key)) throw ParseError("duplicate key '" + key + "' in " + source, line_no);
    entries[key] = {value, line_no, source};
  }
  return entries;
}

inline double number(const Entry& e, const std::string& key) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(e.value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != e.value.size() || !std::isfinite(v))
    throw ParseError("'" + key + "' expects a number, got '" + e.value + "' (" + e.source + ")",
                     e.line);
  return v;
}

inline void range_error(const Entry& e, const std::string& key, const std::string& range) {
  throw ParseError("'" + key + "'=" + e.value + " out of range " + range + " (" + e.source + ")",
                   e.line);
}

}  // namespace detail

/// Key/value overrides (e.g. from command-line flags) applied on top of the
/// file contents.
using ConfigOverrides = std::vector<std::pair<std::string, std::string>>;

inline const std::vector<std::string> default_required_keys{"species", "field_gauss", "temp_uk"};

/// Keys outside `required` that are absent keep their RunConfig defaults
/// (Cr52, B = 0, T = 0).
inline RunConfig parse_config_text(std::string_view text, const std::string& source = "config",
                                   const ConfigOverrides& overrides = {},
                                   const std::vector<std::string>& required = default_required_keys) {
  using detail::Entry;
  detail::EntryMap file = detail::parse_entries(text, source);
  for (const auto& [key, value] : overrides) {
    if (std::find(detail::known_keys.begin(), detail::known_keys.end(), key) ==
        detail::known_keys.end())
      throw ParseError("unknown key '" + key + "' (command line)");
    file[key] = {value, 0, "command line"};
  }

  detail::EntryMap merged;
  if (auto it = file.find("preset"); it != file.end()) {
    const ScenarioPreset* preset = nullptr;
    for (const auto& p : scenario_presets)
      if (p.name == it->second.value) preset = &p;
    if (!preset)
      throw ParseError("unknown preset '" + it->second.value + "' (" + it->second.source + ")",
                       it->second.line);
    merged = detail::parse_entries(preset->text, "preset " + std::string(preset->name));
  }
  for (auto& [key, entry] : file) merged[key] = entry;

  std::vector<std::string> missing;
  for (const auto& key : required)
    if (!merged.count(key)) missing.emplace_back(key);
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw ParseError("missing required keys in " + source + ": " + list);
  }

  RunConfig cfg;
  auto get = [&](const char* key) -> const Entry* {
    auto it = merged.find(key);
    return it == merged.end() ? nullptr : &it->second;
  };
  auto num = [&](const char* key) { return detail::number(*get(key), key); };

  if (const Entry* e = get("species")) {
    try {
      cfg.species = species::by_label(e->value);
    } catch (const InvalidInput& ex) {
      throw ParseError(std::string(ex.what()) + " (" + e->source + ")", e->line);
    }
  }
  if (get("field_gauss")) {
    const double field_g = num("field_gauss");
    if (!(field_g >= 0.0 && field_g <= 100.0))
      detail::range_error(*get("field_gauss"), "field_gauss", "[0, 100]");
    cfg.field = gauss(field_g);
  }
  if (get("temp_uk")) {
    const double temp_uk = num("temp_uk");
    if (!(temp_uk > 0.0 && temp_uk <= 10000.0))
      detail::range_error(*get("temp_uk"), "temp_uk", "(0, 10000]");
    cfg.temperature = microkelvin(temp_uk);
  }

  if (const Entry* e = get("trap")) {
    const TrapPreset* found = nullptr;
    for (const auto& t : trap_presets)
      if (t.label == e->value) found = &t;
    if (!found) throw ParseError("unknown trap '" + e->value + "' (" + e->source + ")", e->line);
    cfg.trap_frequencies = std::array<double, 3>{found->freq_x, found->freq_y, found->freq_z};
    cfg.trap_label = e->value;
  }
  {
    const char* keys[3] = {"freq_x_hz", "freq_y_hz", "freq_z_hz"};
    int given = 0;
    for (const char* k : keys) given += get(k) != nullptr;
    if (given != 0 && given != 3 && !cfg.trap_frequencies)
      throw ParseError("freq_x_hz, freq_y_hz and freq_z_hz must be given together");
    for (int i = 0; i < 3; ++i) {
      if (!get(keys[i])) continue;
      const double f = num(keys[i]);
      if (!(f > 0.0)) detail::range_error(*get(keys[i]), keys[i], "(0, inf)");
      if (!cfg.trap_frequencies) cfg.trap_frequencies = std::array<double, 3>{};
      (*cfg.trap_frequencies)[i] = f;
      cfg.trap_label = "custom";
    }
  }

  if (get("density_cm3")) {
    const double n = num("density_cm3");
    if (!(n >= 0.0)) detail::range_error(*get("density_cm3"), "density_cm3", "[0, inf)");
    cfg.density = per_cm3(n);
  }
  if (get("polarization")) {
    cfg.polarization = num("polarization");
    if (!(cfg.polarization >= 0.0 && cfg.polarization <= 1.0))
      detail::range_error(*get("polarization"), "polarization", "[0, 1]");
  }
  if (get("gamma_bg_per_s")) {
    cfg.background_rate = num("gamma_bg_per_s");
    if (!(cfg.background_rate >= 0.0))
      detail::range_error(*get("gamma_bg_per_s"), "gamma_bg_per_s", "[0, inf)");
  }
  auto rate_key = [&](const char* key, double& dst) {
    if (!get(key)) return false;
    const double v = num(key);
    if (!(v >= 0.0)) detail::range_error(*get(key), key, "[0, inf)");
    dst = cm3_per_s(v);
    return true;
  };
  const bool have_event = rate_key("beta_event_cm3s", cfg.beta_event);
  const bool have_loss = rate_key("beta_loss_cm3s", cfg.beta_loss);
  rate_key("beta2_cm3s", cfg.beta2);
  if (const Entry* e = get("rates")) {
    if (e->value == "theory") cfg.rate_source = RateSource::theory;
    else if (e->value == "fixed") cfg.rate_source = RateSource::fixed;
    else throw ParseError("rates must be 'theory' or 'fixed' (" + e->source + ")", e->line);
  } else if (have_event || have_loss) {
    cfg.rate_source = RateSource::fixed;
  }
  if (const Entry* e = get("mode")) {
    if (e->value == "rf_shield") cfg.mode = EvolutionMode::rf_shield;
    else if (e->value == "free_evolution") cfg.mode = EvolutionMode::free_evolution;
    else throw ParseError("mode must be 'rf_shield' or 'free_evolution' (" + e->source + ")", e->line);
  }
  if (const Entry* e = get("rate_update")) {
    if (e->value == "frozen") cfg.rate_update = RateUpdate::frozen;
    else if (e->value == "self_consistent") cfg.rate_update = RateUpdate::self_consistent;
    else throw ParseError("rate_update must be 'frozen' or 'self_consistent'", e->line);
  }
  if (get("duration_s")) {
    cfg.duration = num("duration_s");
    if (!(cfg.duration > 0.0)) detail::range_error(*get("duration_s"), "duration_s", "(0, inf)");
  }
  if (get("points")) {
    const double p = num("points");
    if (!(p >= 2.0 && p <= 1e6 && std::floor(p) == p))
      detail::range_error(*get("points"), "points", "integer in [2, 1e6]");
    cfg.points = static_cast<std::size_t>(p);
  }
  if (get("rtol")) {
    cfg.rtol = num("rtol");
    if (!(cfg.rtol >= 1e-13 && cfg.rtol <= 1e-3)) detail::range_error(*get("rtol"), "rtol", "[1e-13, 1e-3]");
  }
  if (get("seed")) {
    const double s = num("seed");
    if (!(s >= 0.0 && std::floor(s) == s && s < 1.8e19))
      detail::range_error(*get("seed"), "seed", "nonnegative integer");
    cfg.seed = static_cast<std::uint64_t>(std::stoull(get("seed")->value));
  }
  if (get("noise_fraction")) {
    cfg.noise_fraction = num("noise_fraction");
    if (!(cfg.noise_fraction >= 0.0 && cfg.noise_fraction < 1.0))
      detail::range_error(*get("noise_fraction"), "noise_fraction", "[0, 1)");
  }
  if (get("rf_mhz")) {
    const double f = num("rf_mhz");
    if (!(f > 0.0)) detail::range_error(*get("rf_mhz"), "rf_mhz", "(0, inf)");
    cfg.rf_frequency = f * 1e6;
  }
  if (get("fit_window_s")) {
    const double w = num("fit_window_s");
    if (!(w > 0.0)) detail::range_error(*get("fit_window_s"), "fit_window_s", "(0, inf)");
    cfg.fit_window = w;
  }
  if (get("volume_cm3")) {
    const double v = num("volume_cm3");
    if (!(v > 0.0)) detail::range_error(*get("volume_cm3"), "volume_cm3", "(0, inf)");
    cfg.fixed_volume = v * 1e-6;
  }
  if (const Entry* e = get("output")) cfg.output = e->value;
  return cfg;
}

inline RunConfig parse_config(const std::string& path, const ConfigOverrides& overrides = {},
                              const std::vector<std::string>& required = default_required_keys) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path, overrides, required);
}

}  // namespace dipolar
