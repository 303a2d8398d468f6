#pragma once

/// Command-line front end: rate, sweep, simulate, fit, presets.
///
/// Exit codes: 0 success, 1 numerical failure, 2 usage or configuration error.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dipolar/cloud.hpp"
#include "dipolar/config.hpp"
#include "dipolar/csv.hpp"
#include "dipolar/errors.hpp"
#include "dipolar/estimators.hpp"
#include "dipolar/thermal.hpp"
#include "dipolar/units.hpp"

namespace dipolar::cli {

enum ExitCode : int { ok = 0, numerical_failure = 1, usage_error = 2 };

/// Flags shared by every run-style subcommand. Each set flag becomes a
/// config override, so flags always win over file and preset values.
struct CommonFlags {
  std::string config_path;
  std::string preset;
  std::string species;
  std::optional<double> field_gauss;
  std::optional<double> temp_uk;
  std::string mode;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> set;  // raw key=value pairs

  void attach(CLI::App& app) {
    app.add_option("--config", config_path, "Run configuration file (key=value)");
    app.add_option("--preset", preset, "Built-in scenario preset");
    app.add_option("--species", species, "Species label (Cr52, Cr50, He*)");
    app.add_option("--field-gauss", field_gauss, "Offset field in gauss");
    app.add_option("--temp-uk", temp_uk, "Temperature in microkelvin");
    app.add_option("--mode", mode, "Evolution mode: rf_shield or free_evolution");
    app.add_option("--seed", seed, "Noise seed");
    app.add_option("--out", out, "Output file (stdout when omitted)");
    app.add_option("--set", set, "Extra config key=value (repeatable)");
  }

  RunConfig load(const std::vector<std::string>& required = default_required_keys) const {
    ConfigOverrides ov;
    if (!preset.empty()) ov.emplace_back("preset", preset);
    if (!species.empty()) ov.emplace_back("species", species);
    if (field_gauss) ov.emplace_back("field_gauss", csv::format_number(*field_gauss));
    if (temp_uk) ov.emplace_back("temp_uk", csv::format_number(*temp_uk));
    if (!mode.empty()) ov.emplace_back("mode", mode);
    if (seed) ov.emplace_back("seed", std::to_string(*seed));
    if (!out.empty()) ov.emplace_back("output", out);
    for (const auto& kv : set) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ParseError("--set expects key=value, got '" + kv + "'");
      ov.emplace_back(detail::trim(kv.substr(0, eq)), detail::trim(kv.substr(eq + 1)));
    }
    if (config_path.empty()) return parse_config_text("", "command line", ov, required);
    return parse_config(config_path, ov, required);
  }
};

namespace detail {

inline std::string fmt(double v) { return csv::format_number(v); }

/// Writes `text` to cfg.output, or to `out` when no output path is set.
inline void emit(const RunConfig& cfg, const std::string& text, std::ostream& out) {
  if (cfg.output.empty() || cfg.output == "-") {
    out << text;
    return;
  }
  std::ofstream f(cfg.output, std::ios::binary);
  if (!f) throw InvalidInput("cannot write '" + cfg.output + "'");
  f << text;
}

/// Standard normal deviates from mt19937_64 by Box-Muller. The stdlib
/// normal_distribution is implementation-defined, this sequence is not.
class PortableNormal {
 public:
  explicit PortableNormal(std::uint64_t seed) : engine_(seed) {}
  double operator()() {
    if (spare_) {
      const double z = *spare_;
      spare_.reset();
      return z;
    }
    const double u1 = uniform_open();
    const double u2 = uniform_open();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(phi);
    return r * std::cos(phi);
  }

 private:
  // (0, 1) with 53 random bits.
  double uniform_open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = i + 1 == n ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

inline std::string rate_table(const RunConfig& cfg) {
  if (!(cfg.temperature > 0.0)) throw InvalidInput("temperature must be > 0");
  const RateCoefficients r = rate_coefficients(cfg.species, {cfg.temperature, cfg.field});
  std::ostringstream s;
  s << "species,B_gauss,T_uK,beta_event_cm3s,beta_loss_cm3s,beta_elastic_cm3s\n";
  s << cfg.species.label << ',' << fmt(cfg.field / gauss(1.0)) << ','
    << fmt(cfg.temperature / microkelvin(1.0)) << ',' << fmt(r.beta_event / cm3_per_s(1.0)) << ','
    << fmt(r.beta_loss / cm3_per_s(1.0)) << ',' << fmt(r.beta_elastic / cm3_per_s(1.0)) << '\n';
  return s.str();
}

}  // namespace detail

enum class SweepAxis { field, temperature };

struct SweepSpec {
  SweepAxis axis = SweepAxis::field;
  std::vector<double> grid;  // gauss or microkelvin

  void validate() const {
    if (grid.size() < 2) throw InvalidInput("sweep needs at least 2 grid points");
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!std::isfinite(grid[i])) throw InvalidInput("sweep grid values must be finite");
      if (i > 0 && !(grid[i] > grid[i - 1]))
        throw InvalidInput("sweep grid must be strictly increasing");
    }
    const double lo = grid.front(), hi = grid.back();
    if (axis == SweepAxis::field && !(lo >= 0.0 && hi <= 100.0))
      throw InvalidInput("field sweep must stay within [0, 100] G");
    if (axis == SweepAxis::temperature && !(lo > 0.0 && hi <= 10000.0))
      throw InvalidInput("temperature sweep must stay within (0, 10000] uK");
  }
};

/// One row per grid point, in grid order.
inline std::string sweep_table(const RunConfig& cfg, const SweepSpec& sweep) {
  sweep.validate();
  std::ostringstream s;
  s << (sweep.axis == SweepAxis::field ? "B_gauss" : "T_uK") << ",beta_event_cm3s,beta_loss_cm3s\n";
  for (double x : sweep.grid) {
    ThermalConditions c{cfg.temperature, cfg.field};
    if (sweep.axis == SweepAxis::field) c.field = gauss(x);
    else c.temperature = microkelvin(x);
    s << detail::fmt(x) << ',' << detail::fmt(beta_event_rate(cfg.species, c) / cm3_per_s(1.0)) << ','
      << detail::fmt(beta_loss_rate(cfg.species, c) / cm3_per_s(1.0)) << '\n';
  }
  return s.str();
}

/// Trajectory of the configured scenario with optional multiplicative noise
/// (noise_fraction, seeded) on N3, N2, N1 and T.
inline TimeSeries simulate(const RunConfig& cfg) {
  if (!(cfg.temperature > 0.0)) throw InvalidInput("temperature must be > 0");
  const TrapConfig trap = cfg.trap();
  const CloudState c0 = initial_state(cfg.density, cfg.temperature, cfg.polarization, trap, cfg.species);
  EvolveOptions opt;
  opt.rtol = cfg.rtol;
  opt.rate_update = cfg.rate_update;
  const auto grid = detail::linspace(0.0, cfg.duration, cfg.points);
  TimeSeries ts = to_timeseries(evolve(c0, trap, cfg.species, cfg.mode, cfg.rates(), grid, opt), trap,
                                cfg.species);
  if (cfg.noise_fraction > 0.0) {
    detail::PortableNormal normal(cfg.seed);
    for (std::size_t i = 0; i < ts.size(); ++i)
      for (Column col : {Column::n3, Column::n2, Column::n1, Column::temperature})
        ts.columns[col][i] *= 1.0 + cfg.noise_fraction * normal();
  }
  return ts;
}

inline std::string simulate_table(const RunConfig& cfg) {
  std::ostringstream s;
  csv::write_timeseries_csv(s, simulate(cfg),
                            {Column::n3, Column::n2, Column::n1, Column::temperature, Column::volume});
  return s.str();
}

struct FitReport {
  lsq::FitResult result;
  std::string method;
};

/// Lab unit for each fitted parameter: (suffix, factor from SI).
inline std::pair<std::string, double> parameter_unit(const std::string& name) {
  if (name.rfind("beta", 0) == 0) return {"_cm3s", 1.0 / cm3_per_s(1.0)};
  if (name == "T0") return {"_uK", 1.0 / microkelvin(1.0)};
  return {"", 1.0};
}

inline FitReport run_fit(const RunConfig& cfg, const std::string& method, const TimeSeries& data) {
  FitOptions opt;
  opt.window = cfg.fit_window;
  opt.constant_volume = cfg.fixed_volume;
  if (method == "i") return {fit_method_i(data, cfg.background_rate, opt), method};
  if (method == "ii") return {fit_method_ii(data, cfg.background_rate, opt), method};
  if (method == "iii") {
    std::optional<double> n0;
    if (cfg.density > 0.0) n0 = cfg.density;
    return {fit_method_iii(data, temperature_step(cfg.species, cfg.field), opt, n0), method};
  }
  if (method == "beta2") return {fit_beta2(data, opt), method};
  throw InvalidInput("unknown fit method '" + method + "' (expected i, ii, iii or beta2)");
}

inline std::string fit_key_values(const FitReport& r) {
  std::ostringstream s;
  s << "method=" << r.method << '\n' << "model=" << r.result.model_tag << '\n';
  for (std::size_t i = 0; i < r.result.names.size(); ++i) {
    const auto [suffix, k] = parameter_unit(r.result.names[i]);
    const auto idx = static_cast<Eigen::Index>(i);
    s << r.result.names[i] << suffix << '=' << detail::fmt(r.result.params[idx] * k) << '\n';
    s << r.result.names[i] << suffix << "_sigma=" << detail::fmt(r.result.uncertainties[idx] * k) << '\n';
  }
  s << "residual_norm=" << detail::fmt(r.result.residual_norm) << '\n';
  s << "points=" << r.result.points << '\n';
  s << "iterations=" << r.result.iterations << '\n';
  s << "converged=" << (r.result.converged ? "true" : "false") << '\n';
  s << "flags=";
  for (std::size_t i = 0; i < r.result.flags.size(); ++i) s << (i ? ";" : "") << r.result.flags[i];
  s << '\n';
  return s.str();
}

inline std::string fit_csv(const FitReport& r) {
  std::ostringstream s;
  s << "parameter,value,uncertainty\n";
  for (std::size_t i = 0; i < r.result.names.size(); ++i) {
    const auto [suffix, k] = parameter_unit(r.result.names[i]);
    const auto idx = static_cast<Eigen::Index>(i);
    s << r.result.names[i] << suffix << ',' << detail::fmt(r.result.params[idx] * k) << ','
      << detail::fmt(r.result.uncertainties[idx] * k) << '\n';
  }
  return s.str();
}

inline std::string presets_listing() {
  std::ostringstream s;
  s << "scenario presets:\n";
  for (const auto& p : scenario_presets) s << "  " << p.name << "  " << p.description << '\n';
  s << "trap presets (Hz):\n";
  for (const auto& t : trap_presets)
    s << "  " << t.label << "  " << detail::fmt(t.freq_x) << '/' << detail::fmt(t.freq_y) << '/'
      << detail::fmt(t.freq_z) << '\n';
  s << "species:\n";
  for (const auto& sp : species::presets())
    s << "  " << sp.label << "  S=" << detail::fmt(sp.spin) << " g=" << detail::fmt(sp.lande_g)
      << " m=" << detail::fmt(sp.mass / constants.atomic_mass_unit) << " u\n";
  return s.str();
}

/// Runs one CLI invocation and returns its exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dipolar relaxation rates, cloud dynamics and rate-constant estimation"};
  app.name("dipolar");
  app.require_subcommand(1);

  CommonFlags rate_flags, sweep_flags, sim_flags, fit_flags;

  auto* rate = app.add_subcommand("rate", "Thermal rate coefficients at one (B, T)");
  rate_flags.attach(*rate);

  auto* sweep = app.add_subcommand("sweep", "Rate coefficients over a field or temperature grid");
  sweep_flags.attach(*sweep);
  std::string axis = "field";
  std::optional<double> from, to;
  std::size_t points = 0;
  std::vector<double> grid;
  sweep->add_option("--axis", axis, "field or temperature")->check(CLI::IsMember({"field", "temperature"}));
  sweep->add_option("--from", from, "First grid value (G or uK)");
  sweep->add_option("--to", to, "Last grid value (G or uK)");
  sweep->add_option("--points", points, "Number of evenly spaced grid points");
  sweep->add_option("--grid", grid, "Explicit grid values")->delimiter(',');

  auto* sim = app.add_subcommand("simulate", "Integrate the cloud rate equations");
  sim_flags.attach(*sim);

  auto* fit = app.add_subcommand("fit", "Estimate a rate constant from a CSV time series");
  fit_flags.attach(*fit);
  std::string method;
  std::string data_path;
  fit->add_option("--method", method, "i, ii, iii or beta2")->required();
  fit->add_option("--data", data_path, "CSV time series")->required();

  auto* presets = app.add_subcommand("presets", "List presets, or print one with --show");
  std::string show;
  presets->add_option("--show", show, "Scenario preset to print");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage_error;
  }

  try {
    if (*rate) {
      const RunConfig cfg = rate_flags.load();
      detail::emit(cfg, detail::rate_table(cfg), out);
    } else if (*sweep) {
      SweepSpec spec;
      spec.axis = axis == "field" ? SweepAxis::field : SweepAxis::temperature;
      if (!grid.empty()) {
        if (from || to || points) throw InvalidInput("use either --grid or --from/--to/--points");
        spec.grid = grid;
      } else {
        if (!from || !to || points == 0)
          throw InvalidInput("sweep needs --grid or all of --from, --to, --points");
        if (points < 2) throw InvalidInput("sweep needs at least 2 grid points");
        spec.grid = detail::linspace(*from, *to, points);
      }
      const std::vector<std::string> required =
          spec.axis == SweepAxis::field ? std::vector<std::string>{"species", "temp_uk"}
                                        : std::vector<std::string>{"species", "field_gauss"};
      const RunConfig cfg = sweep_flags.load(required);
      detail::emit(cfg, sweep_table(cfg, spec), out);
    } else if (*sim) {
      const RunConfig cfg = sim_flags.load();
      detail::emit(cfg, simulate_table(cfg), out);
    } else if (*fit) {
      const RunConfig cfg = fit_flags.load({});
      const TimeSeries data = csv::parse_timeseries_csv(data_path);
      const FitReport report = run_fit(cfg, method, data);
      out << fit_key_values(report);
      if (!cfg.output.empty()) {
        std::ofstream f(cfg.output, std::ios::binary);
        if (!f) throw InvalidInput("cannot write '" + cfg.output + "'");
        f << fit_csv(report);
      }
    } else if (*presets) {
      if (show.empty()) out << presets_listing();
      else out << scenario_preset(show).text;
    }
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return usage_error;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << '\n';
    return numerical_failure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return numerical_failure;
  }
  return ok;
}

}  // namespace dipolar::cli
