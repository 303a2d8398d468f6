#pragma once

/// Rate-equation model of a magnetically trapped cloud under dipolar
/// relaxation, background loss and (optionally) an rf shield.
///
/// Densities use the mean-volume convention n = N / V, with
/// V = sqrt(8) (2 pi)^{3/2} sigma_x sigma_y sigma_z the two-body collision
/// volume of a Gaussian cloud.

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "dipolar/channels.hpp"
#include "dipolar/errors.hpp"
#include "dipolar/ode.hpp"
#include "dipolar/thermal.hpp"
#include "dipolar/units.hpp"

namespace dipolar {

struct TrapConfig {
  double freq_x;           // Hz
  double freq_y;           // Hz
  double freq_z;           // Hz
  double offset_field;     // T
  double background_rate;  // 1/s

  void validate() const {
    if (!(freq_x > 0.0 && freq_y > 0.0 && freq_z > 0.0))
      throw InvalidInput("trap frequencies must be > 0");
    if (!(offset_field >= 0.0)) throw InvalidInput("offset field must be >= 0");
    if (!(background_rate >= 0.0)) throw InvalidInput("background rate must be >= 0");
  }
};

struct CloudState {
  double n3 = 0.0;  // atoms in m_S = S (stretched)
  double n2 = 0.0;  // m_S = S - 1
  double n1 = 0.0;  // m_S = S - 2
  double temperature = 0.0;  // K
  double time = 0.0;         // s

  double total() const { return n1 + n2 + n3; }
};

enum class EvolutionMode { rf_shield, free_evolution };

/// Rates used by evolve(). beta2 lumps spin exchange and relaxation of the
/// m_S = S-1 population.
struct RateInputs {
  double beta_event = 0.0;  // m^3/s
  double beta_loss = 0.0;   // m^3/s
  double beta2 = 0.0;       // m^3/s
};

enum class RateUpdate {
  frozen,           // rates fixed at their t = 0 values
  self_consistent,  // beta_event / beta_loss re-evaluated from the current T
};

struct EvolveOptions {
  double rtol = 1e-9;
  RateUpdate rate_update = RateUpdate::frozen;
};

struct Widths {
  double x, y, z;  // m
};

inline Widths gaussian_widths(double temperature, const TrapConfig& trap, const SpeciesConfig& s) {
  if (!(temperature > 0.0)) throw InvalidInput("temperature must be > 0");
  auto width = [&](double nu) {
    const double omega = 2.0 * std::numbers::pi * nu;
    return std::sqrt(constants.boltzmann * temperature / (s.mass * omega * omega));
  };
  return {width(trap.freq_x), width(trap.freq_y), width(trap.freq_z)};
}

inline double mean_volume(const Widths& w) {
  if (!(w.x > 0.0 && w.y > 0.0 && w.z > 0.0)) throw InvalidInput("widths must be > 0");
  return std::sqrt(8.0) * std::pow(2.0 * std::numbers::pi, 1.5) * w.x * w.y * w.z;
}

/// Mean volume of the thermalized m_S = S-1 cloud: its magnetic moment is
/// (S-1)/S = 2/3 of the stretched one for Cr, so each width grows by sqrt(3/2).
inline double thermalized_volume_ms2(double stretched_volume) {
  return std::pow(1.5, 1.5) * stretched_volume;
}

/// Closed-form solution of dN/dt = -gamma N - (beta/V) N^2 at constant V.
inline double analytic_two_body_decay(double n0, double gamma, double beta_over_volume, double t) {
  if (n0 < 0.0 || gamma < 0.0 || beta_over_volume < 0.0 || t < 0.0)
    throw InvalidInput("analytic_two_body_decay parameters must be >= 0");
  if (gamma == 0.0) return n0 / (1.0 + beta_over_volume * n0 * t);
  const double decay = std::exp(-gamma * t);
  // 1 - e^{-gamma t} via expm1 to keep small gamma t accurate
  const double loaded = -std::expm1(-gamma * t);
  return gamma * n0 * decay / (gamma + beta_over_volume * n0 * loaded);
}

struct RfShieldReport {
  double zeeman_energy;            // J
  double removal_threshold_hz;     // (2S+1) Delta E / (2S h)
  double removal_lhs;              // m_J (h nu - Delta E), J
  double removal_rhs;              // Delta E / 2, J
  bool removal_ok;                 // m_J (h nu - Delta E) < Delta E / 2 with m_J = S
  double eta;                      // S (h nu - Delta E) / (k_B T)
  bool non_evaporation_ok;         // eta >= 5
  double default_frequency_hz;     // 7 Delta E / (6 h) - 1 MHz for S = 3
};

inline constexpr double rf_cutoff_threshold = 5.0;

inline RfShieldReport rf_shield_check(double rf_frequency, double field, double temperature,
                                      const SpeciesConfig& s) {
  if (!(rf_frequency > 0.0)) throw InvalidInput("rf frequency must be > 0");
  if (!(temperature > 0.0)) throw InvalidInput("temperature must be > 0");
  const double h = constants.planck;
  const double dE = zeeman_splitting(s, field);
  const double S = s.spin;
  RfShieldReport r{};
  r.zeeman_energy = dE;
  r.removal_threshold_hz = (2.0 * S + 1.0) * dE / (2.0 * S * h);
  r.removal_lhs = S * (h * rf_frequency - dE);
  r.removal_rhs = dE / 2.0;
  // Same inequality, rearranged to nu < (2S+1) dE / (2S h) so the boundary is exact.
  r.removal_ok = rf_frequency < r.removal_threshold_hz;
  r.eta = r.removal_lhs / (constants.boltzmann * temperature);
  r.non_evaporation_ok = r.eta >= rf_cutoff_threshold * (1.0 - 1e-12);
  r.default_frequency_hz = r.removal_threshold_hz - 1e6;
  return r;
}

namespace detail {

struct CloudModel {
  const TrapConfig& trap;
  const SpeciesConfig& species;
  EvolutionMode mode;
  RateInputs rates;
  RateUpdate update;
  double temperature_step;

  double volume(double temperature) const {
    return mean_volume(gaussian_widths(temperature, trap, species));
  }

  double loss_rate(double temperature) const {
    if (update == RateUpdate::frozen) return rates.beta_loss;
    return beta_loss_rate(species, {temperature, trap.offset_field});
  }

  double event_rate(double temperature) const {
    if (update == RateUpdate::frozen) return rates.beta_event;
    return beta_event_rate(species, {temperature, trap.offset_field});
  }
};

}  // namespace detail

/// Integrates the cloud from `initial` over `t_grid` (t_grid.front() must
/// equal initial.time).
///
/// rf_shield: dN3/dt = -g N3 - beta_event N3^2/V, T and V constant; the
///   m_S = S-1 and S-2 populations only see background loss.
/// free_evolution: dN3/dt = -g N3 - beta_loss N3^2/V,
///   dT/dt = beta_loss (N3/V) dT_step,
///   dN2/dt = beta_loss N3^2/V - beta2 N2^2/V2 - g N2,
///   N_tot decays with g only and N1 = N_tot - N2 - N3.
inline std::vector<CloudState> evolve(const CloudState& initial, const TrapConfig& trap,
                                      const SpeciesConfig& s, EvolutionMode mode,
                                      const RateInputs& rates, const std::vector<double>& t_grid,
                                      const EvolveOptions& opt = {}) {
  trap.validate();
  s.validate();
  if (t_grid.empty()) return {};
  if (t_grid.front() != initial.time)
    throw InvalidInput("time grid must start at the initial state time");
  if (!(initial.temperature > 0.0)) throw InvalidInput("initial temperature must be > 0");
  if (initial.n3 < 0.0 || initial.n2 < 0.0 || initial.n1 < 0.0)
    throw InvalidInput("atom numbers must be >= 0");
  if (rates.beta_event < 0.0 || rates.beta_loss < 0.0 || rates.beta2 < 0.0)
    throw InvalidInput("rate coefficients must be >= 0");

  const detail::CloudModel model{trap, s, mode, rates, opt.rate_update,
                                 temperature_step(s, trap.offset_field)};
  const double gamma = trap.background_rate;
  std::vector<CloudState> out;
  out.reserve(t_grid.size());

  // State: N3, N2, N_tot, T
  ode::State<4> y0{initial.n3, initial.n2, initial.total(), initial.temperature};
  const double atom_scale = std::max(initial.total(), 1.0);
  ode::Options ode_opt;
  ode_opt.rtol = opt.rtol;
  ode_opt.atol = opt.rtol * 1e-6 * atom_scale;

  std::vector<ode::State<4>> traj;
  if (mode == EvolutionMode::rf_shield) {
    const double v = model.volume(initial.temperature);
    const double beta = model.event_rate(initial.temperature);
    auto rhs = [&](double, const ode::State<4>& y) {
      const double n3 = std::max(y[0], 0.0);
      const double dn3 = -gamma * n3 - beta * n3 * n3 / v;
      // Shield ejects the relaxation products; the other levels only decay.
      const double others = y[2] - y[0];
      return ode::State<4>{dn3, -gamma * y[1], dn3 - gamma * others, 0.0};
    };
    traj = ode::integrate<4>(rhs, y0, t_grid, ode_opt);
  } else {
    auto rhs = [&](double, const ode::State<4>& y) {
      const double n3 = std::max(y[0], 0.0);
      const double n2 = std::max(y[1], 0.0);
      const double temp = y[3];
      if (!(temp > 0.0)) throw NumericalFailure("temperature left the physical range");
      const double v = model.volume(temp);
      const double v2 = thermalized_volume_ms2(v);
      const double beta = model.loss_rate(temp);
      const double relax = beta * n3 * n3 / v;
      return ode::State<4>{-gamma * n3 - relax, relax - rates.beta2 * n2 * n2 / v2 - gamma * n2,
                           -gamma * y[2], beta * (n3 / v) * model.temperature_step};
    };
    traj = ode::integrate<4>(rhs, y0, t_grid, ode_opt);
  }

  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& y = traj[i];
    CloudState c;
    c.time = t_grid[i];
    c.n3 = y[0];
    c.n2 = y[1];
    c.n1 = y[2] - y[0] - y[1];
    c.temperature = y[3];
    out.push_back(c);
  }
  return out;
}

/// Volume of the stretched cloud at the state's temperature.
inline double cloud_volume(const CloudState& c, const TrapConfig& trap, const SpeciesConfig& s) {
  return mean_volume(gaussian_widths(c.temperature, trap, s));
}

/// Builds an initial state from a mean density n = N / V (m^-3) and a
/// polarization p: N3 = p N, the remainder split evenly over m_S = S-1, S-2.
inline CloudState initial_state(double density, double temperature, double polarization,
                                const TrapConfig& trap, const SpeciesConfig& s) {
  if (!(density >= 0.0)) throw InvalidInput("density must be >= 0");
  if (!(polarization >= 0.0 && polarization <= 1.0))
    throw InvalidInput("polarization must be in [0, 1]");
  const double n_total = density * mean_volume(gaussian_widths(temperature, trap, s));
  CloudState c;
  c.temperature = temperature;
  c.n3 = polarization * n_total;
  c.n2 = 0.5 * (1.0 - polarization) * n_total;
  c.n1 = 0.5 * (1.0 - polarization) * n_total;
  return c;
}

/// dT/dt at t = 0 in free evolution (K/s).
inline double initial_heating_rate(const CloudState& c, const TrapConfig& trap,
                                   const SpeciesConfig& s, double beta_loss) {
  return beta_loss * c.n3 / cloud_volume(c, trap, s) * temperature_step(s, trap.offset_field);
}

}  // namespace dipolar
