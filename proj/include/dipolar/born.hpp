#pragma once

/// Orientation-averaged Born cross sections for dipolar collisions of two
/// identical bosons prepared in the stretched state.
///
/// Kinetic energy convention: E = hbar^2 k_i^2 / m, with m the *atomic* mass
/// and k_i the relative wavevector. This is the relative-motion energy
/// (reduced mass m/2), so that k_f/k_i = sqrt(1 + n Delta E / E) for an
/// n-flip transition.

#include <cmath>
#include <limits>
#include <numbers>

#include "dipolar/channels.hpp"
#include "dipolar/errors.hpp"
#include "dipolar/units.hpp"

namespace dipolar {

/// Ratio of exchange to direct contribution as a function of x = k_f/k_i.
/// Monotone on [1, inf) from h(1) = -1/2 to h(inf) = 1.
inline double exchange_ratio_h(double x) {
  if (std::isnan(x) || x < 1.0) throw DomainError("exchange_ratio_h requires x >= 1");
  if (x == 1.0) return -0.5;
  if (std::isinf(x)) return 1.0;
  const double eps = x - 1.0;
  if (eps < 1e-4) {
    // (1-x^2)^2 / (x(1+x^2)) = 2 eps^2 (1 - eps + 3/4 eps^2 + O(eps^3))
    const double log_ratio = std::log(eps / (2.0 + eps));
    return -0.5 - 1.5 * eps * eps * (1.0 - eps + 0.75 * eps * eps) * log_ratio;
  }
  // log((1-x)^2/(1+x)^2) = 2 log((x-1)/(x+1)); log1p is accurate for large x.
  const double log_ratio = x < 3.0 ? std::log(eps / (x + 1.0)) : std::log1p(-2.0 / (x + 1.0));
  const double one_minus_x2 = -eps * (x + 1.0);
  return -0.5 - 0.375 * one_minus_x2 * one_minus_x2 / (x * (1.0 + x * x)) * 2.0 * log_ratio;
}

/// (mu_0 (g mu_B)^2 m / (4 pi hbar^2))^2 in m^2, from first principles.
/// For g = 2 this equals (m/m_e)^2 r_0^2.
inline double coupling_prefactor(const SpeciesConfig& s) {
  const double moment = s.lande_g * constants.bohr_magneton;
  const double length = constants.vacuum_permeability * moment * moment * s.mass /
                        (4.0 * std::numbers::pi * constants.hbar * constants.hbar);
  return length * length;
}

struct CollisionKinematics {
  double wavevector;      // k_i, 1/m
  double kinetic_energy;  // hbar^2 k_i^2 / m, J

  static CollisionKinematics from_energy(double energy, const SpeciesConfig& s) {
    if (!(energy >= 0.0)) throw InvalidInput("kinetic energy must be >= 0");
    return {std::sqrt(energy * s.mass) / constants.hbar, energy};
  }

  static CollisionKinematics from_wavevector(double k, const SpeciesConfig& s) {
    if (!(k >= 0.0)) throw InvalidInput("wavevector must be >= 0");
    return {k, constants.hbar * constants.hbar * k * k / s.mass};
  }
};

/// k_f/k_i for a 1- or 2-flip transition. Returns +inf for a collision at
/// zero energy with Delta E > 0; sigma * v stays finite there.
inline double wavevector_ratio(int flips, const CollisionKinematics& kin, double zeeman_energy) {
  if (flips != 1 && flips != 2) throw InvalidInput("wavevector_ratio needs flips = 1 or 2");
  if (!(zeeman_energy >= 0.0)) throw InvalidInput("Zeeman energy must be >= 0");
  if (zeeman_energy == 0.0) return 1.0;
  if (kin.kinetic_energy == 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(1.0 + flips * zeeman_energy / kin.kinetic_energy);
}

struct CrossSectionSet {
  double sigma0;  // elastic dipolar contribution, m^2
  double sigma1;  // single spin flip, m^2
  double sigma2;  // double spin flip, m^2
  double kf_over_ki_1;
  double kf_over_ki_2;
};

inline CrossSectionSet cross_sections(const SpeciesConfig& s, const CollisionKinematics& kin,
                                      double field) {
  if (s.statistics != Statistics::boson)
    throw UnsupportedStatistics("closed-form cross sections are only available for bosons ('" +
                                s.label + "')");
  const double dE = zeeman_splitting(s, field);
  const double bracket = coupling_prefactor(s);
  const double S = s.spin;
  constexpr double pi = std::numbers::pi;

  CrossSectionSet out{};
  out.kf_over_ki_1 = wavevector_ratio(1, kin, dE);
  out.kf_over_ki_2 = wavevector_ratio(2, kin, dE);
  out.sigma0 = 16.0 * pi / 45.0 * S * S * S * S * bracket * (1.0 + exchange_ratio_h(1.0));
  const double inelastic = 8.0 * pi / 15.0 * bracket;
  out.sigma1 = inelastic * S * S * S * (1.0 + exchange_ratio_h(out.kf_over_ki_1)) * out.kf_over_ki_1;
  out.sigma2 = inelastic * S * S * (1.0 + exchange_ratio_h(out.kf_over_ki_2)) * out.kf_over_ki_2;
  return out;
}

}  // namespace dipolar
