#pragma once

/// Species description, Zeeman structure and the 0/1/2 spin-flip exit
/// channels of a stretched-state pair.

#include <array>
#include <cctype>
#include <cmath>
#include <string>
#include <string_view>

#include "dipolar/errors.hpp"
#include "dipolar/units.hpp"

namespace dipolar {

enum class Statistics : int { fermion = -1, boson = +1 };

struct SpeciesConfig {
  double spin;        // electron spin S, half-integer >= 1/2
  double lande_g;     // g_S
  double mass;        // kg
  Statistics statistics = Statistics::boson;
  std::string label;

  void validate() const {
    if (!(spin >= 0.5) || std::fmod(2.0 * spin, 1.0) != 0.0)
      throw InvalidInput("species '" + label + "': spin must be a half-integer >= 1/2");
    if (!(mass > 0.0) || !std::isfinite(mass))
      throw InvalidInput("species '" + label + "': mass must be positive");
    if (!std::isfinite(lande_g) || lande_g == 0.0)
      throw InvalidInput("species '" + label + "': lande_g must be finite and nonzero");
    if (statistics != Statistics::boson && statistics != Statistics::fermion)
      throw InvalidInput("species '" + label + "': statistics sign must be +1 or -1");
  }
};

namespace species {

inline SpeciesConfig chromium52() {
  return {3.0, 2.0, 51.9405 * constants.atomic_mass_unit, Statistics::boson, "Cr52"};
}

inline SpeciesConfig chromium50() {
  return {3.0, 2.0, 49.9460 * constants.atomic_mass_unit, Statistics::boson, "Cr50"};
}

// Metastable triplet helium-4.
inline SpeciesConfig helium_metastable() {
  return {1.0, 2.0, 4.0026 * constants.atomic_mass_unit, Statistics::boson, "He*"};
}

inline std::array<SpeciesConfig, 3> presets() {
  return {chromium52(), chromium50(), helium_metastable()};
}

/// Looks up a preset by label. Accepts "Cr52", "52Cr", "He*", "He4*" and
/// case-insensitive variants.
inline SpeciesConfig by_label(std::string_view label) {
  std::string key;
  for (char c : label) key += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (key == "cr52" || key == "52cr" || key == "cr-52") return chromium52();
  if (key == "cr50" || key == "50cr" || key == "cr-50") return chromium50();
  if (key == "he*" || key == "he4*" || key == "he-metastable" || key == "he") return helium_metastable();
  throw InvalidInput("unknown species '" + std::string(label) + "'");
}

}  // namespace species

/// Number of spins flipped in a collision of two stretched-state atoms.
struct RelaxationChannel {
  int flips;

  constexpr int released_energy_multiplier() const { return flips; }
  void validate() const {
    if (flips < 0 || flips > 2)
      throw InvalidInput("relaxation channel must flip 0, 1 or 2 spins, got " +
                         std::to_string(flips));
  }
};

inline constexpr RelaxationChannel elastic_channel{0};
inline constexpr RelaxationChannel single_flip{1};
inline constexpr RelaxationChannel double_flip{2};

/// Delta E = g_S mu_B B, field in tesla, result in joule.
inline double zeeman_splitting(const SpeciesConfig& s, double field) {
  if (!(field >= 0.0)) throw InvalidInput("magnetic field must be >= 0");
  return s.lande_g * constants.bohr_magneton * field;
}

inline double released_energy(RelaxationChannel c, const SpeciesConfig& s, double field) {
  c.validate();
  return c.released_energy_multiplier() * zeeman_splitting(s, field);
}

/// Equilibrium temperature rise per single spin flip: each partner receives
/// Delta E / 2, shared over three degrees of freedom, 3 k_B dT = Delta E / 2.
inline double temperature_step(const SpeciesConfig& s, double field) {
  return released_energy(single_flip, s, field) / (6.0 * constants.boltzmann);
}

}  // namespace dipolar
