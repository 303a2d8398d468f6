#pragma once

/// Physical constants (CODATA 2018, SI) and conversions between the
/// laboratory units used at the I/O boundary and coherent SI.
///
/// Everything inside the library is SI. Lab units (G, uK, cm^3/s, ...) only
/// appear when parsing configs and CSV files or when printing results.

#include <array>
#include <numbers>
#include <string>
#include <string_view>

#include "dipolar/errors.hpp"

namespace dipolar {

struct PhysicalConstants {
  double bohr_magneton;              // J/T
  double boltzmann;                  // J/K
  double planck;                     // J s
  double hbar;                       // J s
  double electron_mass;              // kg
  double classical_electron_radius;  // m
  double vacuum_permeability;        // T^2 m^3 / J  (= N/A^2)
  double atomic_mass_unit;           // kg
};

inline constexpr PhysicalConstants codata2018{
    .bohr_magneton = 9.2740100783e-24,
    .boltzmann = 1.380649e-23,
    .planck = 6.62607015e-34,
    .hbar = 6.62607015e-34 / (2.0 * std::numbers::pi),
    .electron_mass = 9.1093837015e-31,
    .classical_electron_radius = 2.8179403262e-15,
    .vacuum_permeability = 1.25663706212e-6,
    .atomic_mass_unit = 1.66053906660e-27,
};

inline constexpr const PhysicalConstants& constants = codata2018;

enum class Unit {
  // magnetic field
  tesla,
  gauss,
  // temperature
  kelvin,
  millikelvin,
  microkelvin,
  // frequency
  hertz,
  kilohertz,
  megahertz,
  // time
  second,
  millisecond,
  // length
  meter,
  micrometer,
  // mass
  kilogram,
  atomic_mass_unit,
  // energy
  joule,
  // volume
  cubic_meter,
  cubic_centimeter,
  // number density
  per_cubic_meter,
  per_cubic_centimeter,
  // two-body rate coefficient
  cubic_meter_per_second,
  cubic_centimeter_per_second,
};

struct Quantity {
  double value;
  Unit unit;
};

namespace detail {

struct UnitInfo {
  Unit unit;
  std::string_view symbol;
  double to_si;  // multiply by this to get SI
};

inline constexpr std::array<UnitInfo, 21> unit_table{{
    {Unit::tesla, "T", 1.0},
    {Unit::gauss, "G", 1e-4},
    {Unit::kelvin, "K", 1.0},
    {Unit::millikelvin, "mK", 1e-3},
    {Unit::microkelvin, "uK", 1e-6},
    {Unit::hertz, "Hz", 1.0},
    {Unit::kilohertz, "kHz", 1e3},
    {Unit::megahertz, "MHz", 1e6},
    {Unit::second, "s", 1.0},
    {Unit::millisecond, "ms", 1e-3},
    {Unit::meter, "m", 1.0},
    {Unit::micrometer, "um", 1e-6},
    {Unit::kilogram, "kg", 1.0},
    {Unit::atomic_mass_unit, "u", codata2018.atomic_mass_unit},
    {Unit::joule, "J", 1.0},
    {Unit::cubic_meter, "m3", 1.0},
    {Unit::cubic_centimeter, "cm3", 1e-6},
    {Unit::per_cubic_meter, "m-3", 1.0},
    {Unit::per_cubic_centimeter, "cm-3", 1e6},
    {Unit::cubic_meter_per_second, "m3/s", 1.0},
    {Unit::cubic_centimeter_per_second, "cm3/s", 1e-6},
}};

inline const UnitInfo& lookup(Unit u) {
  for (const auto& info : unit_table)
    if (info.unit == u) return info;
  throw InvalidInput("unsupported unit tag " + std::to_string(static_cast<int>(u)));
}

}  // namespace detail

/// Parses a unit symbol such as "G", "uK" or "cm3/s".
inline Unit parse_unit(std::string_view symbol) {
  for (const auto& info : detail::unit_table)
    if (info.symbol == symbol) return info.unit;
  throw InvalidInput("unknown unit '" + std::string(symbol) + "'");
}

inline std::string_view unit_symbol(Unit u) { return detail::lookup(u).symbol; }

inline double to_si(Quantity q) { return q.value * detail::lookup(q.unit).to_si; }

inline Quantity from_si(double value, Unit target) {
  return {value / detail::lookup(target).to_si, target};
}

// Shorthands used at the I/O boundary.
inline double gauss(double g) { return to_si({g, Unit::gauss}); }
inline double microkelvin(double uk) { return to_si({uk, Unit::microkelvin}); }
inline double cm3_per_s(double v) { return to_si({v, Unit::cubic_centimeter_per_second}); }
inline double per_cm3(double n) { return to_si({n, Unit::per_cubic_centimeter}); }

}  // namespace dipolar
