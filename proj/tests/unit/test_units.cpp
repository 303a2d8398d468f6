#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "dipolar/units.hpp"

using namespace dipolar;
using Catch::Matchers::WithinRel;

TEST_CASE("lab units convert to SI") {
  CHECK_THAT(gauss(27.0), WithinRel(27e-4, 1e-15));
  CHECK_THAT(microkelvin(50.0), WithinRel(5e-5, 1e-15));
  CHECK_THAT(cm3_per_s(2.5e-11), WithinRel(2.5e-17, 1e-15));
  CHECK_THAT(per_cm3(1e11), WithinRel(1e17, 1e-15));
  CHECK_THAT(to_si({1.0, Unit::atomic_mass_unit}), WithinRel(1.66053906660e-27, 1e-15));
  CHECK_THAT(to_si({3.0, Unit::millikelvin}), WithinRel(3e-3, 1e-15));
  CHECK_THAT(to_si({1.0, Unit::megahertz}), WithinRel(1e6, 1e-15));
}

TEST_CASE("hbar is h over 2 pi") {
  CHECK_THAT(constants.hbar * 2.0 * std::numbers::pi, WithinRel(constants.planck, 1e-15));
}

TEST_CASE("every unit round-trips through SI over 60 decades") {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> exponent(-30.0, 30.0);
  for (const auto& info : detail::unit_table) {
    for (int i = 0; i < 200; ++i) {
      const double v = std::pow(10.0, exponent(rng)) * (i % 2 ? -1.0 : 1.0);
      const Quantity back = from_si(to_si({v, info.unit}), info.unit);
      CHECK(back.unit == info.unit);
      CHECK_THAT(back.value, WithinRel(v, 4e-16));
    }
  }
}

TEST_CASE("unit symbols parse back to the same unit") {
  for (const auto& info : detail::unit_table) CHECK(parse_unit(unit_symbol(info.unit)) == info.unit);
  CHECK_THROWS_AS(parse_unit("furlong"), InvalidInput);
}
