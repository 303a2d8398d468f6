#include <catch_amalgamated.hpp>

#include <cmath>

#include "dipolar/thermal.hpp"

using namespace dipolar;
using Catch::Matchers::WithinRel;

namespace {

struct Ref {
  double field_g, temp_uk, beta_event_cm3s, beta_loss_cm3s;
};

// scipy.integrate.quad at rel 1e-12
constexpr Ref refs[] = {
    {27, 275, 2.580679187743e-11, 1.720100448038e-11}, {44, 275, 3.420955678237e-11, 2.273639532528e-11},
    {0.7, 50, 3.182630820333e-12, 2.140062501374e-12}, {1, 50, 4.021822534479e-12, 2.705392591836e-12},
    {0, 50, 8.669244028924e-13, 5.418277518077e-13},   {10, 10, 1.734070540296e-11, 1.146324228247e-11},
    {50, 10, 3.919874330759e-11, 2.588564524960e-11},  {5, 1000, 7.703631447560e-12, 5.111167253315e-12},
};

}  // namespace

TEST_CASE("rate coefficients match the independent quadrature") {
  const auto cr = species::chromium52();
  for (const auto& r : refs) {
    INFO("B=" << r.field_g << " G, T=" << r.temp_uk << " uK");
    const ThermalConditions c{microkelvin(r.temp_uk), gauss(r.field_g)};
    // 96-point rule truncation stays below 5e-5 for every Delta E / kT.
    CHECK_THAT(beta_event_rate(cr, c), WithinRel(cm3_per_s(r.beta_event_cm3s), 5e-5));
    CHECK_THAT(beta_loss_rate(cr, c), WithinRel(cm3_per_s(r.beta_loss_cm3s), 5e-5));
  }
}

TEST_CASE("Gauss-Laguerre agrees with adaptive Gauss-Kronrod across the working range") {
  const auto cr = species::chromium52();
  for (double b : {0.0, 0.15, 0.7, 3.0, 27.0, 100.0}) {
    for (double t : {1.0, 10.0, 50.0, 275.0, 10000.0}) {
      const ThermalConditions c{microkelvin(t), gauss(b)};
      const auto ref = thermal_average_adaptive(cr, c, {0.0, 1.0, 2.0});
      INFO("B=" << b << " T=" << t);
      CHECK(ref.error <= 1e-10 * ref.value);
      CHECK_THAT(thermal_average(cr, c, {0.0, 1.0, 2.0}), WithinRel(ref.value, 5e-5));
    }
  }
}

TEST_CASE("zero field rates factor into cross section times mean speed") {
  const auto cr = species::chromium52();
  const double t = 50e-6;
  const auto xs = cross_sections(cr, CollisionKinematics::from_energy(1e-28, cr), 0.0);
  const double v = mean_relative_speed(t, cr);
  const auto ref = thermal_average_adaptive(cr, {t, 0.0}, {0.0, 1.0, 2.0});
  CHECK_THAT(ref.value, WithinRel((xs.sigma1 + 2.0 * xs.sigma2) * v, 1e-11));
  const auto r = rate_coefficients(cr, {t, 0.0});
  CHECK_THAT(r.beta_event / r.beta_loss, WithinRel(8.0 / 5.0, 5e-5));
  CHECK_THAT(r.beta_elastic, WithinRel(xs.sigma0 * v, 5e-5));
}

TEST_CASE("mean relative speed") {
  CHECK_THAT(mean_relative_speed(275e-6, species::chromium52()), WithinRel(0.47350, 1e-4));
}

TEST_CASE("event to loss ratio stays near 3/2 at high field") {
  const auto cr = species::chromium52();
  for (double b : {17.0, 27.0, 52.0}) {
    const auto r = rate_coefficients(cr, {275e-6, gauss(b)});
    CHECK(r.beta_event / r.beta_loss > 1.49);
    CHECK(r.beta_event / r.beta_loss < 1.51);
  }
}

TEST_CASE("isotope ratio is the mass ratio to the 3/2 power") {
  const double m_ratio = species::chromium50().mass / species::chromium52().mass;
  for (double t : {10e-6, 275e-6, 1e-3}) {
    const ThermalConditions c{t, gauss(20.0)};
    CHECK_THAT(beta_loss_rate(species::chromium50(), c) / beta_loss_rate(species::chromium52(), c),
               WithinRel(std::pow(m_ratio, 1.5), 1e-10));
  }
}

TEST_CASE("rates increase with field") {
  const auto cr = species::chromium52();
  double prev = 0.0;
  for (double b = 0.0; b <= 60.0; b += 1.0) {
    const double r = beta_loss_rate(cr, {50e-6, gauss(b)});
    CHECK(r > prev);
    prev = r;
  }
}

TEST_CASE("thermal conditions are validated") {
  const auto cr = species::chromium52();
  CHECK_THROWS_AS(beta_loss_rate(cr, {0.0, 1e-4}), InvalidInput);
  CHECK_THROWS_AS(beta_loss_rate(cr, {1e-4, -1e-4}), InvalidInput);
  CHECK(thermal_average(cr, {1e-4, 1e-4}, {0.0, 0.0, 0.0}) == 0.0);
}
