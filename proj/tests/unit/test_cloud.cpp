#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "dipolar/cloud.hpp"

using namespace dipolar;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const TrapConfig trap27{120.0, 120.0, 73.0, gauss(27.0), 0.0};
const TrapConfig trap07{806.0, 806.0, 42.0, gauss(0.7), 0.0};

std::vector<double> grid(double t_end, int n) {
  std::vector<double> g;
  for (int i = 0; i <= n; ++i) g.push_back(t_end * i / n);
  return g;
}

}  // namespace

TEST_CASE("Gaussian widths and mean volume") {
  const auto cr = species::chromium52();
  const auto w = gaussian_widths(275e-6, trap27, cr);
  const double omega = 2.0 * std::numbers::pi * 120.0;
  CHECK_THAT(w.x, WithinRel(std::sqrt(constants.boltzmann * 275e-6 / (cr.mass * omega * omega)), 1e-14));
  CHECK_THAT(mean_volume(w), WithinRel(std::sqrt(8.0) * std::pow(2.0 * std::numbers::pi, 1.5) * w.x * w.y * w.z, 1e-14));
  // V scales as T^{3/2}
  CHECK_THAT(mean_volume(gaussian_widths(4.0 * 275e-6, trap27, cr)), WithinRel(8.0 * mean_volume(w), 1e-13));
  CHECK_THAT(thermalized_volume_ms2(1.0), WithinRel(std::pow(1.5, 1.5), 1e-15));
}

TEST_CASE("trap validation") {
  CHECK_THROWS_AS((TrapConfig{0.0, 1.0, 1.0, 0.0, 0.0}.validate()), InvalidInput);
  CHECK_THROWS_AS((TrapConfig{1.0, 1.0, 1.0, 0.0, -1.0}.validate()), InvalidInput);
}

TEST_CASE("analytic two-body decay limits") {
  CHECK_THAT(analytic_two_body_decay(100.0, 0.0, 0.01, 1.0), WithinRel(50.0, 1e-15));
  CHECK_THAT(analytic_two_body_decay(100.0, 0.1, 0.0, 2.0), WithinRel(100.0 * std::exp(-0.2), 1e-14));
  // tiny gamma continues smoothly into the gamma = 0 formula
  CHECK_THAT(analytic_two_body_decay(100.0, 1e-14, 0.01, 1.0), WithinRel(50.0, 1e-12));
}

TEST_CASE("rf-shield evolution follows the closed form") {
  const auto cr = species::chromium52();
  for (double gamma : {0.0, 0.005}) {
    TrapConfig trap = trap27;
    trap.background_rate = gamma;
    const CloudState c0 = initial_state(per_cm3(1e11), 275e-6, 1.0, trap, cr);
    const double beta = cm3_per_s(2.58e-11);
    const auto g = grid(100.0, 100);
    const auto traj = evolve(c0, trap, cr, EvolutionMode::rf_shield, {beta, beta, 0.0}, g);
    const double v = cloud_volume(c0, trap, cr);
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK_THAT(traj[i].n3, WithinRel(analytic_two_body_decay(c0.n3, gamma, beta / v, g[i]), 1e-6));
      CHECK(traj[i].temperature == c0.temperature);
    }
  }
}

TEST_CASE("free evolution conserves atoms without background loss") {
  const auto cr = species::chromium52();
  const CloudState c0 = initial_state(per_cm3(6e10), 50e-6, 1.0, trap07, cr);
  const auto traj = evolve(c0, trap07, cr, EvolutionMode::free_evolution,
                           {0.0, cm3_per_s(2.14e-12), cm3_per_s(1.1e-10)}, grid(15.0, 30));
  for (const auto& c : traj) {
    CHECK_THAT(c.total(), WithinRel(c0.total(), 1e-8));
    CHECK(c.n1 >= -1e-6 * c0.total());
    CHECK(c.n2 >= 0.0);
  }
  CHECK(traj.back().temperature > c0.temperature);
}

TEST_CASE("redistribution at 0.7 G matches the independent integration") {
  // scipy solve_ivp of the same rate equations, theory beta_loss
  const auto cr = species::chromium52();
  const double beta = beta_loss_rate(cr, {50e-6, gauss(0.7)});
  const struct {
    double n0_cm3, loss;
  } refs[] = {{1e10, 0.23}, {2e10, 0.36}, {3e10, 0.45}, {6e10, 0.60}};
  for (const auto& r : refs) {
    const CloudState c0 = initial_state(per_cm3(r.n0_cm3), 50e-6, 1.0, trap07, cr);
    const auto traj = evolve(c0, trap07, cr, EvolutionMode::free_evolution,
                             {0.0, beta, cm3_per_s(1.1e-10)}, {0.0, 15.0});
    CHECK_THAT(1.0 - traj.back().n3 / c0.n3, WithinAbs(r.loss, 0.006));
  }
}

TEST_CASE("initial heating rates") {
  const auto cr = species::chromium52();
  const CloudState low = initial_state(per_cm3(6e10), 50e-6, 1.0, trap07, cr);
  CHECK_THAT(initial_heating_rate(low, trap07, cr, beta_loss_rate(cr, {50e-6, gauss(0.7)})),
             WithinRel(2.01e-6, 5e-3));
  const CloudState high = initial_state(per_cm3(1e11), 275e-6, 1.0, trap27, cr);
  CHECK_THAT(initial_heating_rate(high, trap27, cr, beta_loss_rate(cr, {275e-6, gauss(27.0)})),
             WithinRel(1040e-6, 5e-3));
}

TEST_CASE("zero rates leave the cloud unchanged") {
  const auto cr = species::chromium52();
  const CloudState c0 = initial_state(per_cm3(1e10), 50e-6, 0.8, trap07, cr);
  const auto traj = evolve(c0, trap07, cr, EvolutionMode::free_evolution, {0.0, 0.0, 0.0}, grid(5.0, 5));
  for (const auto& c : traj) {
    CHECK(c.n3 == c0.n3);
    CHECK(c.n2 == c0.n2);
    CHECK_THAT(c.n1, WithinRel(c0.n1, 1e-12));
    CHECK(c.temperature == c0.temperature);
  }
}

TEST_CASE("self-consistent rates track the heating") {
  const auto cr = species::chromium52();
  const CloudState c0 = initial_state(per_cm3(1e11), 275e-6, 1.0, trap27, cr);
  const RateInputs r{0.0, beta_loss_rate(cr, {275e-6, gauss(27.0)}), 0.0};
  EvolveOptions frozen, live;
  live.rate_update = RateUpdate::self_consistent;
  const auto a = evolve(c0, trap27, cr, EvolutionMode::free_evolution, r, {0.0, 1.0}, frozen);
  const auto b = evolve(c0, trap27, cr, EvolutionMode::free_evolution, r, {0.0, 1.0}, live);
  CHECK(b.back().temperature > c0.temperature);
  CHECK(b.back().n3 != a.back().n3);
}

TEST_CASE("rf shield conditions") {
  const auto cr = species::chromium52();
  const double b = gauss(27.0);
  const double dE = zeeman_splitting(cr, b);
  const auto def = rf_shield_check(1.0, b, 275e-6, cr);
  CHECK_THAT(def.removal_threshold_hz, WithinRel(7.0 * dE / (6.0 * constants.planck), 1e-14));
  const auto r = rf_shield_check(def.default_frequency_hz, b, 275e-6, cr);
  CHECK(r.removal_ok);
  CHECK_THAT(r.eta, WithinRel(3.0 * (constants.planck * r.default_frequency_hz - dE) /
                                  (constants.boltzmann * 275e-6), 1e-12));
  CHECK_FALSE(rf_shield_check(def.removal_threshold_hz, b, 275e-6, cr).removal_ok);
  // eta = 5 exactly sits on the allowed side
  const double nu5 = (5.0 * constants.boltzmann * 275e-6 / 3.0 + dE) / constants.planck;
  CHECK(rf_shield_check(nu5, b, 275e-6, cr).non_evaporation_ok);
  CHECK_FALSE(rf_shield_check(nu5 * 0.999, b, 275e-6, cr).non_evaporation_ok);
}

TEST_CASE("initial state splits the unpolarized remainder") {
  const auto cr = species::chromium52();
  const CloudState c = initial_state(per_cm3(1e10), 50e-6, 0.9, trap07, cr);
  CHECK_THAT(c.n3 / c.total(), WithinRel(0.9, 1e-14));
  CHECK_THAT(c.n2, WithinRel(c.n1, 1e-14));
  CHECK_THROWS_AS(initial_state(per_cm3(1e10), 50e-6, 1.2, trap07, cr), InvalidInput);
}
