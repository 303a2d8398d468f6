#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "dipolar/estimators.hpp"
#include "dipolar/thermal.hpp"

using namespace dipolar;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const auto cr = species::chromium52();
const TrapConfig trap27{120.0, 120.0, 73.0, gauss(27.0), 0.005};
const TrapConfig trap07{806.0, 806.0, 42.0, gauss(0.7), 0.0};

std::vector<double> grid(double t_end, int n) {
  std::vector<double> g;
  for (int i = 0; i <= n; ++i) g.push_back(t_end * i / n);
  return g;
}

TimeSeries rf_shield_data(double beta, int n = 40) {
  const CloudState c0 = initial_state(per_cm3(1e11), 275e-6, 1.0, trap27, cr);
  return to_timeseries(evolve(c0, trap27, cr, EvolutionMode::rf_shield, {beta, beta, 0.0}, grid(2.0, n)),
                       trap27, cr);
}

TimeSeries low_field_data(double beta, double beta2, double n0_cm3 = 1.2e10, int n = 30) {
  const CloudState c0 = initial_state(per_cm3(n0_cm3), 50e-6, 1.0, trap07, cr);
  return to_timeseries(evolve(c0, trap07, cr, EvolutionMode::free_evolution, {0.0, beta, beta2},
                              grid(15.0, n)),
                       trap07, cr);
}

// Closed-form decay at constant volume, no N2 column.
TimeSeries constant_volume_data(double n0, double gamma, double beta, double v, int n) {
  TimeSeries ts;
  for (double t : grid(10.0, n)) {
    ts.times.push_back(t);
    ts.columns[Column::n3].push_back(analytic_two_body_decay(n0, gamma, beta / v, t));
  }
  return ts;
}

}  // namespace

TEST_CASE("method i recovers the injected event rate") {
  const double beta = cm3_per_s(2.58e-11);
  const auto r = fit_method_i(rf_shield_data(beta), trap27.background_rate);
  CHECK(r.converged);
  CHECK_THAT(r.value("beta_event"), WithinRel(beta, 5e-3));
  CHECK(r.model_tag == "method_i");
}

TEST_CASE("method i with a constant volume override") {
  const double v = 1e-9;
  const auto ts = constant_volume_data(1e8, 0.01, cm3_per_s(3e-11), v, 25);
  FitOptions opt;
  opt.constant_volume = v;
  CHECK_THAT(fit_method_i(ts, 0.01, opt).value("beta_event"), WithinRel(cm3_per_s(3e-11), 1e-6));
  CHECK_THROWS_AS(fit_method_i(ts, 0.01), InvalidInput);
}

TEST_CASE("method ii at constant volume is exact") {
  const double v = 4.7e-12;
  const double beta = cm3_per_s(3.1e-12);
  const auto ts = constant_volume_data(6e4, 0.0, beta, v, 30);
  FitOptions opt;
  opt.constant_volume = v;
  const auto r = fit_method_ii(ts, 0.0, opt);
  CHECK(r.has_flag("constant_volume"));
  CHECK_THAT(r.value("beta_loss"), WithinRel(beta, 5e-3));
}

TEST_CASE("method ii on heated low-field data") {
  const double beta = beta_loss_rate(cr, {50e-6, gauss(0.7)});
  const auto r = fit_method_ii(low_field_data(beta, cm3_per_s(1.1e-10)), 0.0);
  CHECK(r.has_flag("linear_volume"));
  CHECK_THAT(r.value("beta_loss"), WithinRel(beta, 0.05));
}

TEST_CASE("method ii stops once m_S = S-1 passes 25 percent") {
  const double beta = beta_loss_rate(cr, {50e-6, gauss(0.7)});
  // High density with no m_S = S-1 loss drives N2 past the limit.
  const auto ts = low_field_data(beta, 0.0, 6e10);
  const auto kept = ms2_window(ts);
  REQUIRE(kept.size() < ts.size());
  REQUIRE(kept.size() >= 3);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const double n2 = kept.at(Column::n2)[i];
    CHECK(n2 / (n2 + kept.at(Column::n3)[i] + kept.at(Column::n1)[i]) < ms2_window_fraction);
  }
  const std::size_t next = kept.size();
  const double n2 = ts.at(Column::n2)[next];
  CHECK(n2 / (n2 + ts.at(Column::n3)[next] + ts.at(Column::n1)[next]) >= ms2_window_fraction);
  const auto r = fit_method_ii(ts, 0.0);
  CHECK(r.points == kept.size());
}

TEST_CASE("method iii from the heating curve") {
  const double beta = beta_loss_rate(cr, {50e-6, gauss(0.7)});
  const auto ts = low_field_data(beta, cm3_per_s(1.1e-10));
  const auto r = fit_method_iii(ts, temperature_step(cr, gauss(0.7)));
  CHECK(r.has_flag("integrated_density"));
  CHECK_THAT(r.value("beta_loss"), WithinRel(beta, 0.05));

  // Temperature only: the initial slope with a known density.
  TimeSeries t_only;
  t_only.times = ts.times;
  t_only.columns[Column::temperature] = ts.at(Column::temperature);
  const auto head = t_only.until(2.0);
  const double n0 = ts.at(Column::n3)[0] / ts.at(Column::volume)[0];
  const auto s = fit_method_iii(head, temperature_step(cr, gauss(0.7)), {}, n0);
  CHECK(s.has_flag("initial_slope"));
  CHECK_THAT(s.value("beta_loss"), WithinRel(beta, 0.05));
}

TEST_CASE("method iii flags a flat temperature curve") {
  TimeSeries ts;
  for (int i = 0; i < 10; ++i) {
    ts.times.push_back(i);
    ts.columns[Column::temperature].push_back(50e-6);
    ts.columns[Column::n3].push_back(5e4);
    ts.columns[Column::volume].push_back(5e-12);
  }
  const auto r = fit_method_iii(ts, temperature_step(cr, gauss(0.7)));
  CHECK_THAT(r.value("beta_loss"), WithinAbs(0.0, 1e-30));
  CHECK(r.has_flag("nonpositive_slope"));
}

TEST_CASE("beta2 from the m_S = S-1 balance") {
  const double beta = beta_loss_rate(cr, {50e-6, gauss(0.7)});
  const double beta2 = cm3_per_s(1.1e-10);
  const auto r = fit_beta2(low_field_data(beta, beta2));
  CHECK_THAT(r.value("beta2"), WithinRel(beta2, 0.10));
  CHECK_THAT(r.value("beta2"), WithinRel(beta2, 2e-3));
}

TEST_CASE("beta2 without any m_S = S-1 atoms is degenerate") {
  TimeSeries ts;
  for (int i = 0; i < 5; ++i) {
    ts.times.push_back(i);
    ts.columns[Column::n3].push_back(1e4);
    ts.columns[Column::n2].push_back(0.0);
    ts.columns[Column::volume].push_back(1e-11);
  }
  CHECK_THROWS_AS(fit_beta2(ts), DegenerateFit);
}

TEST_CASE("fits ignore row order and a global time offset") {
  const double beta = cm3_per_s(2.58e-11);
  const auto ts = rf_shield_data(beta);
  TimeSeries shifted = ts;
  for (double& t : shifted.times) t += 1234.5;
  TimeSeries reversed;
  for (std::size_t i = ts.size(); i-- > 0;) {
    reversed.times.push_back(ts.times[i]);
    for (const auto& [c, v] : ts.columns) reversed.columns[c].push_back(v[i]);
  }
  const double ref = fit_method_i(ts, 0.005).value("beta_event");
  CHECK_THAT(fit_method_i(shifted, 0.005).value("beta_event"), WithinRel(ref, 1e-9));
  CHECK_THAT(fit_method_i(reversed, 0.005).value("beta_event"), WithinRel(ref, 1e-12));
}

TEST_CASE("fit window keeps the early samples") {
  const auto ts = rf_shield_data(cm3_per_s(2.58e-11));
  FitOptions opt;
  opt.window = 0.5;
  const auto r = fit_method_i(ts, 0.005, opt);
  CHECK(r.points == 11);
  opt.window = 0.01;
  CHECK_THROWS_AS(fit_method_i(ts, 0.005, opt), InsufficientData);
}

TEST_CASE("reported uncertainty shrinks as one over root n") {
  const double v = 4.7e-12;
  const double beta = cm3_per_s(3.1e-12);
  FitOptions opt;
  opt.constant_volume = v;
  auto sigma_for = [&](int n) {
    // Average over seeds to suppress the scatter of the s^2 estimate.
    double acc = 0.0;
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
      auto ts = constant_volume_data(6e4, 0.0, beta, v, n);
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> z(0.0, 1.0);
      for (double& x : ts.columns[Column::n3]) x *= 1.0 + 0.01 * z(rng);
      acc += fit_method_ii(ts, 0.0, opt).sigma("beta_loss");
    }
    return acc / 40.0;
  };
  CHECK_THAT(sigma_for(100) / sigma_for(400), WithinRel(2.0, 0.1));
}

TEST_CASE("per-point sigmas weight the fit") {
  auto ts = rf_shield_data(cm3_per_s(2.58e-11));
  ts.noise_sigma = std::vector<double>(ts.size(), 1.0);
  const auto r = fit_method_i(ts, 0.005);
  CHECK(r.converged);
  ts.noise_sigma->pop_back();
  CHECK_THROWS_AS(fit_method_i(ts, 0.005), InvalidInput);
}
