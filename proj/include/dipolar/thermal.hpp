#pragma once

/// Thermal averages of sigma * v_rel over a Maxwell-Boltzmann gas.
///
/// The relative motion of two atoms of mass m at temperature T is a
/// Maxwell-Boltzmann gas of reduced mass m/2. Its kinetic energy
/// E = hbar^2 k^2 / m is distributed as sqrt(E) exp(-E/kT), and
/// v_rel = sqrt(4E/m). With x = E/kT,
///
///   <sigma v> = sqrt(4kT/m) / Gamma(3/2) * int_0^inf x^{1/2} e^{-x} sqrt(x) sigma(x kT) dx
///
/// which reproduces <v_rel> = sqrt(16 kT / (pi m)) for constant sigma. The
/// near-threshold enhancement k_f/k_i ~ x^{-1/2} makes sqrt(x) sigma smooth, so a
/// generalized Gauss-Laguerre rule with alpha = 1/2 converges quickly.

#include <cmath>
#include <numbers>

#include "dipolar/born.hpp"
#include "dipolar/channels.hpp"
#include "dipolar/errors.hpp"
#include "dipolar/quadrature.hpp"
#include "dipolar/units.hpp"

namespace dipolar {

struct ThermalConditions {
  double temperature;  // K
  double field;        // T

  void validate() const {
    if (!(temperature > 0.0) || !std::isfinite(temperature))
      throw InvalidInput("temperature must be > 0");
    if (!(field >= 0.0) || !std::isfinite(field)) throw InvalidInput("magnetic field must be >= 0");
  }
};

/// Per-channel multipliers w_c in <sum_c w_c sigma_c v_rel>.
struct ChannelWeights {
  double sigma0 = 0.0;
  double sigma1 = 0.0;
  double sigma2 = 0.0;
};

struct RateCoefficients {
  double beta_event;    // 2 <(s1 + s2) v>, m^3/s
  double beta_loss;     // <(s1 + 2 s2) v>, m^3/s
  double beta_elastic;  // <s0 v>, m^3/s
};

inline constexpr int thermal_quadrature_order = 96;

inline double mean_relative_speed(double temperature, const SpeciesConfig& s) {
  if (!(temperature >= 0.0)) throw InvalidInput("temperature must be >= 0");
  return std::sqrt(16.0 * constants.boltzmann * temperature / (std::numbers::pi * s.mass));
}

namespace detail {

inline const quadrature::Rule& thermal_rule() {
  static const quadrature::Rule rule = quadrature::gauss_laguerre(thermal_quadrature_order, 0.5);
  return rule;
}

// sqrt(x) * sum_c w_c sigma_c(x kT); finite at x = 0.
inline double reduced_integrand(const SpeciesConfig& s, const ThermalConditions& c,
                                const ChannelWeights& w, double x) {
  const double kT = constants.boltzmann * c.temperature;
  if (x == 0.0) {
    // sigma_n ~ k_f/k_i ~ sqrt(n dE / E): sqrt(x) sigma_n -> const, h -> 1.
    const double dE = zeeman_splitting(s, c.field);
    if (dE == 0.0) return 0.0;
    const double pref = 8.0 * std::numbers::pi / 15.0 * coupling_prefactor(s) * 2.0;
    const double S = s.spin;
    const double d = dE / kT;
    return pref * (w.sigma1 * S * S * S * std::sqrt(d) + w.sigma2 * S * S * std::sqrt(2.0 * d));
  }
  const auto xs = cross_sections(s, CollisionKinematics::from_energy(x * kT, s), c.field);
  return std::sqrt(x) * (w.sigma0 * xs.sigma0 + w.sigma1 * xs.sigma1 + w.sigma2 * xs.sigma2);
}

inline double speed_scale(const SpeciesConfig& s, const ThermalConditions& c) {
  // sqrt(4kT/m) / Gamma(3/2)
  return std::sqrt(4.0 * constants.boltzmann * c.temperature / s.mass) * 2.0 /
         std::sqrt(std::numbers::pi);
}

}  // namespace detail

/// <sum_c w_c sigma_c v_rel> in m^3/s by 96-point Gauss-Laguerre.
inline double thermal_average(const SpeciesConfig& s, const ThermalConditions& c,
                              const ChannelWeights& w) {
  s.validate();
  c.validate();
  if (w.sigma0 == 0.0 && w.sigma1 == 0.0 && w.sigma2 == 0.0) return 0.0;
  const auto& rule = detail::thermal_rule();
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    sum += rule.weights[i] * detail::reduced_integrand(s, c, w, rule.nodes[i]);
  if (!std::isfinite(sum)) throw NumericalFailure("thermal average is not finite");
  return detail::speed_scale(s, c) * sum;
}

/// Same average by adaptive Gauss-Kronrod in u = sqrt(x); cross-check for the
/// fixed-order rule. Throws NumericalFailure with the achieved error estimate.
inline quadrature::Estimate thermal_average_adaptive(const SpeciesConfig& s,
                                                     const ThermalConditions& c,
                                                     const ChannelWeights& w,
                                                     double rel_tol = 1e-11) {
  s.validate();
  c.validate();
  if (w.sigma0 == 0.0 && w.sigma1 == 0.0 && w.sigma2 == 0.0) return {0.0, 0.0};
  // x = u^2: x^{1/2} e^{-x} dx = 2 u^2 e^{-u^2} du. e^{-u^2} < 1e-40 past u = 9.6.
  auto f = [&](double u) {
    return 2.0 * u * u * std::exp(-u * u) * detail::reduced_integrand(s, c, w, u * u);
  };
  auto est = quadrature::adaptive_gauss_kronrod(f, 0.0, 9.6, rel_tol);
  const double scale = detail::speed_scale(s, c);
  return {est.value * scale, est.error * scale};
}

inline double beta_event_rate(const SpeciesConfig& s, const ThermalConditions& c) {
  return 2.0 * thermal_average(s, c, {0.0, 1.0, 1.0});
}

inline double beta_loss_rate(const SpeciesConfig& s, const ThermalConditions& c) {
  return thermal_average(s, c, {0.0, 1.0, 2.0});
}

inline RateCoefficients rate_coefficients(const SpeciesConfig& s, const ThermalConditions& c) {
  return {beta_event_rate(s, c), beta_loss_rate(s, c), thermal_average(s, c, {1.0, 0.0, 0.0})};
}

}  // namespace dipolar
