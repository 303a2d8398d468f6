#pragma once

/// Rate-constant estimation from atom-number and temperature time series.
///
///   method i    rf-shielded decay of N3            -> beta_event
///   method ii   Stern-Gerlach decay of N3          -> beta_loss
///   method iii  heating of the cloud               -> beta_loss
///   beta2       loading/decay of the m_S = S-1 level -> beta2
///
/// All models measure time from the first retained sample, so results do not
/// depend on a global time offset or on the input row order.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dipolar/cloud.hpp"
#include "dipolar/errors.hpp"
#include "dipolar/lsq.hpp"
#include "dipolar/quadrature.hpp"
#include "dipolar/timeseries.hpp"

namespace dipolar {

using lsq::FitResult;

struct FitOptions {
  // Keep only samples with t - t_first <= window.
  std::optional<double> window;
  // Constant mean volume (m^3); overrides any volume data in the series.
  std::optional<double> constant_volume;
  lsq::Options solver{};
};

// Population fraction of m_S = S-1 above which method ii stops using data.
inline constexpr double ms2_window_fraction = 0.25;

namespace detail {

inline TimeSeries prepare(const TimeSeries& data, const FitOptions& opt, std::size_t min_points) {
  TimeSeries ts = data.sorted();
  if (opt.window && ts.size() > 0) ts = ts.until(ts.times.front() + *opt.window);
  if (ts.size() < min_points)
    throw InsufficientData("fit window holds " + std::to_string(ts.size()) +
                           " points, need at least " + std::to_string(min_points));
  return ts;
}

inline std::vector<double> elapsed(const TimeSeries& ts) {
  std::vector<double> tau(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) tau[i] = ts.times[i] - ts.times.front();
  return tau;
}

inline std::vector<double> cumulative_trapezoid(const std::vector<double>& x,
                                                const std::vector<double>& y) {
  std::vector<double> out(x.size(), 0.0);
  for (std::size_t i = 1; i < x.size(); ++i)
    out[i] = out[i - 1] + 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
  return out;
}

// K(tau_k) = int_0^tau_k e^{-gamma s} / V(s) ds, one 15-point Kronrod rule per
// sample interval.
inline std::vector<double> inverse_volume_integral(const std::vector<double>& tau, double gamma,
                                                   const std::function<double(double)>& volume) {
  std::vector<double> out(tau.size(), 0.0);
  auto f = [&](double s) { return std::exp(-gamma * s) / volume(s); };
  for (std::size_t i = 1; i < tau.size(); ++i)
    out[i] = out[i - 1] + quadrature::detail::gauss_kronrod15(f, tau[i - 1], tau[i]).value;
  return out;
}

// Piecewise-linear interpolation, flat outside the sample range.
inline std::function<double(double)> interpolant(std::vector<double> x, std::vector<double> y) {
  return [x = std::move(x), y = std::move(y)](double s) {
    if (s <= x.front()) return y.front();
    if (s >= x.back()) return y.back();
    const auto it = std::upper_bound(x.begin(), x.end(), s);
    const std::size_t i = static_cast<std::size_t>(it - x.begin());
    const double w = (s - x[i - 1]) / (x[i] - x[i - 1]);
    return y[i - 1] + w * (y[i] - y[i - 1]);
  };
}

inline std::optional<Eigen::VectorXd> point_sigmas(const TimeSeries& ts) {
  if (!ts.noise_sigma) return std::nullopt;
  return Eigen::Map<const Eigen::VectorXd>(ts.noise_sigma->data(),
                                           static_cast<Eigen::Index>(ts.size()));
}

inline Eigen::VectorXd as_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Two-body decay of N3 with a known volume history:
// 1/N = e^{gamma tau} (1/N0 + beta K(tau)).
inline FitResult fit_two_body(const TimeSeries& ts, double gamma,
                              const std::function<double(double)>& volume,
                              const std::string& beta_name, const std::string& tag,
                              const FitOptions& opt) {
  const auto tau = elapsed(ts);
  const auto& n3 = ts.at(Column::n3);
  const std::vector<double> K = inverse_volume_integral(tau, gamma, volume);
  const double n_first = n3.front();
  if (!(n_first > 0.0)) throw InvalidInput("first N3 sample must be > 0");
  const double v0 = volume(0.0);
  const double span = tau.back();

  // Two-point finite-difference start for beta.
  const double slope = (n3[1] - n3[0]) / (tau[1] - tau[0]);
  const double beta_init = std::max(0.0, -(slope + gamma * n_first) * v0 / (n_first * n_first));

  lsq::Problem problem;
  problem.names = {"N0", beta_name};
  problem.observed = as_vector(n3);
  problem.sigmas = point_sigmas(ts);
  problem.initial = Eigen::Vector2d(n_first, beta_init);
  problem.scale = Eigen::Vector2d(n_first, v0 / (n_first * span));
  problem.model = [tau, K, gamma](const Eigen::VectorXd& p) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(tau.size()));
    for (std::size_t i = 0; i < tau.size(); ++i)
      out[static_cast<Eigen::Index>(i)] = std::exp(-gamma * tau[i]) / (1.0 / p[0] + p[1] * K[i]);
    return out;
  };
  FitResult r = lsq::nonlinear_least_squares(problem, opt.solver);
  r.model_tag = tag;
  return r;
}

}  // namespace detail

/// Method i: fits {N0, beta_event} to dN3/dt = -gamma N3 - beta_event N3^2 / V(t).
/// gamma is fixed. V(t) is the series' volume history (piecewise linear) or
/// opt.constant_volume.
inline FitResult fit_method_i(const TimeSeries& data, double gamma_bg, const FitOptions& opt = {}) {
  if (!(gamma_bg >= 0.0)) throw InvalidInput("background rate must be >= 0");
  const TimeSeries ts = detail::prepare(data, opt, 3);
  std::function<double(double)> volume;
  if (opt.constant_volume) {
    const double v = *opt.constant_volume;
    if (!(v > 0.0)) throw InvalidInput("constant volume must be > 0");
    volume = [v](double) { return v; };
  } else if (auto series = volume_series(ts)) {
    volume = detail::interpolant(detail::elapsed(ts), *series);
  } else {
    throw InvalidInput("method i needs a volume column, width columns or a constant volume");
  }
  return detail::fit_two_body(ts, gamma_bg, volume, "beta_event", "method_i", opt);
}

/// Applies the m_S = S-1 population criterion: keeps the leading rows where
/// N2 / (N1 + N2 + N3) < 25%. Series without N2 are returned unchanged.
inline TimeSeries ms2_window(const TimeSeries& data) {
  if (!data.has(Column::n2)) return data;
  const auto& n2 = data.at(Column::n2);
  std::size_t count = 0;
  for (; count < data.size(); ++count) {
    double total = n2[count];
    if (data.has(Column::n3)) total += data.at(Column::n3)[count];
    if (data.has(Column::n1)) total += data.at(Column::n1)[count];
    if (!(total > 0.0) || n2[count] / total >= ms2_window_fraction) break;
  }
  return data.head(count);
}

struct LinearVolume {
  double v0;     // m^3
  double slope;  // relative growth c in V0 (1 + c tau), 1/s
};

/// Least-squares line V0 (1 + c tau) through a volume series.
inline LinearVolume fit_linear_volume(const std::vector<double>& tau, const std::vector<double>& v) {
  const double n = static_cast<double>(tau.size());
  double st = 0, sv = 0, stt = 0, stv = 0;
  for (std::size_t i = 0; i < tau.size(); ++i) {
    st += tau[i];
    sv += v[i];
    stt += tau[i] * tau[i];
    stv += tau[i] * v[i];
  }
  const double denom = n * stt - st * st;
  const double b = denom > 0.0 ? (n * stv - st * sv) / denom : 0.0;
  const double a = (sv - b * st) / n;
  if (!(a > 0.0)) throw NumericalFailure("linear volume model has nonpositive intercept");
  return {a, b / a};
}

/// Method ii: fits {N0, beta_loss} to the N3 decay assuming a linearly growing
/// volume V0 (1 + c t) (V0, c from the volume data; constant when only
/// opt.constant_volume is given). The 25% m_S = S-1 window is applied
/// whenever the series carries N2.
inline FitResult fit_method_ii(const TimeSeries& data, double gamma_bg, const FitOptions& opt = {}) {
  if (!(gamma_bg >= 0.0)) throw InvalidInput("background rate must be >= 0");
  TimeSeries ts = ms2_window(data.sorted());
  if (ts.size() < 3)
    throw InsufficientData("fewer than 3 points remain below the 25% m_S=S-1 population limit");
  ts = detail::prepare(ts, opt, 3);
  LinearVolume lv{};
  if (opt.constant_volume) {
    if (!(*opt.constant_volume > 0.0)) throw InvalidInput("constant volume must be > 0");
    lv = {*opt.constant_volume, 0.0};
  } else if (auto series = volume_series(ts)) {
    lv = fit_linear_volume(detail::elapsed(ts), *series);
  } else {
    throw InvalidInput("method ii needs a volume column, width columns or a constant volume");
  }
  auto volume = [lv](double s) { return lv.v0 * (1.0 + lv.slope * s); };
  FitResult r = detail::fit_two_body(ts, gamma_bg, volume, "beta_loss", "method_ii", opt);
  r.flags.push_back(lv.slope == 0.0 ? "constant_volume" : "linear_volume");
  return r;
}

/// Method iii: heating. With N3 and volume data the heating equation is
/// integrated against the measured density,
///   T(t) = T0 + beta_loss dT_step int_0^t N3/V ds,
/// which is linear in {T0, beta_loss}. Without them, the initial slope of a
/// straight line through T(t) is divided by initial_density * dT_step; that
/// fallback reads low by the fraction of N3 lost inside the window.
inline FitResult fit_method_iii(const TimeSeries& data, double temperature_step,
                                const FitOptions& opt = {},
                                std::optional<double> initial_density = std::nullopt) {
  if (!(temperature_step > 0.0)) throw InvalidInput("temperature step must be > 0");
  const TimeSeries ts = detail::prepare(data, opt, 3);
  const auto tau = detail::elapsed(ts);
  const auto& temp = ts.at(Column::temperature);

  std::vector<double> exposure;  // int N3/V dt, or t in slope mode
  double density_scale = 1.0;
  bool integrated = false;
  std::optional<std::vector<double>> vol;
  if (opt.constant_volume) vol = std::vector<double>(ts.size(), *opt.constant_volume);
  else vol = volume_series(ts);
  if (ts.has(Column::n3) && vol) {
    std::vector<double> density(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) density[i] = ts.at(Column::n3)[i] / (*vol)[i];
    exposure = detail::cumulative_trapezoid(tau, density);
    integrated = true;
  } else if (initial_density) {
    if (!(*initial_density > 0.0)) throw InvalidInput("initial density must be > 0");
    exposure = tau;
    density_scale = *initial_density;
  } else {
    throw InvalidInput("method iii needs N3 and volume data, or an initial density");
  }

  const double gain = temperature_step * density_scale;  // dT per unit exposure per unit beta
  const double slope0 = (temp[1] - temp[0]) / (exposure[1] - exposure[0]);
  const double t_ref = std::max(std::abs(temp.front()), 1e-12);

  lsq::Problem problem;
  problem.names = {"T0", "beta_loss"};
  problem.observed = detail::as_vector(temp);
  problem.sigmas = detail::point_sigmas(ts);
  problem.initial = Eigen::Vector2d(temp.front(), slope0 / gain);
  problem.scale = Eigen::Vector2d(t_ref, t_ref / (gain * exposure.back()));
  problem.model = [exposure, gain](const Eigen::VectorXd& p) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(exposure.size()));
    for (std::size_t i = 0; i < exposure.size(); ++i)
      out[static_cast<Eigen::Index>(i)] = p[0] + p[1] * gain * exposure[i];
    return out;
  };
  FitResult r = lsq::nonlinear_least_squares(problem, opt.solver);
  r.model_tag = "method_iii";
  r.flags.push_back(integrated ? "integrated_density" : "initial_slope");
  if (!(r.value("beta_loss") > 0.0)) r.flags.push_back("nonpositive_slope");
  return r;
}

/// beta2 from the m_S = S-1 balance dN2/dt = -dN3/dt - beta2 N2^2 / V2 with
/// V2 = (3/2)^{3/2} V3. The loss term is linearized around the measured N2:
///   N2(t) = N2(0) + [N3(0) - N3(t)] - beta2 int_0^t N2^2 / V2 ds,
/// leaving a model linear in {N2_0, beta2}.
inline FitResult fit_beta2(const TimeSeries& data, const FitOptions& opt = {}) {
  const TimeSeries ts = detail::prepare(data, opt, 3);
  const auto tau = detail::elapsed(ts);
  const auto& n2 = ts.at(Column::n2);
  const auto& n3 = ts.at(Column::n3);
  std::vector<double> v3;
  if (opt.constant_volume) {
    if (!(*opt.constant_volume > 0.0)) throw InvalidInput("constant volume must be > 0");
    v3.assign(ts.size(), *opt.constant_volume);
  } else if (auto series = volume_series(ts)) {
    v3 = *series;
  } else {
    throw InvalidInput("beta2 fit needs a volume column, width columns or a constant volume");
  }
  std::vector<double> loss_density(ts.size());
  std::vector<double> fed(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    loss_density[i] = n2[i] * n2[i] / thermalized_volume_ms2(v3[i]);
    fed[i] = n3.front() - n3[i];
  }
  const std::vector<double> J = detail::cumulative_trapezoid(tau, loss_density);
  const double n_scale = std::max(*std::max_element(n2.begin(), n2.end()), 1e-300);
  if (!(J.back() > 0.0)) throw DegenerateFit("m_S = S-1 population is zero: beta2 not identifiable");

  // Start from the exact two-point balance.
  const double beta_init = std::max(0.0, (n2.front() + fed.back() - n2.back()) / J.back());

  lsq::Problem problem;
  problem.names = {"N2_0", "beta2"};
  problem.observed = detail::as_vector(n2);
  problem.sigmas = detail::point_sigmas(ts);
  problem.initial = Eigen::Vector2d(n2.front(), beta_init);
  problem.scale = Eigen::Vector2d(n_scale, n_scale / J.back());
  problem.model = [fed, J](const Eigen::VectorXd& p) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(fed.size()));
    for (std::size_t i = 0; i < fed.size(); ++i)
      out[static_cast<Eigen::Index>(i)] = p[0] + fed[i] - p[1] * J[i];
    return out;
  };
  FitResult r = lsq::nonlinear_least_squares(problem, opt.solver);
  r.model_tag = "beta2";
  return r;
}

}  // namespace dipolar
