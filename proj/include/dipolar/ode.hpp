#pragma once

// Adaptive Dormand-Prince 5(4) integrator for small non-stiff systems.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <vector>

#include "dipolar/errors.hpp"

namespace dipolar::ode {

struct Options {
  double rtol = 1e-9;
  double atol = 0.0;  // absolute floor per component, in state units
  double initial_step = 0.0;  // 0: pick automatically
  std::size_t max_steps = 1'000'000;
};

struct Stats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t evaluations = 0;
};

template <std::size_t N>
using State = std::array<double, N>;

namespace detail {

inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - b*, the embedded 4th-order error weights
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace detail

/// Integrates dy/dt = rhs(t, y) from t_grid.front() and records the state at
/// every grid time. The step is clipped so grid times are hit exactly.
template <std::size_t N, class Rhs>
std::vector<State<N>> integrate(Rhs&& rhs, State<N> y, const std::vector<double>& t_grid,
                                const Options& opt = {}, Stats* stats = nullptr) {
  using namespace detail;
  std::vector<State<N>> out;
  if (t_grid.empty()) return out;
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1])) throw InvalidInput("time grid must be strictly increasing");
  out.reserve(t_grid.size());
  out.push_back(y);

  Stats local;
  auto eval = [&](double t, const State<N>& s) {
    ++local.evaluations;
    State<N> d = rhs(t, s);
    return d;
  };

  double t = t_grid.front();
  const double span = t_grid.back() - t;
  State<N> k1 = eval(t, y);
  double h = opt.initial_step;
  if (h <= 0.0) {
    double ynorm = 0.0, dnorm = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = opt.atol + opt.rtol * std::abs(y[i]);
      if (sc > 0.0) {
        ynorm = std::max(ynorm, std::abs(y[i]) / sc);
        dnorm = std::max(dnorm, std::abs(k1[i]) / sc);
      }
    }
    h = (ynorm > 0.0 && dnorm > 0.0) ? 0.01 * ynorm / dnorm : 1e-3 * span;
    if (span > 0.0) h = std::min(h, span);
  }

  double err_prev = 1e-4;
  for (std::size_t g = 1; g < t_grid.size(); ++g) {
    const double t_target = t_grid[g];
    while (t < t_target) {
      if (local.accepted + local.rejected >= opt.max_steps) {
        std::ostringstream msg;
        msg << "integrator exceeded " << opt.max_steps << " steps at t = " << t << " (h = " << h
            << ")";
        throw NumericalFailure(msg.str());
      }
      bool last = false;
      double h_unclipped = h;
      if (t + h >= t_target) {
        h_unclipped = h;
        h = t_target - t;
        last = true;
      }
      if (h <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
        std::ostringstream msg;
        msg << "step size underflow at t = " << t << " (h = " << h << ")";
        throw NumericalFailure(msg.str());
      }
      State<N> tmp{};
      for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * a21 * k1[i];
      const State<N> k2 = eval(t + c2 * h, tmp);
      for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
      const State<N> k3 = eval(t + c3 * h, tmp);
      for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      const State<N> k4 = eval(t + c4 * h, tmp);
      for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      const State<N> k5 = eval(t + c5 * h, tmp);
      for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
      const State<N> k6 = eval(t + h, tmp);
      State<N> y_new{};
      for (std::size_t i = 0; i < N; ++i)
        y_new[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
      const State<N> k7 = eval(t + h, y_new);

      double err = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                              e7 * k7[i]);
        if (!std::isfinite(e) || !std::isfinite(y_new[i])) {
          err = std::numeric_limits<double>::infinity();
          continue;
        }
        const double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
        if (sc > 0.0) {
          err = std::max(err, std::abs(e) / sc);
        } else if (e != 0.0) {
          err = std::numeric_limits<double>::infinity();
        }
      }
      if (!std::isfinite(err)) err = 1e10;

      if (err <= 1.0) {
        t = last ? t_target : t + h;
        y = y_new;
        k1 = k7;  // FSAL
        ++local.accepted;
        // PI step-size control (Hairer & Wanner, beta = 0.04)
        double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.17) * std::pow(err_prev, 0.04);
        fac = std::clamp(fac, 0.2, 5.0);
        err_prev = std::max(err, 1e-4);
        h = last ? std::max(h_unclipped, h * fac) : h * fac;
      } else {
        ++local.rejected;
        h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      }
    }
    out.push_back(y);
  }
  if (stats) *stats = local;
  return out;
}

}  // namespace dipolar::ode
