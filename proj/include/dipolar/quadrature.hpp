#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "dipolar/errors.hpp"

namespace dipolar::quadrature {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

// Generalized Laguerre L_n^(alpha)(x) and L_{n-1}^(alpha)(x) via the
// three-term recurrence.
inline std::pair<double, double> laguerre_pair(int n, double alpha, double x) {
  double p0 = 1.0;
  double p1 = 1.0 + alpha - x;
  if (n == 0) return {p0, 0.0};
  for (int k = 1; k < n; ++k) {
    const double p2 = ((2.0 * k + 1.0 + alpha - x) * p1 - (k + alpha) * p0) / (k + 1.0);
    p0 = p1;
    p1 = p2;
  }
  return {p1, p0};
}

}  // namespace detail

/// n-point Gauss rule for  int_0^inf x^alpha e^{-x} f(x) dx.
/// Nodes by Newton iteration from the asymptotic initial guesses used in
/// Numerical Recipes' gaulag, weights from the derivative identity.
inline Rule gauss_laguerre(int n, double alpha) {
  if (n < 1) throw InvalidInput("Gauss-Laguerre order must be >= 1");
  if (!(alpha > -1.0)) throw InvalidInput("Gauss-Laguerre alpha must be > -1");
  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double log_norm = std::lgamma(alpha + n) - std::lgamma(static_cast<double>(n));
  double z = 0.0;
  for (int i = 0; i < n; ++i) {
    if (i == 0) {
      z = (1.0 + alpha) * (3.0 + 0.92 * alpha) / (1.0 + 2.4 * n + 1.8 * alpha);
    } else if (i == 1) {
      z += (15.0 + 6.25 * alpha) / (1.0 + 0.9 * alpha + 2.5 * n);
    } else {
      const double ai = i - 1;
      z += ((1.0 + 2.55 * ai) / (1.9 * ai) + 1.26 * ai * alpha / (1.0 + 3.5 * ai)) *
           (z - rule.nodes[i - 2]) / (1.0 + 0.3 * alpha);
    }
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
      auto [pn, pn1] = detail::laguerre_pair(n, alpha, z);
      const double z_old = z;
      z = z_old - pn * z / (n * pn - (n + alpha) * pn1);
      // Roundoff in L_n caps attainable relative accuracy near 1e-14.
      if (std::abs(z - z_old) <= 1e-13 * z) {
        converged = true;
        break;
      }
    }
    if (converged) {
      auto [pn, pn1] = detail::laguerre_pair(n, alpha, z);
      z -= pn * z / (n * pn - (n + alpha) * pn1);
    }
    if (!converged) throw NumericalFailure("Gauss-Laguerre node iteration did not converge");
    auto [pn, pn1] = detail::laguerre_pair(n, alpha, z);
    const double deriv = (n * pn - (n + alpha) * pn1) / z;
    rule.nodes[i] = z;
    // w_i = -Gamma(n+alpha) / (Gamma(n) n L'_n(x_i) L_{n-1}(x_i))
    rule.weights[i] = -std::exp(log_norm) / (deriv * n * pn1);
  }
  return rule;
}

struct Estimate {
  double value;
  double error;
};

namespace detail {

inline constexpr std::array<double, 8> kronrod_x{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kronrod_w{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gauss7_w{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
Estimate gauss_kronrod15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * kronrod_w[7];
  double gauss = fc * gauss7_w[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kronrod_x[j];
    const double fsum = f(c - dx) + f(c + dx);
    kronrod += kronrod_w[j] * fsum;
    if (j % 2 == 1) gauss += gauss7_w[j / 2] * fsum;
  }
  return {kronrod * h, std::abs((kronrod - gauss) * h)};
}

}  // namespace detail

/// Globally adaptive 7/15 Gauss-Kronrod on [a, b]: always bisects the
/// interval with the largest error estimate.
template <class F>
Estimate adaptive_gauss_kronrod(F&& f, double a, double b, double rel_tol = 1e-12,
                                double abs_tol = 0.0, int max_intervals = 2000) {
  struct Piece {
    double a, b;
    Estimate est;
  };
  std::vector<Piece> pieces{{a, b, detail::gauss_kronrod15(f, a, b)}};
  auto total = [&] {
    Estimate t{0.0, 0.0};
    for (const auto& p : pieces) {
      t.value += p.est.value;
      t.error += p.est.error;
    }
    return t;
  };
  Estimate sum = total();
  while (sum.error > std::max(abs_tol, rel_tol * std::abs(sum.value))) {
    if (static_cast<int>(pieces.size()) >= max_intervals)
      throw NumericalFailure("adaptive quadrature did not converge (error estimate " +
                                 std::to_string(sum.error) + ")",
                             sum.error);
    auto worst = std::max_element(pieces.begin(), pieces.end(), [](const Piece& l, const Piece& r) {
      return l.est.error < r.est.error;
    });
    const double mid = 0.5 * (worst->a + worst->b);
    Piece right{mid, worst->b, detail::gauss_kronrod15(f, mid, worst->b)};
    worst->b = mid;
    worst->est = detail::gauss_kronrod15(f, worst->a, mid);
    pieces.push_back(right);
    sum = total();
  }
  return sum;
}

}  // namespace dipolar::quadrature
