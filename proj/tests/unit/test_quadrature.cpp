#include <catch_amalgamated.hpp>

#include <cmath>

#include "dipolar/quadrature.hpp"

using namespace dipolar;
using Catch::Matchers::WithinRel;

TEST_CASE("generalized Gauss-Laguerre integrates moments exactly") {
  for (double alpha : {0.0, 0.5, 1.0}) {
    for (int n : {4, 16, 96}) {
      const auto rule = quadrature::gauss_laguerre(n, alpha);
      for (int k = 0; k < std::min(2 * n, 12); ++k) {
        long double sum = 0.0;
        for (int i = 0; i < n; ++i) sum += rule.weights[i] * std::pow(rule.nodes[i], k);
        INFO("alpha=" << alpha << " n=" << n << " k=" << k);
        CHECK_THAT(static_cast<double>(sum), WithinRel(std::tgamma(k + alpha + 1.0), 1e-12));
      }
    }
  }
}

TEST_CASE("Gauss-Laguerre nodes are increasing, weights positive") {
  const auto rule = quadrature::gauss_laguerre(96, 0.5);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    CHECK(rule.weights[i] > 0.0);
    if (i) CHECK(rule.nodes[i] > rule.nodes[i - 1]);
  }
  CHECK_THROWS_AS(quadrature::gauss_laguerre(0, 0.5), InvalidInput);
  CHECK_THROWS_AS(quadrature::gauss_laguerre(8, -1.0), InvalidInput);
}

TEST_CASE("adaptive Gauss-Kronrod handles endpoint singularities") {
  const auto a = quadrature::adaptive_gauss_kronrod([](double x) { return std::sqrt(x); }, 0.0, 1.0);
  CHECK_THAT(a.value, WithinRel(2.0 / 3.0, 1e-12));
  const auto b = quadrature::adaptive_gauss_kronrod([](double x) { return std::exp(-x * x); }, 0.0, 10.0);
  CHECK_THAT(b.value, WithinRel(std::sqrt(std::numbers::pi) / 2.0, 1e-12));
  CHECK(b.error < 1e-12);
}

TEST_CASE("adaptive Gauss-Kronrod reports failure with its error estimate") {
  auto f = [](double x) { return std::sin(1.0 / x) / x; };
  try {
    quadrature::adaptive_gauss_kronrod(f, 1e-6, 1.0, 1e-14, 0.0, 20);
    FAIL("expected NumericalFailure");
  } catch (const NumericalFailure& e) {
    CHECK(e.error_estimate() > 0.0);
  }
}
