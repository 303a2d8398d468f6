// Prints Gauss-Laguerre and Monte-Carlo beta_loss on a (B, T) grid.
//   mc_oracle [samples]

#include <cstdio>
#include <cstdlib>

#include "mc_oracle.hpp"

int main(int argc, char** argv) {
  using namespace dipolar;
  const std::uint64_t samples = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 10'000'000ULL;
  const auto cr = species::chromium52();
  std::printf("B_gauss,T_uK,quadrature_cm3s,monte_carlo_cm3s,mc_std_error_cm3s,rel_diff\n");
  std::uint64_t seed = 1;
  for (double b : {0.15, 0.7, 3.0, 27.0, 50.0}) {
    for (double t : {10.0, 50.0, 100.0, 275.0, 1000.0}) {
      const ThermalConditions c{microkelvin(t), gauss(b)};
      const double q = thermal_average(cr, c, {0.0, 1.0, 2.0});
      const auto mc = oracle::monte_carlo_average(cr, c, {0.0, 1.0, 2.0}, samples, seed++);
      std::printf("%g,%g,%.9g,%.9g,%.3g,%.3g\n", b, t, q * 1e6, mc.mean * 1e6, mc.std_error * 1e6,
                  mc.mean / q - 1.0);
    }
  }
}
