#pragma once

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "nuidx/rng.hpp"

namespace nuidx {

/**
 * Draw one d-vector from the Clayton copula with dependence rho >= 0 using
 * the gamma frailty (Marshall-Olkin) construction:
 *
 *   V ~ Gamma(1/rho, 1),  E_j ~ Exp(1),  U_j = (1 + E_j / V)^(-1/rho).
 *
 * rho == 0 gives independent uniforms. Every margin is Uniform(0,1).
 */
inline void sample_clayton_uniforms(double rho, std::span<double> u, Rng& rng) {
  if (rho <= 0.0) {
    for (auto& v : u) v = uniform_open(rng);
    return;
  }
  std::gamma_distribution<double> frailty(1.0 / rho, 1.0);
  const double v = frailty(rng);
  for (auto& uj : u) {
    const double e = -std::log(uniform_open(rng));
    uj = std::pow(1.0 + e / v, -1.0 / rho);
  }
}

inline std::vector<double> sample_clayton_uniforms(double rho, std::size_t d, Rng& rng) {
  std::vector<double> u(d);
  sample_clayton_uniforms(rho, std::span<double>(u), rng);
  return u;
}

}  // namespace nuidx
