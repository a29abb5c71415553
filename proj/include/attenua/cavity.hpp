#pragma once

#include <cmath>
#include <numbers>

#include "attenua/domain_grid.hpp"
#include "attenua/observables.hpp"

namespace attenua {

// sin(kx pi (x+R)/2R) sin(ky pi (y+R)/2R) on the box [-R, R]^2: a Dirichlet
// eigenfunction of both the continuous and the 5-point Laplacian.
inline Field cavity_mode(const Grid& grid, const DomainMask& mask, int kx, int ky) {
  Field phi(grid.size(), 0.0);
  const double R = grid.extent();
  for (std::size_t p : mask.fluid_nodes()) {
    const Vec2 x = grid.position(p);
    phi[p] = std::sin(kx * std::numbers::pi * (x.x + R) / (2.0 * R)) *
             std::sin(ky * std::numbers::pi * (x.y + R) / (2.0 * R));
  }
  return phi;
}

inline double cavity_eigenvalue(double R, int kx, int ky) {
  const double q = std::numbers::pi / (2.0 * R);
  return q * q * (kx * kx + ky * ky);
}

// Solution of y'' + a y' + lambda y = 0 with y(0) = 1, y'(0) = 0.
inline double damped_mode_amplitude(double lambda, double a, double t) {
  const double disc = lambda - 0.25 * a * a;
  const double decay = std::exp(-0.5 * a * t);
  if (disc > 0.0) {
    const double w = std::sqrt(disc);
    return decay * (std::cos(w * t) + 0.5 * a / w * std::sin(w * t));
  }
  if (disc < 0.0) {
    const double g = std::sqrt(-disc);
    return decay * (std::cosh(g * t) + 0.5 * a / g * std::sinh(g * t));
  }
  return decay * (1.0 + 0.5 * a * t);
}

// <u, phi> / <phi, phi>
inline double modal_amplitude(const Field& u, const Field& phi, const Grid& grid, const DomainMask& mask) {
  const double num = fluid_sum(grid, mask, [&](std::size_t p) { return u[p] * phi[p]; });
  const double den = fluid_sum(grid, mask, [&](std::size_t p) { return phi[p] * phi[p]; });
  return num / den;
}

}  // namespace attenua
