#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "attenua/domain_grid.hpp"
#include "attenua/errors.hpp"
#include "attenua/vec.hpp"

namespace attenua {

// C^1 ramp on [0, 1]: 3s^2 - 2s^3, clamped outside.
inline double smoothstep(double s) {
  s = std::clamp(s, 0.0, 1.0);
  return s * s * (3.0 - 2.0 * s);
}

inline double smoothstep_derivative(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  return 6.0 * s * (1.0 - s);
}

enum class DampingKind { RadialPlateau, Constant, Annulus, Table };

// Damping coefficient a(x) >= 0.
//
//  RadialPlateau  0 for |x| <= L - width, a_max for |x| >= L, smoothstep ramp between.
//  Constant       a_max everywhere.
//  Annulus        a_max on inner_radius <= |x| <= outer_radius, 0 elsewhere.
//  Table          per-node values on a grid; points read their nearest node.
struct DampingProfile {
  DampingKind kind = DampingKind::RadialPlateau;
  double eps0 = 1.0;
  double L = 3.0;
  double a_max = 2.0;
  double transition_width = 1.0;
  double inner_radius = 0.0;
  double outer_radius = 0.0;
  std::optional<Grid> table_grid;
  Field table;

  static DampingProfile radial_plateau(double L, double width, double a_max,
                                       std::optional<double> eps0 = std::nullopt) {
    DampingProfile p;
    p.kind = DampingKind::RadialPlateau;
    p.L = L;
    p.transition_width = width;
    p.a_max = a_max;
    p.eps0 = eps0.value_or(a_max / 2.0);
    return p;
  }

  static DampingProfile constant(double a, std::optional<double> eps0 = std::nullopt) {
    DampingProfile p;
    p.kind = DampingKind::Constant;
    p.a_max = a;
    p.L = 0.0;
    p.transition_width = 0.0;
    p.eps0 = eps0.value_or(a / 2.0);
    return p;
  }

  static DampingProfile annulus(double r_in, double r_out, double a_max, double L,
                                std::optional<double> eps0 = std::nullopt) {
    DampingProfile p;
    p.kind = DampingKind::Annulus;
    p.inner_radius = r_in;
    p.outer_radius = r_out;
    p.a_max = a_max;
    p.L = L;
    p.transition_width = 0.0;
    p.eps0 = eps0.value_or(a_max / 2.0);
    return p;
  }

  static DampingProfile from_table(const Grid& grid, Field values, double L, double eps0) {
    if (values.size() != grid.size())
      throw Error(ErrorKind::Precondition, "damping table size does not match the grid");
    DampingProfile p;
    p.kind = DampingKind::Table;
    p.table_grid = grid;
    p.table = std::move(values);
    p.L = L;
    p.eps0 = eps0;
    p.a_max = 0.0;
    for (double v : p.table) {
      if (v < 0.0) throw Error(ErrorKind::Precondition, "damping table has a negative entry");
      p.a_max = std::max(p.a_max, v);
    }
    p.transition_width = 0.0;
    return p;
  }
};

inline std::string_view to_string(DampingKind k) {
  switch (k) {
    case DampingKind::RadialPlateau: return "RADIAL_PLATEAU";
    case DampingKind::Constant: return "CONSTANT";
    case DampingKind::Annulus: return "ANNULUS";
    case DampingKind::Table: return "TABLE";
  }
  return "UNKNOWN";
}

inline double eval_damping(const DampingProfile& p, Vec2 x) {
  switch (p.kind) {
    case DampingKind::Constant:
      return p.a_max;
    case DampingKind::RadialPlateau: {
      const double r = norm(x);
      if (p.transition_width <= 0.0) return r >= p.L ? p.a_max : 0.0;
      return p.a_max * smoothstep((r - (p.L - p.transition_width)) / p.transition_width);
    }
    case DampingKind::Annulus: {
      const double r = norm(x);
      return (r >= p.inner_radius && r <= p.outer_radius) ? p.a_max : 0.0;
    }
    case DampingKind::Table:
      return p.table[p.table_grid->nearest(x)];
  }
  return 0.0;
}

// a(x) sampled at every node of the grid (zero off the FLUID set is not
// enforced here; kernels only read FLUID entries).
inline Field damping_field(const DampingProfile& p, const Grid& grid) {
  if (p.kind == DampingKind::Table && p.table_grid &&
      p.table_grid->n_per_axis() == grid.n_per_axis() && p.table_grid->h() == grid.h())
    return p.table;
  Field a(grid.size());
  for (std::size_t k = 0; k < a.size(); ++k) a[k] = eval_damping(p, grid.position(k));
  return a;
}

struct HypAReport {
  bool holds = true;
  std::optional<std::size_t> violating_node;
  std::optional<Vec2> violating_point;
  double violating_value = 0.0;
};

// Hyp A on the grid: a(x) > eps0 at every FLUID node with |x| >= L. The
// witness is the violating node closest to the origin.
inline HypAReport verify_hyp_a(const DampingProfile& profile, const Grid& grid, const DomainMask& mask) {
  HypAReport report;
  double best_r = std::numeric_limits<double>::infinity();
  for (std::size_t p : mask.fluid_nodes()) {
    const Vec2 x = grid.position(p);
    const double r = norm(x);
    if (r < profile.L) continue;
    const double a = eval_damping(profile, x);
    if (!(a > profile.eps0) && r < best_r) {
      best_r = r;
      report.holds = false;
      report.violating_node = p;
      report.violating_point = x;
      report.violating_value = a;
    }
  }
  return report;
}

// omega = { x in Omega : a(x) > eps0 }, node-wise on FLUID nodes.
using OmegaMask = std::vector<bool>;

inline OmegaMask omega_mask(const DampingProfile& profile, const Grid& grid, const DomainMask& mask) {
  OmegaMask omega(grid.size(), false);
  for (std::size_t p : mask.fluid_nodes()) omega[p] = eval_damping(profile, grid.position(p)) > profile.eps0;
  return omega;
}

}  // namespace attenua
