#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "attenua/damping.hpp"
#include "attenua/domain_grid.hpp"
#include "attenua/errors.hpp"
#include "attenua/parallel.hpp"
#include "attenua/wave_solver.hpp"

namespace attenua {

// Sum over all horizontal and vertical grid edges of (u_i - u_j)(w_i - w_j).
// With u = w = 0 off the FLUID set this equals <-lap_h u, w> h^2, so it is the
// discrete Dirichlet form int grad u . grad w.
inline double edge_form(const Field& u, const Field& w, const Grid& grid) {
  const std::size_t n = static_cast<std::size_t>(grid.n_per_axis());
  return ordered_sum(n, [&](std::size_t j) {
    double s = 0.0;
    const std::size_t base = j * n;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const std::size_t p = base + i;
      s += (u[p + 1] - u[p]) * (w[p + 1] - w[p]);
    }
    if (j + 1 < n)
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t p = base + i;
        s += (u[p + n] - u[p]) * (w[p + n] - w[p]);
      }
    return s;
  });
}

// Same as edge_form restricted to edges whose midpoint lies in B_R.
inline double edge_form_within(const Field& u, const Field& w, const Grid& grid, double R) {
  const std::size_t n = static_cast<std::size_t>(grid.n_per_axis());
  const double h = grid.h();
  return ordered_sum(n, [&](std::size_t j) {
    double s = 0.0;
    const std::size_t base = j * n;
    const double y = grid.coord(static_cast<int>(j));
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double x = grid.coord(static_cast<int>(i)) + 0.5 * h;
      if (x * x + y * y >= R * R) continue;
      const std::size_t p = base + i;
      s += (u[p + 1] - u[p]) * (w[p + 1] - w[p]);
    }
    if (j + 1 < n)
      for (std::size_t i = 0; i < n; ++i) {
        const double x = grid.coord(static_cast<int>(i));
        const double ym = y + 0.5 * h;
        if (x * x + ym * ym >= R * R) continue;
        const std::size_t p = base + i;
        s += (u[p + n] - u[p]) * (w[p + n] - w[p]);
      }
    return s;
  });
}

// h^2 sum over FLUID nodes of weight(p) * u * w.
template <class Weight>
double fluid_sum(const Grid& grid, const DomainMask& mask, Weight&& weight) {
  const double h2 = grid.h() * grid.h();
  const std::size_t n = static_cast<std::size_t>(grid.n_per_axis());
  return h2 * ordered_sum(n, [&](std::size_t j) {
           double s = 0.0;
           const std::size_t base = j * n;
           for (std::size_t r = mask.row_begin(static_cast<int>(j)); r < mask.row_begin(static_cast<int>(j) + 1); ++r) {
             const FluidRun& run = mask.runs()[r];
             for (int i = run.begin; i < run.end; ++i) s += weight(base + static_cast<std::size_t>(i));
           }
           return s;
         });
}

inline double l2_sq(const Field& u, const Grid& grid, const DomainMask& mask) {
  return fluid_sum(grid, mask, [&](std::size_t p) { return u[p] * u[p]; });
}

// Discrete energy of a two-level state:
//   E = 1/2 h^2 sum |(u_curr - u_prev)/dt|^2 + 1/2 <grad u_curr, grad u_prev>.
// This is the quantity the leapfrog scheme dissipates exactly: from one step
// to the next it drops by dt h^2 sum a ((u^{n+1} - u^{n-1}) / 2dt)^2.
// For a static state it reduces to 1/2 int |grad u|^2.
inline double energy(const WaveState& s, const Grid& grid, const DomainMask& mask) {
  const double inv_dt = 1.0 / s.dt;
  const double kinetic = fluid_sum(grid, mask, [&](std::size_t p) {
    const double v = (s.u_curr[p] - s.u_prev[p]) * inv_dt;
    return v * v;
  });
  return 0.5 * kinetic + 0.5 * edge_form(s.u_curr, s.u_prev, grid);
}

// Energy carried by Omega & B_R (same discrete density as energy()).
inline double local_energy(const WaveState& s, double R, const Grid& grid, const DomainMask& mask) {
  const double inv_dt = 1.0 / s.dt;
  const double kinetic = fluid_sum(grid, mask, [&](std::size_t p) {
    const Vec2 x = grid.position(p);
    if (dot(x, x) >= R * R) return 0.0;
    const double v = (s.u_curr[p] - s.u_prev[p]) * inv_dt;
    return v * v;
  });
  return 0.5 * kinetic + 0.5 * edge_form_within(s.u_curr, s.u_prev, grid, R);
}

// The cutoff psi: 1 on |x| <= L, 0 on |x| >= 2L, smoothstep in between,
// sampled on the grid with its discrete gradient (central) and Laplacian
// (5-point).
struct Cutoff {
  double L = 3.0;
  double k = 1.0;  // multiplier weight
  Field psi;
  Field grad_x;
  Field grad_y;
  Field lap;
};

inline double cutoff_value(double r, double L) { return 1.0 - smoothstep((r - L) / L); }

inline double default_multiplier_weight(double eps0) { return 8.0 / eps0 + 1.0; }

inline Cutoff make_cutoff(const Grid& grid, double L, double k) {
  Cutoff c;
  c.L = L;
  c.k = k;
  const std::size_t N = grid.size();
  c.psi.resize(N);
  for (std::size_t p = 0; p < N; ++p) c.psi[p] = cutoff_value(norm(grid.position(p)), L);
  c.grad_x.assign(N, 0.0);
  c.grad_y.assign(N, 0.0);
  c.lap.assign(N, 0.0);
  const int n = grid.n_per_axis();
  const std::size_t sn = static_cast<std::size_t>(n);
  const double h = grid.h();
  for (int j = 1; j < n - 1; ++j)
    for (int i = 1; i < n - 1; ++i) {
      const std::size_t p = grid.flat(i, j);
      c.grad_x[p] = (c.psi[p + 1] - c.psi[p - 1]) / (2.0 * h);
      c.grad_y[p] = (c.psi[p + sn] - c.psi[p - sn]) / (2.0 * h);
      c.lap[p] = (c.psi[p + 1] + c.psi[p - 1] + c.psi[p + sn] + c.psi[p - sn] - 4.0 * c.psi[p]) / (h * h);
    }
  return c;
}

// Central-difference gradient of u at node p (neighbors off FLUID read zero).
inline Vec2 central_gradient(const Field& u, std::size_t p, const Grid& grid) {
  const std::size_t n = static_cast<std::size_t>(grid.n_per_axis());
  const double inv = 0.5 / grid.h();
  return {(u[p + 1] - u[p - 1]) * inv, (u[p + n] - u[p - n]) * inv};
}

struct MultiplierTerms {
  double X = 0.0;
  double v_l2_sq = 0.0;  // int |v|^2, v = (1 - psi) u
  double energy = 0.0;   // E_u
};

// X(t) = int v v_t + 1/2 int a v^2 + k E_u with v = (1 - psi) u.
inline MultiplierTerms multiplier_terms(const WaveState& s, const Cutoff& cutoff, const Field& a,
                                        const Grid& grid, const DomainMask& mask) {
  const double inv_dt = 1.0 / s.dt;
  MultiplierTerms m;
  m.energy = energy(s, grid, mask);
  const double cross = fluid_sum(grid, mask, [&](std::size_t p) {
    const double w = 1.0 - cutoff.psi[p];
    const double v = w * s.u_curr[p];
    const double vt = w * (s.u_curr[p] - s.u_prev[p]) * inv_dt;
    return v * vt + 0.5 * a[p] * v * v;
  });
  m.v_l2_sq = fluid_sum(grid, mask, [&](std::size_t p) {
    const double v = (1.0 - cutoff.psi[p]) * s.u_curr[p];
    return v * v;
  });
  m.X = cross + cutoff.k * m.energy;
  return m;
}

inline double multiplier_X(const WaveState& s, const Cutoff& cutoff, const DampingProfile& profile,
                           const Grid& grid, const DomainMask& mask) {
  return multiplier_terms(s, cutoff, damping_field(profile, grid), grid, mask).X;
}

struct MultiplierBounds {
  double lower;  // (eps0/4) int v^2 + (k - 8/eps0) E_u
  double upper;  // (3/2) |a|_inf int v^2 + (k + 2/eps0) E_u
};

inline MultiplierBounds multiplier_bounds(const MultiplierTerms& m, double eps0, double a_inf, double k) {
  return {0.25 * eps0 * m.v_l2_sq + (k - 8.0 / eps0) * m.energy,
          1.5 * a_inf * m.v_l2_sq + (k + 2.0 / eps0) * m.energy};
}

// Relative gap in  int (2 grad psi . grad u + u lap psi)(1 - psi) u = int |grad psi|^2 u^2
// evaluated with discrete operators.
inline double cutoff_identity_residual(const Field& u, const Cutoff& c, const Grid& grid, const DomainMask& mask) {
  const double lhs = fluid_sum(grid, mask, [&](std::size_t p) {
    const Vec2 gu = central_gradient(u, p, grid);
    const double f = 2.0 * (c.grad_x[p] * gu.x + c.grad_y[p] * gu.y) + u[p] * c.lap[p];
    return f * (1.0 - c.psi[p]) * u[p];
  });
  const double rhs = fluid_sum(grid, mask, [&](std::size_t p) {
    return (c.grad_x[p] * c.grad_x[p] + c.grad_y[p] * c.grad_y[p]) * u[p] * u[p];
  });
  return std::abs(lhs - rhs) / std::max(rhs, std::numeric_limits<double>::epsilon());
}

inline double cutoff_identity_residual(const WaveState& s, const Cutoff& c, const Grid& grid,
                                       const DomainMask& mask) {
  return cutoff_identity_residual(s.u_curr, c, grid, mask);
}

// Quantities for the localized observability inequality: w = psi u solves the
// damped wave equation on B_2L with source f = -2 grad psi . grad u - u lap psi.
struct ObservabilitySample {
  double t = 0.0;
  double E_w = 0.0;      // 1/2 int |grad w|^2 + |w_t|^2
  double density = 0.0;  // int a |w_t|^2 + |f|^2
};

inline ObservabilitySample observability_sample(const WaveState& s, const Cutoff& c, const Field& a,
                                                const Grid& grid, const DomainMask& mask) {
  const double inv_dt = 1.0 / s.dt;
  Field w(grid.size(), 0.0);
  for (std::size_t p : mask.fluid_nodes()) w[p] = c.psi[p] * s.u_curr[p];
  ObservabilitySample o;
  o.t = s.t;
  const double kinetic = fluid_sum(grid, mask, [&](std::size_t p) {
    const double wt = c.psi[p] * (s.u_curr[p] - s.u_prev[p]) * inv_dt;
    return wt * wt;
  });
  o.E_w = 0.5 * (edge_form(w, w, grid) + kinetic);
  o.density = fluid_sum(grid, mask, [&](std::size_t p) {
    const double wt = c.psi[p] * (s.u_curr[p] - s.u_prev[p]) * inv_dt;
    const Vec2 gu = central_gradient(s.u_curr, p, grid);
    const double f = -2.0 * (c.grad_x[p] * gu.x + c.grad_y[p] * gu.y) - s.u_curr[p] * c.lap[p];
    return a[p] * wt * wt + f * f;
  });
  return o;
}

// E_w(t) / int_t^{t+T} int (a |w_t|^2 + |f|^2), trapezoid in time over the
// samples. t must be a sample time and t + T must not exceed the last one.
inline double observability_ratio(std::span<const ObservabilitySample> series, std::size_t start, double T) {
  if (start >= series.size()) throw Error(ErrorKind::Precondition, "window start out of range");
  const double t0 = series[start].t;
  const double tol = 1e-9 * std::max(1.0, T);
  if (series.back().t < t0 + T - tol) throw Error(ErrorKind::Precondition, "window extends past the series");
  double integral = 0.0;
  for (std::size_t i = start; i + 1 < series.size() && series[i + 1].t <= t0 + T + tol; ++i)
    integral += 0.5 * (series[i].density + series[i + 1].density) * (series[i + 1].t - series[i].t);
  const double ew = series[start].E_w;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (integral < eps) {
    if (ew > eps) throw Error(ErrorKind::DegenerateWindow, "dissipation window vanishes while E_w > 0");
    return 0.0;
  }
  return ew / integral;
}

// Ratio at every sample time t with t + T inside the series.
inline std::vector<double> observability_profile(std::span<const ObservabilitySample> series, double T) {
  std::vector<double> out;
  if (series.empty()) return out;
  const double tol = 1e-9 * std::max(1.0, T);
  for (std::size_t i = 0; i < series.size() && series[i].t + T <= series.back().t + tol; ++i)
    out.push_back(observability_ratio(series, i, T));
  return out;
}

// Weight d(x): |x| ln(B|x|) in two dimensions, |x| for d >= 3.
inline double weight_function(Vec2 x, double B, int dim = 2) {
  const double r = norm(x);
  return dim == 2 ? r * std::log(B * r) : r;
}

inline void check_weight_constant(const DomainMask& mask, double B) {
  if (!(B * mask.min_fluid_radius() >= 2.0))
    throw Error(ErrorKind::BadWeightConstant,
                "B * inf|x| = " + std::to_string(B * mask.min_fluid_radius()) + " < 2");
}

// || d(.) (u1 + a u0) ||_{L^2}
inline double weighted_norm(const InitialData& data, const Field& a, const Grid& grid, const DomainMask& mask,
                            double B) {
  check_weight_constant(mask, B);
  return std::sqrt(fluid_sum(grid, mask, [&](std::size_t p) {
    const double d = weight_function(grid.position(p), B);
    const double g = d * (data.u1[p] + a[p] * data.u0[p]);
    return g * g;
  }));
}

inline double weighted_norm(const InitialData& data, const DampingProfile& profile, const Grid& grid,
                            const DomainMask& mask, double B) {
  return weighted_norm(data, damping_field(profile, grid), grid, mask, B);
}

// ||(phi0, phi1)||_H^2 = 1/2 int |grad phi0|^2 + |phi1|^2
inline double h_norm_sq(const InitialData& d, const Grid& grid, const DomainMask& mask) {
  return 0.5 * (edge_form(d.u0, d.u0, grid) + l2_sq(d.u1, grid, mask));
}

struct DataNorms {
  double I0 = 0.0;
  std::optional<double> I1;  // empty when the weight is undefined (no obstacle around the origin)
  double I0n = 0.0;
  std::optional<double> I1n;
  int n = 0;
  double B = 0.0;
  std::optional<double> weighted;  // || d (u1 + a u0) ||
};

// I0 = ||u0||_{H^1}^2 + ||u1||^2, I1 = I0 + ||d (u1 + a u0)||^2,
// I0n = sum_{i<=n} ||A^i (u0, u1)||_H^2 + ||u0||^2, I1n = I0n + ||d (u1 + a u0)||^2.
inline DataNorms data_norms(const InitialData& data, const Field& a, const Grid& grid, const DomainMask& mask,
                            int n, std::optional<double> B) {
  if (n < 0) throw Error(ErrorKind::Precondition, "cascade depth must be >= 0");
  DataNorms out;
  out.n = n;
  const double u0_sq = l2_sq(data.u0, grid, mask);
  out.I0 = u0_sq + edge_form(data.u0, data.u0, grid) + l2_sq(data.u1, grid, mask);
  InitialData it = data;
  double cascade = 0.0;
  for (int i = 0; i <= n; ++i) {
    cascade += h_norm_sq(it, grid, mask);
    if (i < n) it = apply_generator(it, a, grid, mask);
  }
  out.I0n = cascade + u0_sq;
  if (B) {
    out.B = *B;
    const double w = weighted_norm(data, a, grid, mask, *B);
    out.weighted = w;
    out.I1 = out.I0 + w * w;
    out.I1n = out.I0n + w * w;
  }
  return out;
}

// One row of the energy time series. The first six fields are the CSV
// columns; the rest feed the acceptance checks.
struct EnergyRecord {
  double t = 0.0;
  double E = 0.0;
  double l2_sq = 0.0;
  double local_E = 0.0;
  double dissipation_cum = 0.0;  // trapezoid of int a |u_t|^2 with backward velocities
  double X = 0.0;

  double scheme_dissipation_cum = 0.0;  // centered-velocity dissipation the scheme removes exactly
  double damped_l2_cum = 0.0;           // int_0^t int a |u|^2
  double outer_E = 0.0;                 // energy outside B_{R_max - 2h}
  double v_l2_sq = 0.0;
  double E_w = 0.0;
  double obs_density = 0.0;
};

// |E(T) + int_0^T int a |u_t|^2 - E(0)| / E(0), read at the last record with t <= T.
inline double energy_balance_residual(std::span<const EnergyRecord> series, double T) {
  if (series.empty()) throw Error(ErrorKind::Precondition, "empty series");
  const EnergyRecord* at = &series.front();
  for (const auto& r : series)
    if (r.t <= T + 1e-12 * std::max(1.0, T)) at = &r;
  const double e0 = series.front().E;
  if (e0 <= 0.0) return 0.0;
  return std::abs(at->E + at->dissipation_cum - e0) / e0;
}

}  // namespace attenua
