#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "attenua/damping.hpp"
#include "attenua/domain_grid.hpp"
#include "attenua/errors.hpp"
#include "attenua/parallel.hpp"

namespace attenua {

// Initial displacement and velocity, stored on the full grid; both must vanish
// off the FLUID set.
struct InitialData {
  Field u0;
  Field u1;

  static InitialData zeros(const Grid& grid) { return {Field(grid.size(), 0.0), Field(grid.size(), 0.0)}; }
};

// Two consecutive time levels. u_curr lives at time t; u_prev at t - dt.
// Entries off the FLUID set are kept at exactly zero (Dirichlet).
struct WaveState {
  Field u_prev;
  Field u_curr;
  double t = 0.0;
  double dt = 0.0;
  long step_index = 0;
  double initial_max = 0.0;
};

inline double cfl_timestep(const Grid& grid, double c_safety, int dim = 2) {
  if (!(c_safety > 0.0 && c_safety <= 0.9))
    throw Error(ErrorKind::Precondition, "c_safety must lie in (0, 0.9]");
  return c_safety * grid.h() / std::sqrt(static_cast<double>(dim));
}

// 5-point Laplacian at FLUID nodes (non-fluid neighbors read as zero); zero
// elsewhere.
inline Field laplacian(const Field& u, const Grid& grid, const DomainMask& mask) {
  Field out(grid.size(), 0.0);
  const std::size_t n = static_cast<std::size_t>(grid.n_per_axis());
  const double inv_h2 = 1.0 / (grid.h() * grid.h());
  for (const FluidRun& run : mask.runs()) {
    const std::size_t base = static_cast<std::size_t>(run.row) * n;
    for (int i = run.begin; i < run.end; ++i) {
      const std::size_t p = base + static_cast<std::size_t>(i);
      out[p] = (u[p - 1] + u[p + 1] + u[p - n] + u[p + n] - 4.0 * u[p]) * inv_h2;
    }
  }
  return out;
}

inline void check_dirichlet(const Field& u, const DomainMask& mask, const char* what) {
  for (std::size_t p = 0; p < u.size(); ++p)
    if (!mask.is_fluid(p) && u[p] != 0.0)
      throw Error(ErrorKind::NonzeroOnBoundary, std::string(what) + " is nonzero at a non-FLUID node");
}

inline double max_abs(const Field& u) {
  double m = 0.0;
  for (double x : u) m = std::max(m, std::abs(x));
  return m;
}

// Second-order Taylor back-step: u(-dt) = u0 - dt u1 + dt^2/2 (lap u0 - a u1).
inline WaveState init_state(const InitialData& data, const Grid& grid, const DomainMask& mask, const Field& a,
                            double dt) {
  if (data.u0.size() != grid.size() || data.u1.size() != grid.size())
    throw Error(ErrorKind::Precondition, "initial data does not match the grid");
  if (!(dt > 0.0) || dt > cfl_timestep(grid, 0.9) * (1.0 + 1e-12))
    throw Error(ErrorKind::Precondition, "dt violates the CFL bound 0.9 h / sqrt(d)");
  check_dirichlet(data.u0, mask, "u0");
  check_dirichlet(data.u1, mask, "u1");
  const Field lap = laplacian(data.u0, grid, mask);
  WaveState s;
  s.dt = dt;
  s.u_curr = data.u0;
  s.u_prev.assign(grid.size(), 0.0);
  for (std::size_t p : mask.fluid_nodes())
    s.u_prev[p] = data.u0[p] - dt * data.u1[p] + 0.5 * dt * dt * (lap[p] - a[p] * data.u1[p]);
  s.initial_max = std::max(max_abs(s.u_curr), max_abs(s.u_prev));
  return s;
}

inline WaveState init_state(const InitialData& data, const Grid& grid, const DomainMask& mask,
                            const DampingProfile& profile, double dt) {
  return init_state(data, grid, mask, damping_field(profile, grid), dt);
}

// Sums gathered while advancing u^{n-1}, u^n -> u^{n+1}.
struct StepDiagnostics {
  double centered_dissipation = 0.0;  // dt h^2 sum a ((u^{n+1} - u^{n-1}) / 2dt)^2
  double backward_power = 0.0;        // h^2 sum a ((u^{n+1} - u^n) / dt)^2
  double damped_l2 = 0.0;             // h^2 sum a (u^{n+1})^2
  double max_abs = 0.0;
};

// Leapfrog for u_tt - lap u + a u_t = 0 with the damping term centered:
//   u^{n+1} = [2 u^n - (1 - alpha) u^{n-1} + dt^2 lap_h u^n] / (1 + alpha),  alpha = a dt / 2.
class Stepper {
 public:
  Stepper(const Grid& grid, const DomainMask& mask, Field a, double dt)
      : grid_(grid), mask_(mask), a_(std::move(a)), dt_(dt) {
    if (a_.size() != grid.size()) throw Error(ErrorKind::Precondition, "damping field does not match the grid");
    c_now_.assign(grid.size(), 0.0);
    c_prev_.assign(grid.size(), 0.0);
    c_lap_.assign(grid.size(), 0.0);
    for (std::size_t p : mask.fluid_nodes()) {
      if (a_[p] < 0.0) throw Error(ErrorKind::Precondition, "damping must be nonnegative");
      const double alpha = 0.5 * a_[p] * dt;
      c_now_[p] = 2.0 / (1.0 + alpha);
      c_prev_[p] = (1.0 - alpha) / (1.0 + alpha);
      c_lap_[p] = dt * dt / (grid.h() * grid.h()) / (1.0 + alpha);
    }
    next_.assign(grid.size(), 0.0);
    const std::size_t rows = static_cast<std::size_t>(grid.n_per_axis());
    row_sums_.assign(rows, {});
  }

  const Field& damping() const { return a_; }
  double dt() const { return dt_; }

  StepDiagnostics advance(WaveState& s) {
    const std::size_t n = static_cast<std::size_t>(grid_.n_per_axis());
    const double inv_dt = 1.0 / dt_;
    const double h2 = grid_.h() * grid_.h();
    const Field& up = s.u_prev;
    const Field& uc = s.u_curr;
    parallel_for(n, [&](std::size_t j) {
      StepDiagnostics d;
      const std::size_t base = j * n;
      for (std::size_t r = mask_.row_begin(static_cast<int>(j)); r < mask_.row_begin(static_cast<int>(j) + 1); ++r) {
        const FluidRun& run = mask_.runs()[r];
        for (int i = run.begin; i < run.end; ++i) {
          const std::size_t p = base + static_cast<std::size_t>(i);
          const double lap = uc[p - 1] + uc[p + 1] + uc[p - n] + uc[p + n] - 4.0 * uc[p];
          const double un = c_now_[p] * uc[p] - c_prev_[p] * up[p] + c_lap_[p] * lap;
          next_[p] = un;
          const double vc = 0.5 * (un - up[p]) * inv_dt;
          const double vb = (un - uc[p]) * inv_dt;
          d.centered_dissipation += a_[p] * vc * vc;
          d.backward_power += a_[p] * vb * vb;
          d.damped_l2 += a_[p] * un * un;
          d.max_abs = std::max(d.max_abs, std::abs(un));
        }
      }
      row_sums_[j] = d;
    });
    StepDiagnostics total;
    for (const auto& d : row_sums_) {
      total.centered_dissipation += d.centered_dissipation;
      total.backward_power += d.backward_power;
      total.damped_l2 += d.damped_l2;
      total.max_abs = std::max(total.max_abs, d.max_abs);
    }
    total.centered_dissipation *= dt_ * h2;
    total.backward_power *= h2;
    total.damped_l2 *= h2;
    if (!std::isfinite(total.max_abs) ||
        (s.initial_max > 0.0 && total.max_abs > 1e6 * s.initial_max))
      throw Error(ErrorKind::NumericBlowup, "max|u| exceeded 1e6 x its initial value at step " +
                                                std::to_string(s.step_index + 1));
    std::swap(s.u_prev, s.u_curr);
    std::swap(s.u_curr, next_);
    s.t += dt_;
    ++s.step_index;
    return total;
  }

 private:
  const Grid& grid_;
  const DomainMask& mask_;
  Field a_;
  double dt_;
  Field c_now_, c_prev_, c_lap_;
  Field next_;
  std::vector<StepDiagnostics> row_sums_;
};

// One step as a pure function.
inline WaveState step(const WaveState& state, const DampingProfile& profile, const Grid& grid,
                      const DomainMask& mask) {
  Stepper stepper(grid, mask, damping_field(profile, grid), state.dt);
  WaveState next = state;
  stepper.advance(next);
  return next;
}

// Discrete generator A(u0, u1) = (u1, lap_h u0 - a u1).
inline InitialData apply_generator(const InitialData& data, const Field& a, const Grid& grid,
                                   const DomainMask& mask) {
  InitialData out = InitialData::zeros(grid);
  const Field lap = laplacian(data.u0, grid, mask);
  for (std::size_t p : mask.fluid_nodes()) {
    out.u0[p] = data.u1[p];
    out.u1[p] = lap[p] - a[p] * data.u1[p];
  }
  return out;
}

inline InitialData apply_generator(const InitialData& data, const DampingProfile& profile, const Grid& grid,
                                   const DomainMask& mask) {
  return apply_generator(data, damping_field(profile, grid), grid, mask);
}

// Backward difference (u_curr - u_prev) / dt; an O(dt) approximation of u_t
// at t - dt/2, used by every observable.
inline Field velocity(const WaveState& s) {
  Field v(s.u_curr.size());
  const double inv = 1.0 / s.dt;
  for (std::size_t p = 0; p < v.size(); ++p) v[p] = (s.u_curr[p] - s.u_prev[p]) * inv;
  return v;
}

}  // namespace attenua
