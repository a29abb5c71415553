#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "attenua/damping.hpp"
#include "attenua/domain_grid.hpp"
#include "attenua/observables.hpp"
#include "attenua/wave_solver.hpp"

namespace attenua {

struct SimulationOptions {
  double T_final = 10.0;
  double c_safety = 0.5;
  int record_every = 1;
  double local_radius = 3.0;
  std::optional<Cutoff> cutoff;  // enables X, E_w and the observability density
  std::function<void(const WaveState&, const EnergyRecord&)> on_record;
};

struct SimulationResult {
  std::vector<EnergyRecord> records;
  WaveState final_state;
  double dt = 0.0;
  long steps = 0;
};

// Largest dt <= c_safety h / sqrt(2) that divides T_final evenly.
inline double fitted_timestep(const Grid& grid, double c_safety, double T_final) {
  const double cfl = cfl_timestep(grid, c_safety);
  const double steps = std::ceil(T_final / cfl - 1e-9);
  return T_final / std::max(1.0, steps);
}

// Advances the data to T_final and records observables every record_every
// steps (and at both ends). Time integrals (dissipation, int a u^2) are
// accumulated every step with the trapezoid rule.
inline SimulationResult simulate(const Grid& grid, const DomainMask& mask, const DampingProfile& profile,
                                 const InitialData& data, const SimulationOptions& opt) {
  SimulationResult out;
  const Field a = damping_field(profile, grid);
  double a_inf = 0.0;
  for (std::size_t p : mask.fluid_nodes()) a_inf = std::max(a_inf, a[p]);
  out.dt = fitted_timestep(grid, opt.c_safety, opt.T_final);
  const long total = std::lround(opt.T_final / out.dt);

  WaveState s = init_state(data, grid, mask, a, out.dt);
  Stepper stepper(grid, mask, a, out.dt);
  const double outer_R = grid.extent() - 2.0 * grid.h();

  auto backward_power = [&] {
    return fluid_sum(grid, mask, [&](std::size_t p) {
      const double v = (s.u_curr[p] - s.u_prev[p]) / out.dt;
      return a[p] * v * v;
    });
  };
  auto damped_l2 = [&] { return fluid_sum(grid, mask, [&](std::size_t p) { return a[p] * s.u_curr[p] * s.u_curr[p]; }); };

  EnergyRecord acc;  // running integrals
  auto make_record = [&] {
    EnergyRecord r = acc;
    r.t = s.t;
    r.E = energy(s, grid, mask);
    r.l2_sq = l2_sq(s.u_curr, grid, mask);
    r.local_E = local_energy(s, opt.local_radius, grid, mask);
    r.outer_E = r.E - local_energy(s, outer_R, grid, mask);
    if (opt.cutoff) {
      const auto m = multiplier_terms(s, *opt.cutoff, a, grid, mask);
      r.X = m.X;
      r.v_l2_sq = m.v_l2_sq;
      const auto o = observability_sample(s, *opt.cutoff, a, grid, mask);
      r.E_w = o.E_w;
      r.obs_density = o.density;
    }
    if (opt.on_record) opt.on_record(s, r);
    out.records.push_back(r);
  };

  double power = backward_power();
  double al2 = damped_l2();
  make_record();
  const int every = std::max(1, opt.record_every);
  for (long k = 1; k <= total; ++k) {
    const auto d = stepper.advance(s);
    acc.dissipation_cum += 0.5 * out.dt * (power + d.backward_power);
    acc.scheme_dissipation_cum += d.centered_dissipation;
    acc.damped_l2_cum += 0.5 * out.dt * (al2 + d.damped_l2);
    power = d.backward_power;
    al2 = d.damped_l2;
    if (k % every == 0 || k == total) make_record();
  }
  out.steps = total;
  out.final_state = std::move(s);
  return out;
}

}  // namespace attenua
