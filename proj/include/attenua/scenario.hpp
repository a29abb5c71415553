#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "attenua/cavity.hpp"
#include "attenua/config.hpp"
#include "attenua/damping.hpp"
#include "attenua/decay_analysis.hpp"
#include "attenua/domain_grid.hpp"
#include "attenua/observables.hpp"
#include "attenua/ray_control.hpp"
#include "attenua/report.hpp"
#include "attenua/simulate.hpp"
#include "attenua/wave_solver.hpp"

#ifndef ATTENUA_VERSION
#define ATTENUA_VERSION "0.1.0"
#endif

namespace attenua {

using json = nlohmann::json;

enum class VerdictStatus { Pass, Fail, UnverifiedPrecondition };

inline std::string_view to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::Pass: return "PASS";
    case VerdictStatus::Fail: return "FAIL";
    case VerdictStatus::UnverifiedPrecondition: return "UNVERIFIED_PRECONDITION";
  }
  return "UNKNOWN";
}

struct Verdict {
  std::string name;
  VerdictStatus status = VerdictStatus::Fail;
  json detail = json::object();
};

struct RunManifest {
  std::string name;
  std::string config_text;
  std::string code_version = ATTENUA_VERSION;
  double wall_time_s = 0.0;
  std::vector<std::string> outputs;
  std::vector<Verdict> verdicts;
  std::optional<std::string> error;
  std::optional<ErrorKind> error_kind;
  json extras = json::object();

  // In-memory results, not serialized.
  std::vector<EnergySeries> series;
  std::optional<GccReport> gcc;

  bool passed() const {
    if (error || verdicts.empty()) return false;
    for (const auto& v : verdicts)
      if (v.status != VerdictStatus::Pass) return false;
    return true;
  }
};

inline json to_json(const RateVerdict& v) {
  return {{"quantity", v.quantity},
          {"claimed_p", v.claimed_p},
          {"fitted_exponent", v.fitted_exponent},
          {"fit_stderr", v.fit_stderr},
          {"fit_window", {v.t_lo, v.t_hi}},
          {"empirical_C", v.empirical_C},
          {"empirical_C_late", v.empirical_C_late},
          {"empirical_C_early", v.empirical_C_early},
          {"slack", v.slack},
          {"no_growth", v.no_growth},
          {"rate_ok", v.rate_ok},
          {"pass", v.pass}};
}

inline json to_json(const Ray& r) { return {{"x", {r.x.x, r.x.y}}, {"v", {r.v.x, r.v.y}}}; }

// max_entry_time is null when some sampled ray never entered omega.
inline json to_json(const GccReport& g) {
  json j = {{"controlled", g.controlled},
            {"T", g.T},
            {"max_entry_time", nullptr},
            {"worst_ray", to_json(g.worst_ray)},
            {"samples", g.samples},
            {"low_confidence_fraction", g.low_confidence_fraction}};
  if (std::isfinite(g.max_entry_time)) j["max_entry_time"] = g.max_entry_time;
  return j;
}

inline json to_json(const Verdict& v) {
  json j = v.detail;
  j["name"] = v.name;
  j["status"] = std::string(to_string(v.status));
  return j;
}

inline json to_json(const RunManifest& m) {
  json verdicts = json::array();
  for (const auto& v : m.verdicts) verdicts.push_back(to_json(v));
  json j = {{"name", m.name},
            {"config", m.config_text},
            {"code_version", m.code_version},
            {"wall_time_s", m.wall_time_s},
            {"outputs", m.outputs},
            {"verdicts", verdicts},
            {"passed", m.passed()},
            {"error", nullptr}};
  if (m.error) {
    j["error"] = *m.error;
    if (m.error_kind) j["error_kind"] = std::string(to_string(*m.error_kind));
  }
  for (const auto& [k, v] : m.extras.items()) j[k] = v;
  return j;
}

// amplitude * exp(-|x - c|^2 / width^2) on FLUID nodes.
inline void add_bump(Field& f, const BumpSpec& b, const Grid& grid, const DomainMask& mask) {
  const double inv_w2 = 1.0 / (b.width * b.width);
  for (std::size_t p : mask.fluid_nodes()) {
    const Vec2 d = grid.position(p) - b.center;
    f[p] += b.amplitude * std::exp(-dot(d, d) * inv_w2);
  }
}

// Seeded random bumps: centers at radius in [r_min, r_max] with uniform
// angle. Each u0 bump has amplitude in [0.5, 1.5]; each u1 bump in [-1, 1].
inline std::vector<std::pair<BumpSpec, BumpSpec>> random_bumps(const ScenarioConfig& c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto lerp = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  std::vector<std::pair<BumpSpec, BumpSpec>> out;
  for (int k = 0; k < c.random_bumps; ++k) {
    auto one = [&](double amp_lo, double amp_hi) {
      const double r = lerp(c.random_r_min, c.random_r_max);
      const double th = lerp(0.0, 2.0 * std::numbers::pi);
      BumpSpec b;
      b.center = {r * std::cos(th), r * std::sin(th)};
      b.width = lerp(c.random_w_min, c.random_w_max);
      b.amplitude = lerp(amp_lo, amp_hi);
      return b;
    };
    BumpSpec b0 = one(0.5, 1.5);
    BumpSpec b1 = one(-1.0, 1.0);
    out.emplace_back(b0, b1);
  }
  return out;
}

inline InitialData make_initial_data(const ScenarioConfig& c, const Grid& grid, const DomainMask& mask,
                                     std::uint64_t seed) {
  InitialData d = InitialData::zeros(grid);
  if (c.mode_kx > 0 && c.mode_ky > 0) {
    d.u0 = cavity_mode(grid, mask, c.mode_kx, c.mode_ky);
    return d;
  }
  for (const auto& b : c.u0_bumps) add_bump(d.u0, b, grid, mask);
  for (const auto& b : c.u1_bumps) add_bump(d.u1, b, grid, mask);
  for (const auto& [b0, b1] : random_bumps(c, seed)) {
    add_bump(d.u0, b0, grid, mask);
    add_bump(d.u1, b1, grid, mask);
  }
  return d;
}

// "profile" | "radial R" | "exclude_box x0 x1 y0 y1" | "all" | "none"
inline OmegaRegion make_omega(const ScenarioConfig& c) {
  std::istringstream in(c.omega);
  std::string head;
  in >> head;
  std::vector<double> args;
  std::string tok;
  while (in >> tok) args.push_back(detail::parse_number(tok, "gcc.omega"));
  if (head == "profile" && args.empty()) return OmegaRegion::from_profile(c.damping());
  if (head == "radial" && args.size() == 1) return OmegaRegion::outside_radius(args[0]);
  if (head == "exclude_box" && args.size() == 4) return OmegaRegion::excluding_box(args[0], args[1], args[2], args[3]);
  if (head == "all" && args.empty()) return OmegaRegion::everywhere();
  if (head == "none" && args.empty()) return OmegaRegion::nothing();
  throw Error(ErrorKind::ConfigError, "cannot parse gcc.omega '" + c.omega + "'");
}

inline GccSampling gcc_sampling(const ScenarioConfig& c) {
  GccSampling s;
  s.T = c.gcc_T;
  s.n_pos = c.n_pos;
  s.n_dir = c.n_dir;
  s.radius = c.gcc_radius.value_or(c.L);
  s.dt_ray = c.dt_ray;
  return s;
}

inline GccReport run_gcc(const ScenarioConfig& c) { return check_gcc(c.obstacle(), make_omega(c), gcc_sampling(c)); }

struct RunOptions {
  std::filesystem::path out_dir = ".";
  bool write_files = true;
  std::optional<std::uint64_t> seed;
};

namespace detail {

inline Verdict gated(Verdict v, bool preconditions_ok) {
  if (!preconditions_ok) v.status = VerdictStatus::UnverifiedPrecondition;
  return v;
}

inline Verdict from_rate(const std::string& name, const RateVerdict& r) {
  return {name, r.pass ? VerdictStatus::Pass : VerdictStatus::Fail, to_json(r)};
}

inline Verdict threshold_verdict(const std::string& name, double value, double limit, json extra = json::object()) {
  extra["value"] = value;
  extra["limit"] = limit;
  return {name, value <= limit ? VerdictStatus::Pass : VerdictStatus::Fail, extra};
}

// Last-quarter sup within factor of the earlier sup.
inline bool saturates(std::span<const double> t, std::span<const double> q, double factor, double& late,
                      double& early) {
  const double split = t.front() + 0.75 * (t.back() - t.front());
  late = 0.0;
  early = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    double& slot = t[i] >= split ? late : early;
    slot = std::max(slot, q[i]);
  }
  return late <= factor * early;
}

inline void run_decay(const ScenarioConfig& c, std::uint64_t seed, RunManifest& m) {
  const Obstacle obstacle = c.obstacle();
  const Grid grid(c.h, c.R_max);
  const DomainMask mask = build_mask(obstacle, grid);
  const DampingProfile profile = c.damping();
  const Field a = damping_field(profile, grid);

  const HypAReport hyp = verify_hyp_a(profile, grid, mask);
  m.extras["hyp_a"] = {{"holds", hyp.holds}};
  if (hyp.violating_point)
    m.extras["hyp_a"]["witness"] = {hyp.violating_point->x, hyp.violating_point->y};

  bool gcc_ok = false;
  double t_gcc = std::numeric_limits<double>::infinity();
  if (c.gcc_enabled) {
    m.gcc = check_gcc(obstacle, make_omega(c), gcc_sampling(c));
    m.extras["gcc"] = to_json(*m.gcc);
    gcc_ok = m.gcc->controlled;
    t_gcc = m.gcc->max_entry_time;
  } else {
    m.extras["gcc"] = "skipped";
  }
  const bool preconditions = hyp.holds && gcc_ok;

  const double T_final = c.effective_T_final();
  const double t_lo = c.window_lo.value_or(std::isfinite(t_gcc) ? 2.0 * t_gcc : 0.2 * T_final);
  const double t_hi = c.window_hi.value_or(0.8 * T_final);
  m.extras["fit_window"] = {t_lo, t_hi};

  std::optional<double> B;
  if (c.theorem == 2) {
    check_weight_constant(mask, c.B);
    B = c.B;
  } else if (c.B * mask.min_fluid_radius() >= 2.0) {
    B = c.B;
  }

  const InitialData base = make_initial_data(c, grid, mask, seed);
  SimulationOptions opt;
  opt.T_final = T_final;
  opt.c_safety = c.c_safety;
  opt.record_every = c.record_every;
  opt.local_radius = c.local_R.value_or(c.L);
  opt.cutoff = make_cutoff(grid, c.L, c.multiplier_weight());

  InitialData data = base;
  for (int n = 0; n <= c.cascade_n; ++n) {
    if (n > 0) data = apply_generator(data, a, grid, mask);
    auto res = simulate(grid, mask, profile, data, opt);
    EnergySeries s;
    s.scenario_id = c.name + (n > 0 ? ".n" + std::to_string(n) : "");
    s.records = std::move(res.records);
    s.norms = data_norms(base, a, grid, mask, n, B);
    m.series.push_back(std::move(s));
  }
  m.extras["norms"] = {{"I0", m.series.front().norms.I0}};
  if (m.series.front().norms.I1) m.extras["norms"]["I1"] = *m.series.front().norms.I1;

  const double eps0 = profile.eps0;
  double a_inf = 0.0;
  for (std::size_t p : mask.fluid_nodes()) a_inf = std::max(a_inf, a[p]);

  // Properties that hold for any run of the scheme.
  for (const auto& s : m.series) {
    const std::string suffix = s.scenario_id == c.name ? "" : s.scenario_id.substr(c.name.size());
    const auto& r = s.records;
    const double e0 = r.front().E;
    Verdict mono{"energy_monotone" + suffix, VerdictStatus::Pass, json::object()};
    try {
      validate_series(s);
    } catch (const Error& e) {
      mono.status = VerdictStatus::Fail;
      mono.detail["message"] = e.what();
    }
    m.verdicts.push_back(mono);
    m.verdicts.push_back(threshold_verdict("energy_identity" + suffix, energy_balance_residual(r, T_final), 1e-2));
    double outer = 0.0;
    for (const auto& rec : r) outer = std::max(outer, std::abs(rec.outer_E));
    m.verdicts.push_back(threshold_verdict("truncation" + suffix, e0 > 0.0 ? outer / e0 : 0.0, 1e-3,
                                           {{"shell_radius", grid.extent() - 2.0 * grid.h()}}));

    // Lemma bounds on X(t); they rely on a > eps0 where psi < 1 (Hyp A).
    const double k = c.multiplier_weight();
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& rec : r) {
      MultiplierTerms mt{rec.X, rec.v_l2_sq, rec.E};
      const auto bnd = multiplier_bounds(mt, eps0, a_inf, k);
      worst = std::max({worst, bnd.lower - rec.X, rec.X - bnd.upper});
    }
    Verdict mb = threshold_verdict("multiplier_bounds" + suffix, worst, 1e-10 * k * e0, {{"k", k}});
    m.verdicts.push_back(gated(mb, hyp.holds));
  }

  const auto& s0 = m.series.front();
  const auto t = s0.times();
  const auto E = s0.column(&EnergyRecord::E);
  const auto l2 = s0.column(&EnergyRecord::l2_sq);
  auto rate = [&](const std::string& name, std::span<const double> q, double p, double I) {
    try {
      return gated(from_rate(name, boundedness_certificate(name, t, q, p, I, t_lo, t_hi, c.slack)), preconditions);
    } catch (const Error& e) {
      return gated(Verdict{name, VerdictStatus::Fail, {{"message", e.what()}}}, preconditions);
    }
  };
  if (c.theorem == 1) {
    m.verdicts.push_back(rate("thm1.energy", E, 1.0, s0.norms.I0));
    m.verdicts.push_back(rate("thm1.l2", l2, 0.0, s0.norms.I0));
  } else {
    const double I1 = *s0.norms.I1;
    m.verdicts.push_back(rate("thm2.energy", E, 2.0, I1));
    m.verdicts.push_back(rate("thm2.l2", l2, 1.0, I1));
    // ||u(t)||^2 + int_0^t int a u^2, normalized by ||u0||^2 + ||d (u1 + a u0)||^2
    const double norm0 = l2_sq(base.u0, grid, mask) + (*s0.norms.weighted) * (*s0.norms.weighted);
    std::vector<double> q;
    for (const auto& rec : s0.records) q.push_back((rec.l2_sq + rec.damped_l2_cum) / norm0);
    double late = 0.0, early = 0.0;
    const bool ok = saturates(t, q, 1.1, late, early);
    m.verdicts.push_back(gated({"ikehata_l2", ok ? VerdictStatus::Pass : VerdictStatus::Fail,
                                {{"late_max", late}, {"early_max", early}, {"factor", 1.1}}},
                               preconditions));
  }
  if (c.cascade_n > 0) {
    try {
      const auto verdicts = cascade_verdicts(m.series, c.theorem == 2, t_lo, t_hi, c.slack);
      for (std::size_t n = 1; n < verdicts.size(); ++n)
        m.verdicts.push_back(gated(from_rate("cascade.E(" + std::to_string(n) + ")", verdicts[n]), preconditions));
    } catch (const Error& e) {
      m.verdicts.push_back(gated({"cascade", VerdictStatus::Fail, {{"message", e.what()}}}, preconditions));
    }
  }
}

struct CavityRun {
  EnergySeries series;
  double oracle_error = 0.0;  // max |A_h - A| / max |A|
  double drift = 0.0;         // max |E - E0| / E0
};

inline CavityRun run_cavity_once(const ScenarioConfig& c, double h, std::uint64_t seed) {
  const Grid grid(h, c.R_max);
  const DomainMask mask = build_mask(Obstacle{}, grid);
  const DampingProfile profile = c.damping();
  const InitialData data = make_initial_data(c, grid, mask, seed);
  const bool modal = c.mode_kx > 0 && c.mode_ky > 0;
  const Field phi = modal ? data.u0 : Field{};
  const double lambda = modal ? cavity_eigenvalue(c.R_max, c.mode_kx, c.mode_ky) : 0.0;

  CavityRun out;
  double worst = 0.0, peak = 0.0;
  SimulationOptions opt;
  opt.T_final = c.effective_T_final();
  opt.c_safety = c.c_safety;
  opt.record_every = c.record_every;
  opt.local_radius = c.R_max;
  if (modal)
    opt.on_record = [&](const WaveState& s, const EnergyRecord&) {
      const double exact = damped_mode_amplitude(lambda, profile.a_max, s.t);
      worst = std::max(worst, std::abs(modal_amplitude(s.u_curr, phi, grid, mask) - exact));
      peak = std::max(peak, std::abs(exact));
    };
  auto res = simulate(grid, mask, profile, data, opt);
  out.oracle_error = peak > 0.0 ? worst / peak : 0.0;
  const double e0 = res.records.front().E;
  for (const auto& r : res.records) out.drift = std::max(out.drift, std::abs(r.E - e0) / e0);
  out.series.scenario_id = c.name;
  out.series.records = std::move(res.records);
  return out;
}

inline void run_cavity(const ScenarioConfig& c, std::uint64_t seed, RunManifest& m) {
  auto run = run_cavity_once(c, c.h, seed);
  if (c.a_max == 0.0)
    m.verdicts.push_back(threshold_verdict("energy_conservation", run.drift, c.drift_tolerance,
                                           {{"steps", std::lround(c.effective_T_final() /
                                                                  fitted_timestep(Grid(c.h, c.R_max), c.c_safety,
                                                                                  c.effective_T_final()))}}));
  else
    m.verdicts.push_back(
        threshold_verdict("energy_identity", energy_balance_residual(run.series.records, c.effective_T_final()), 1e-2));
  if (c.mode_kx > 0 && c.mode_ky > 0)
    m.verdicts.push_back(threshold_verdict("ode_oracle", run.oracle_error, c.oracle_tolerance, {{"h", c.h}}));
  m.series.push_back(std::move(run.series));
}

inline void run_refinement(const ScenarioConfig& c, std::uint64_t seed, RunManifest& m) {
  if (c.mode_kx <= 0 || c.mode_ky <= 0) throw Error(ErrorKind::ConfigError, "refinement needs initial.mode");
  if (c.refinement_levels < 2) throw Error(ErrorKind::ConfigError, "refinement needs at least 2 levels");
  std::vector<double> hs, errors, orders;
  double h = c.h;
  for (int k = 0; k < c.refinement_levels; ++k, h /= 2.0) {
    auto run = run_cavity_once(c, h, seed);
    hs.push_back(h);
    errors.push_back(run.oracle_error);
    if (k + 1 == c.refinement_levels) m.series.push_back(std::move(run.series));
  }
  double min_order = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
    orders.push_back(std::log2(errors[k] / errors[k + 1]));
    min_order = std::min(min_order, orders.back());
  }
  json detail = {{"h", hs}, {"errors", errors}, {"orders", orders}};
  Verdict ord{"refinement.order", min_order >= c.min_order ? VerdictStatus::Pass : VerdictStatus::Fail, detail};
  ord.detail["value"] = min_order;
  ord.detail["limit"] = c.min_order;
  m.verdicts.push_back(ord);
  m.verdicts.push_back(threshold_verdict("refinement.finest_error", errors.back(), c.oracle_tolerance, {{"h", hs.back()}}));
}

}  // namespace detail

// Hyp A -> GCC -> simulation -> observables -> decay verdicts. Errors are
// recorded in the manifest (never thrown) and the manifest files are written
// whenever write_files is set.
inline RunManifest run_scenario(const ScenarioConfig& c, const RunOptions& o = {}) {
  const auto start = std::chrono::steady_clock::now();
  RunManifest m;
  m.name = c.name;
  m.config_text = c.source_text;
  const std::uint64_t seed = o.seed.value_or(c.seed);
  m.extras["seed"] = seed;
  try {
    switch (c.kind) {
      case ScenarioKind::Decay: detail::run_decay(c, seed, m); break;
      case ScenarioKind::Gcc: {
        m.gcc = run_gcc(c);
        m.extras["gcc"] = to_json(*m.gcc);
        const bool match = m.gcc->controlled == c.expect_controlled;
        m.verdicts.push_back({"gcc.controlled", match ? VerdictStatus::Pass : VerdictStatus::Fail,
                              {{"controlled", m.gcc->controlled}, {"expected", c.expect_controlled}}});
        break;
      }
      case ScenarioKind::Cavity: detail::run_cavity(c, seed, m); break;
      case ScenarioKind::Refinement: detail::run_refinement(c, seed, m); break;
    }
  } catch (const Error& e) {
    m.error = e.what();
    m.error_kind = e.kind();
  } catch (const std::exception& e) {
    m.error = e.what();
  }
  m.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (o.write_files) {
    const auto dir = o.out_dir;
    auto emit = [&](const std::string& file, const std::string& text) {
      write_text(dir / file, text);
      m.outputs.push_back((dir / file).string());
    };
    try {
      if (!m.series.empty()) {
        const auto& top = m.series.back();
        emit(c.name + ".energy.csv", energy_csv(top.records));
        for (std::size_t k = 0; k + 1 < m.series.size(); ++k)
          emit(c.name + ".n" + std::to_string(k) + ".energy.csv", energy_csv(m.series[k].records));
        const double p = c.kind == ScenarioKind::Decay ? (c.theorem == 2 ? 2.0 : 1.0) + c.cascade_n : 0.0;
        const auto fw = m.extras.value("fit_window", json::array({0.0, c.effective_T_final()}));
        emit(c.name + ".svg", decay_svg(top.times(), top.column(&EnergyRecord::E), p, fw[0].get<double>(),
                                        fw[1].get<double>(), c.name));
      }
      if (m.gcc) emit(c.name + ".gcc.json", to_json(*m.gcc).dump(2) + "\n");
      json verdicts = json::array();
      for (const auto& v : m.verdicts) verdicts.push_back(to_json(v));
      emit(c.name + ".verdicts.json", verdicts.dump(2) + "\n");
      m.outputs.push_back((dir / (c.name + ".manifest.json")).string());
      write_text(dir / (c.name + ".manifest.json"), to_json(m).dump(2) + "\n");
    } catch (const Error& e) {
      if (!m.error) {
        m.error = e.what();
        m.error_kind = e.kind();
      }
    }
  }
  return m;
}

// Manifest for a config that never parsed.
inline RunManifest failed_manifest(const std::string& name, const Error& e, const RunOptions& o) {
  RunManifest m;
  m.name = name;
  m.error = e.what();
  m.error_kind = e.kind();
  if (o.write_files) {
    try {
      m.outputs.push_back((o.out_dir / (name + ".manifest.json")).string());
      write_text(o.out_dir / (name + ".manifest.json"), to_json(m).dump(2) + "\n");
    } catch (const Error&) {
    }
  }
  return m;
}

}  // namespace attenua
