#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "attenua/damping.hpp"
#include "attenua/domain_grid.hpp"
#include "attenua/errors.hpp"
#include "attenua/parallel.hpp"
#include "attenua/vec.hpp"

namespace attenua {

struct Ray {
  Vec2 x;
  Vec2 v;
};

// Membership test for the control region omega. Built either from an analytic
// description or from a node mask (nearest-node lookup).
class OmegaRegion {
 public:
  using Predicate = std::function<bool(Vec2)>;

  OmegaRegion(std::string description, Predicate contains)
      : description_(std::move(description)), contains_(std::move(contains)) {}

  bool contains(Vec2 x) const { return contains_(x); }
  const std::string& description() const { return description_; }

  static OmegaRegion everywhere() {
    return {"all", [](Vec2) { return true; }};
  }
  static OmegaRegion nothing() {
    return {"none", [](Vec2) { return false; }};
  }
  // { |x| >= r }
  static OmegaRegion outside_radius(double r) {
    return {"|x|>=" + std::to_string(r), [r](Vec2 x) { return norm(x) >= r; }};
  }
  // Everything except the closed box [x0, x1] x [y0, y1], so omega stays open.
  static OmegaRegion excluding_box(double x0, double x1, double y0, double y1) {
    return {"outside box", [=](Vec2 x) { return !(x.x >= x0 && x.x <= x1 && x.y >= y0 && x.y <= y1); }};
  }
  // { a(x) > eps0 } evaluated from the analytic profile.
  static OmegaRegion from_profile(const DampingProfile& profile) {
    auto p = std::make_shared<const DampingProfile>(profile);
    return {"a(x)>eps0", [p](Vec2 x) { return eval_damping(*p, x) > p->eps0; }};
  }
  static OmegaRegion from_mask(const Grid& grid, OmegaMask mask) {
    auto g = std::make_shared<const Grid>(grid);
    auto m = std::make_shared<const OmegaMask>(std::move(mask));
    return {"node mask", [g, m](Vec2 x) { return static_cast<bool>((*m)[g->nearest(x)]); }};
  }

  // omega intersected with the open ball B_R.
  OmegaRegion within_ball(double R) const {
    auto inner = contains_;
    return {description_ + " & |x|<" + std::to_string(R),
            [inner, R](Vec2 x) { return norm(x) < R && inner(x); }};
  }

 private:
  std::string description_;
  Predicate contains_;
};

struct TrajectoryPoint {
  double t;
  Vec2 x;
  Vec2 v;
  bool impact = false;
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;
  double path_length = 0.0;
  int impacts = 0;
  bool low_confidence = false;
};

namespace detail {

constexpr double kEventTolerance = 1e-12;
constexpr double kTangentialThreshold = 1e-6;

// One straight piece of a billiard path, possibly ending on the obstacle.
struct Segment {
  Vec2 start;
  Vec2 end;
  Vec2 v;
  double length;
  std::optional<std::size_t> disk;  // set when the segment ends on a disk
};

// Straight motion from x along v for at most max_step, stopping at the first
// crossing of the obstacle boundary. The crossing is located by bisection on
// the disk's signed distance.
inline Segment next_segment(const Obstacle& obstacle, Vec2 x, Vec2 v, double max_step) {
  Segment seg{x, x + max_step * v, v, max_step, std::nullopt};
  for (std::size_t k = 0; k < obstacle.disks.size(); ++k) {
    const Disk& d = obstacle.disks[k];
    const Vec2 rel = x - d.center;
    if (dot(rel, v) >= 0.0) continue;  // moving away from a convex disk
    const double s_close = std::min(-dot(rel, v), seg.length);
    auto dist = [&](double s) { return norm(x + s * v - d.center) - d.radius; };
    if (dist(s_close) >= 0.0) continue;
    double lo = 0.0;
    double hi = s_close;
    while (hi - lo > kEventTolerance) {
      const double mid = 0.5 * (lo + hi);
      (dist(mid) > 0.0 ? lo : hi) = mid;
    }
    if (lo < seg.length) {
      seg.length = lo;
      seg.disk = k;
    }
  }
  if (seg.disk) {
    const Disk& d = obstacle.disks[*seg.disk];
    seg.end = d.center + d.radius * normalized(x + seg.length * v - d.center);
  } else {
    seg.end = x + seg.length * v;
  }
  return seg;
}

struct Reflection {
  Vec2 v;
  bool tangential;
};

inline Reflection reflect_at(const Obstacle& obstacle, std::size_t disk, Vec2 at, Vec2 v) {
  const Vec2 n = normalized(at - obstacle.disks[disk].center);
  return {normalized(reflect(v, n)), std::abs(dot(v, n)) < kTangentialThreshold};
}

inline void check_start(const Obstacle& obstacle, const Ray& ray, double dt_ray) {
  if (signed_distance(obstacle, ray.x) < -1e-9)
    throw Error(ErrorKind::Precondition, "ray starts inside the obstacle");
  if (!(dt_ray > 0.0))
    throw Error(ErrorKind::Precondition, "dt_ray must be positive");
  if (!obstacle.disks.empty() && dt_ray > obstacle.min_radius() / 8.0 + 1e-15)
    throw Error(ErrorKind::Precondition, "dt_ray must not exceed min obstacle radius / 8");
}

}  // namespace detail

// Default ray step: r_min / 8 capped at 0.05.
inline double default_ray_step(const Obstacle& obstacle) {
  return std::min(0.05, obstacle.disks.empty() ? 0.05 : obstacle.min_radius() / 8.0);
}

// Specular billiard trajectory at unit speed on [0, T_max]. Points are
// recorded after every step and at every impact (with the reflected velocity).
inline Trajectory trace_ray(const Ray& ray, const Obstacle& obstacle, double dt_ray, double T_max) {
  detail::check_start(obstacle, ray, dt_ray);
  Trajectory traj;
  Vec2 x = ray.x;
  Vec2 v = normalized(ray.v);
  double t = 0.0;
  traj.points.push_back({t, x, v, false});
  while (t < T_max) {
    const auto seg = detail::next_segment(obstacle, x, v, std::min(dt_ray, T_max - t));
    t += seg.length;
    traj.path_length += norm(seg.end - seg.start);
    x = seg.end;
    if (seg.disk) {
      const auto r = detail::reflect_at(obstacle, *seg.disk, x, v);
      v = r.v;
      traj.low_confidence = traj.low_confidence || r.tangential;
      ++traj.impacts;
      traj.points.push_back({t, x, v, true});
    } else {
      traj.points.push_back({t, x, v, false});
    }
    if (seg.length <= 0.0 && !seg.disk) break;
  }
  return traj;
}

struct EntryResult {
  std::optional<double> time;  // empty: no entry before T
  bool low_confidence = false;
  double max_radius = 0.0;     // largest |x| seen before entry (or T)
};

// First time t < T at which the billiard ray lies in omega.
inline EntryResult time_to_omega(const Ray& ray, const Obstacle& obstacle, const OmegaRegion& omega,
                                 double T, double dt_ray) {
  detail::check_start(obstacle, ray, dt_ray);
  EntryResult out;
  Vec2 x = ray.x;
  Vec2 v = normalized(ray.v);
  out.max_radius = norm(x);
  if (omega.contains(x)) {
    out.time = 0.0;
    return out;
  }
  double t = 0.0;
  while (t < T) {
    const auto seg = detail::next_segment(obstacle, x, v, std::min(dt_ray, T - t));
    if (omega.contains(seg.end)) {
      double lo = 0.0;
      double hi = seg.length;
      while (hi - lo > detail::kEventTolerance) {
        const double mid = 0.5 * (lo + hi);
        (omega.contains(seg.start + mid * seg.v) ? hi : lo) = mid;
      }
      const double entry = t + hi;
      if (entry < T) {
        out.time = entry;
        out.max_radius = std::max(out.max_radius, norm(seg.start + hi * seg.v));
        return out;
      }
      return out;
    }
    t += seg.length;
    x = seg.end;
    out.max_radius = std::max(out.max_radius, norm(x));
    if (seg.disk) {
      const auto r = detail::reflect_at(obstacle, *seg.disk, x, v);
      v = r.v;
      out.low_confidence = out.low_confidence || r.tangential;
    } else if (seg.length <= 0.0) {
      break;
    }
  }
  return out;
}

struct GccSampling {
  double T = 10.0;
  int n_pos = 32;
  int n_dir = 64;
  double radius = 3.0;     // sample starting points in B_radius
  double dt_ray = 0.0;     // 0: default_ray_step(obstacle)
  double boundary_offset = 1e-7;
};

struct GccReport {
  bool controlled = false;
  double T = 0.0;
  double max_entry_time = 0.0;  // +inf when some sampled ray never enters
  Ray worst_ray{};
  std::size_t samples = 0;
  double low_confidence_fraction = 0.0;
};

// Starting points: a uniform n_pos x n_pos lattice over the sampling box plus
// n_pos points just off each disk boundary and just inside |x| = radius,
// restricted to (Omega \ omega) intersected with B_radius.
inline std::vector<Vec2> gcc_start_points(const Obstacle& obstacle, const OmegaRegion& omega,
                                          const GccSampling& s) {
  std::vector<Vec2> pts;
  auto keep = [&](Vec2 x) {
    if (norm(x) < s.radius && signed_distance(obstacle, x) > 0.0 && !omega.contains(x)) pts.push_back(x);
  };
  for (int j = 0; j < s.n_pos; ++j)
    for (int i = 0; i < s.n_pos; ++i)
      keep({-s.radius + 2.0 * s.radius * i / (s.n_pos - 1), -s.radius + 2.0 * s.radius * j / (s.n_pos - 1)});
  for (int k = 0; k < s.n_pos; ++k) {
    const double th = 2.0 * std::numbers::pi * k / s.n_pos;
    const Vec2 dir{std::cos(th), std::sin(th)};
    for (const auto& d : obstacle.disks) keep(d.center + (d.radius + s.boundary_offset) * dir);
    keep((s.radius * (1.0 - 1e-9)) * dir);
  }
  return pts;
}

namespace detail {

struct SampledEntries {
  std::vector<Ray> rays;
  std::vector<EntryResult> results;
};

inline SampledEntries sample_entries(const Obstacle& obstacle, const OmegaRegion& omega, const GccSampling& s) {
  if (s.n_pos < 16 || s.n_dir < 16)
    throw Error(ErrorKind::Precondition, "GCC sampling needs at least 16 positions and 16 directions");
  const double dt_ray = s.dt_ray > 0.0 ? s.dt_ray : default_ray_step(obstacle);
  SampledEntries out;
  const auto starts = gcc_start_points(obstacle, omega, s);
  out.rays.reserve(starts.size() * static_cast<std::size_t>(s.n_dir));
  for (const Vec2& x : starts)
    for (int k = 0; k < s.n_dir; ++k) {
      const double th = 2.0 * std::numbers::pi * k / s.n_dir;
      out.rays.push_back({x, {std::cos(th), std::sin(th)}});
    }
  out.results.resize(out.rays.size());
  parallel_for(out.rays.size(), [&](std::size_t i) {
    out.results[i] = time_to_omega(out.rays[i], obstacle, omega, s.T, dt_ray);
  });
  return out;
}

inline GccReport summarize(const SampledEntries& e, double T) {
  GccReport rep;
  rep.T = T;
  rep.samples = e.rays.size();
  std::size_t low = 0;
  std::size_t worst = 0;
  double worst_time = -1.0;
  for (std::size_t i = 0; i < e.rays.size(); ++i) {
    const double ti = e.results[i].time.value_or(std::numeric_limits<double>::infinity());
    if (ti > worst_time) {
      worst_time = ti;
      worst = i;
    }
    if (e.results[i].low_confidence) ++low;
  }
  rep.max_entry_time = e.rays.empty() ? 0.0 : worst_time;
  if (!e.rays.empty()) rep.worst_ray = e.rays[worst];
  rep.controlled = rep.max_entry_time < T;
  rep.low_confidence_fraction =
      e.rays.empty() ? 0.0 : static_cast<double>(low) / static_cast<double>(e.rays.size());
  return rep;
}

}  // namespace detail

// Sampled GCC check: max over sampled rays of the first entry time into omega.
// Sampling can falsify or support control, never prove it.
inline GccReport check_gcc(const Obstacle& obstacle, const OmegaRegion& omega, const GccSampling& s) {
  return detail::summarize(detail::sample_entries(obstacle, omega, s), s.T);
}

struct LocalizedGccReport {
  GccReport report;
  std::size_t stayed_in_ball = 0;  // rays that entered omega_1 without leaving B_L
  std::size_t left_ball = 0;       // rays that reached |x| >= L first
};

// Rays started in B_L must enter omega_1 = omega & B_2L before T. Each ray
// either stays in B_L (and meets omega there) or crosses |x| = L, after which
// Hyp A puts it in omega_1.
inline LocalizedGccReport check_localized_gcc(const Obstacle& obstacle, const OmegaRegion& omega, double L,
                                              GccSampling s) {
  s.radius = L;
  const auto entries = detail::sample_entries(obstacle, omega.within_ball(2.0 * L), s);
  LocalizedGccReport out;
  out.report = detail::summarize(entries, s.T);
  for (const auto& r : entries.results) {
    if (r.max_radius >= L)
      ++out.left_ball;
    else
      ++out.stayed_in_ball;
  }
  return out;
}

}  // namespace attenua
