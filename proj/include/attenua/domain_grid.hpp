#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "attenua/errors.hpp"
#include "attenua/vec.hpp"

namespace attenua {

struct Disk {
  Vec2 center;
  double radius = 1.0;
};

// The obstacle O is a finite union of closed disks. An empty union is allowed
// (free space or a closed cavity).
struct Obstacle {
  std::vector<Disk> disks;
  int dim = 2;

  double min_radius() const {
    double r = std::numeric_limits<double>::infinity();
    for (const auto& d : disks) r = std::min(r, d.radius);
    return r;
  }
};

// Negative inside O, positive in the exterior domain, zero on the boundary.
inline double signed_distance(const Obstacle& obstacle, Vec2 x) {
  double sd = std::numeric_limits<double>::infinity();
  for (const auto& d : obstacle.disks) sd = std::min(sd, norm(x - d.center) - d.radius);
  return sd;
}

// Index of the disk nearest to x (the one realizing signed_distance).
inline std::size_t nearest_disk(const Obstacle& obstacle, Vec2 x) {
  std::size_t best = 0;
  double sd = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < obstacle.disks.size(); ++k) {
    const auto& d = obstacle.disks[k];
    const double s = norm(x - d.center) - d.radius;
    if (s < sd) {
      sd = s;
      best = k;
    }
  }
  return best;
}

// Uniform Cartesian grid on the box [-R_max, R_max]^2. Node (i, j) sits at
// (-R_max + i h, -R_max + j h); flat index is j * n + i.
class Grid {
 public:
  Grid(double h, double extent) : h_(h), extent_(extent) {
    if (!(h > 0.0) || !(extent > 0.0))
      throw Error(ErrorKind::Precondition, "grid spacing and extent must be positive");
    const double cells = 2.0 * extent / h;
    const double rounded = std::round(cells);
    if (std::abs(cells - rounded) > 1e-9 * std::max(1.0, cells))
      throw Error(ErrorKind::Precondition, "2*R_max/h must be an integer");
    n_ = static_cast<int>(rounded) + 1;
    if (n_ % 2 == 0 || n_ < 3)
      throw Error(ErrorKind::Precondition, "node count per axis must be odd and >= 3");
  }

  double h() const { return h_; }
  double extent() const { return extent_; }
  int n_per_axis() const { return n_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_); }
  int dim() const { return 2; }

  std::size_t flat(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(i);
  }
  int col(std::size_t p) const { return static_cast<int>(p % static_cast<std::size_t>(n_)); }
  int row(std::size_t p) const { return static_cast<int>(p / static_cast<std::size_t>(n_)); }

  double coord(int i) const { return -extent_ + i * h_; }
  Vec2 position(int i, int j) const { return {coord(i), coord(j)}; }
  Vec2 position(std::size_t p) const { return position(col(p), row(p)); }

  // Nearest node to x, clamped into the box.
  std::size_t nearest(Vec2 x) const {
    auto idx = [&](double c) {
      const int k = static_cast<int>(std::lround((c + extent_) / h_));
      return std::clamp(k, 0, n_ - 1);
    };
    return flat(idx(x.x), idx(x.y));
  }

 private:
  double h_;
  double extent_;
  int n_ = 0;
};

using Field = std::vector<double>;

enum class NodeTag : std::uint8_t { Fluid, Obstacle, DirichletInner, DirichletOuter };

// Half-open column range [begin, end) of consecutive FLUID nodes in one row.
struct FluidRun {
  int row;
  int begin;
  int end;
};

class DomainMask {
 public:
  DomainMask() = default;

  NodeTag tag(std::size_t p) const { return tags_[p]; }
  bool is_fluid(std::size_t p) const { return tags_[p] == NodeTag::Fluid; }
  std::size_t size() const { return tags_.size(); }

  // Compact index of a FLUID node, -1 for any other tag.
  std::ptrdiff_t fluid_index(std::size_t p) const { return fluid_index_[p]; }
  std::span<const std::size_t> fluid_nodes() const { return fluid_nodes_; }
  std::span<const FluidRun> runs() const { return runs_; }
  // runs()[row_begin(j) .. row_begin(j+1)) are the runs of row j.
  std::size_t row_begin(int j) const { return row_offsets_[static_cast<std::size_t>(j)]; }

  std::size_t count(NodeTag t) const {
    return static_cast<std::size_t>(std::count(tags_.begin(), tags_.end(), t));
  }

  // inf over FLUID nodes of |x|.
  double min_fluid_radius() const { return min_fluid_radius_; }

  bool operator==(const DomainMask& o) const { return tags_ == o.tags_; }

 private:
  friend DomainMask build_mask(const Obstacle&, const Grid&);

  std::vector<NodeTag> tags_;
  std::vector<std::ptrdiff_t> fluid_index_;
  std::vector<std::size_t> fluid_nodes_;
  std::vector<FluidRun> runs_;
  std::vector<std::size_t> row_offsets_;
  double min_fluid_radius_ = 0.0;
};

// Classifies every node: closed obstacle interior -> OBSTACLE, exterior nodes
// with an OBSTACLE 4-neighbor -> DIRICHLET_INNER (staircase boundary), box
// boundary -> DIRICHLET_OUTER, everything else FLUID.
inline DomainMask build_mask(const Obstacle& obstacle, const Grid& grid) {
  const double margin = grid.extent() - 4.0 * grid.h();
  for (const auto& d : obstacle.disks) {
    if (!(d.radius > 0.0) || !std::isfinite(d.radius))
      throw Error(ErrorKind::Precondition, "obstacle disk radius must be finite and positive");
    if (!(norm(d.center) + d.radius < margin))
      throw Error(ErrorKind::ObstacleTouchesBox,
                  "disk at (" + std::to_string(d.center.x) + ", " + std::to_string(d.center.y) +
                      ") r=" + std::to_string(d.radius) + " reaches within 4h of the box");
  }

  const int n = grid.n_per_axis();
  DomainMask m;
  m.tags_.assign(grid.size(), NodeTag::Fluid);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const std::size_t p = grid.flat(i, j);
      if (i == 0 || j == 0 || i == n - 1 || j == n - 1)
        m.tags_[p] = NodeTag::DirichletOuter;
      else if (signed_distance(obstacle, grid.position(i, j)) <= 0.0)
        m.tags_[p] = NodeTag::Obstacle;
    }
  }
  for (int j = 1; j < n - 1; ++j) {
    for (int i = 1; i < n - 1; ++i) {
      const std::size_t p = grid.flat(i, j);
      if (m.tags_[p] != NodeTag::Fluid) continue;
      const bool touches = m.tags_[grid.flat(i - 1, j)] == NodeTag::Obstacle ||
                           m.tags_[grid.flat(i + 1, j)] == NodeTag::Obstacle ||
                           m.tags_[grid.flat(i, j - 1)] == NodeTag::Obstacle ||
                           m.tags_[grid.flat(i, j + 1)] == NodeTag::Obstacle;
      if (touches) m.tags_[p] = NodeTag::DirichletInner;
    }
  }

  m.fluid_index_.assign(grid.size(), -1);
  m.row_offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  m.min_fluid_radius_ = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) {
    m.row_offsets_[static_cast<std::size_t>(j)] = m.runs_.size();
    int i = 0;
    while (i < n) {
      if (m.tags_[grid.flat(i, j)] != NodeTag::Fluid) {
        ++i;
        continue;
      }
      const int begin = i;
      while (i < n && m.tags_[grid.flat(i, j)] == NodeTag::Fluid) {
        const std::size_t p = grid.flat(i, j);
        m.fluid_index_[p] = static_cast<std::ptrdiff_t>(m.fluid_nodes_.size());
        m.fluid_nodes_.push_back(p);
        m.min_fluid_radius_ = std::min(m.min_fluid_radius_, norm(grid.position(i, j)));
        ++i;
      }
      m.runs_.push_back({j, begin, i});
    }
  }
  m.row_offsets_[static_cast<std::size_t>(n)] = m.runs_.size();
  if (m.fluid_nodes_.empty()) throw Error(ErrorKind::EmptyFluid, "no FLUID node in the domain");
  return m;
}

}  // namespace attenua
