#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "orbsim/rng.hpp"

namespace orbsim {

using Vec2 = Eigen::Vector2d;

/// Axis-aligned planar rectangle, min < max componentwise.
struct Region {
  Vec2 min = Vec2::Zero();
  Vec2 max = Vec2(15.0, 15.0);

  double width() const { return max.x() - min.x(); }
  double height() const { return max.y() - min.y(); }
  Vec2 center() const { return 0.5 * (min + max); }
  bool contains(const Vec2& p) const {
    return p.x() >= min.x() && p.x() <= max.x() && p.y() >= min.y() &&
           p.y() <= max.y();
  }
};

enum class DebrisState { Pending, Claimed, Grasped, Retrieved };

struct DebrisItem {
  int id = 0;
  Vec2 position = Vec2::Zero();
  Vec2 drift_velocity = Vec2::Zero();
  double tumble_rate = 0.0;  // rad/s
  double size = 0.2;         // m
  DebrisState state = DebrisState::Pending;
};

struct DebrisField {
  std::vector<DebrisItem> items;
  Region region;
};

enum class FieldKind { PoissonDisk, Grid, DenseCluster, Dispersed };

struct FieldSpec {
  FieldKind kind = FieldKind::PoissonDisk;
  int count = 20;            // DenseCluster target count
  int nx = 5;                // Grid columns
  int ny = 5;                // Grid rows
  double jitter = 0.3;       // Grid displacement, fraction of cell half-width
  double r_min = 1.0;        // minimum spacing (m)
  double cluster_std = 0.8;  // DenseCluster blob standard deviation (m)
  double item_size = 0.2;    // m
  bool tumbling = false;
  double drift_speed_max = 0.05;  // m/s
  double tumble_rate_max = 0.5;   // rad/s
};

/// Per-kind parameter defaults: Dispersed widens r_min to 3.0, DenseCluster
/// tightens it to 0.25 with count 20 and std 0.8, Grid is 5x5 jitter 0.3.
FieldSpec default_spec(FieldKind kind);

/// Bridson dart throwing: maximal sample with pairwise distances >= r_min,
/// k candidate attempts per active point.  Deterministic given seed.
std::vector<Vec2> poisson_disk_sample(const Region& region, double r_min,
                                      int k, uint64_t seed);

/// nx*ny points at cell centers, each displaced uniformly within
/// +-jitter * cell_size / 2 per axis.  jitter < 0.5 keeps points in-cell.
std::vector<Vec2> grid_sample(const Region& region, int nx, int ny,
                              double jitter, uint64_t seed);

/// Instantiates a debris field from a spec.  All items start Pending; with
/// tumbling enabled each gets a uniform drift velocity direction, a speed in
/// [0, drift_speed_max), and a tumble rate in [0, tumble_rate_max).
DebrisField make_field(const FieldSpec& spec, const Region& region,
                       uint64_t seed);

/// Columns: id,x,y,vx,vy,tumble_rate,size.  State is not serialized; loaded
/// items start Pending.
std::string field_to_csv(const DebrisField& field);
DebrisField field_from_csv(const std::string& text, const Region& region);

}  // namespace orbsim
