#include "orbsim/debris.hpp"

#include <cmath>
#include <numbers>

#include "orbsim/csv.hpp"
#include "orbsim/errors.hpp"

namespace orbsim {

namespace {

void check_region(const Region& region) {
  if (!region.min.allFinite() || !region.max.allFinite())
    throw NonFiniteInput("region bounds contain non-finite values");
  if (!(region.min.x() < region.max.x() && region.min.y() < region.max.y()))
    throw ValidationError("region", "min must be below max componentwise");
}

}  // namespace

FieldSpec default_spec(FieldKind kind) {
  FieldSpec spec;
  spec.kind = kind;
  switch (kind) {
    case FieldKind::PoissonDisk:
      spec.r_min = 1.0;
      break;
    case FieldKind::Dispersed:
      spec.r_min = 3.0;
      break;
    case FieldKind::DenseCluster:
      spec.count = 20;
      spec.r_min = 0.25;
      spec.cluster_std = 0.8;
      break;
    case FieldKind::Grid:
      spec.nx = 5;
      spec.ny = 5;
      spec.jitter = 0.3;
      break;
  }
  return spec;
}

std::vector<Vec2> poisson_disk_sample(const Region& region, double r_min,
                                      int k, uint64_t seed) {
  check_region(region);
  if (!(r_min > 0.0) || !std::isfinite(r_min))
    throw InvalidRadius("minimum spacing must be positive");
  if (k < 1) throw ValidationError("k", "candidate attempts must be >= 1");

  Rng rng(seed);
  const double cell = r_min / std::numbers::sqrt2;
  const int gx = std::max(1, static_cast<int>(std::ceil(region.width() / cell)));
  const int gy =
      std::max(1, static_cast<int>(std::ceil(region.height() / cell)));
  // One point per cell at most, since cell diagonal = r_min.
  std::vector<int> grid(static_cast<size_t>(gx) * gy, -1);
  auto cell_of = [&](const Vec2& p) {
    int ix = std::min(gx - 1, static_cast<int>((p.x() - region.min.x()) / cell));
    int iy = std::min(gy - 1, static_cast<int>((p.y() - region.min.y()) / cell));
    return std::pair<int, int>(ix, iy);
  };

  std::vector<Vec2> points;
  std::vector<size_t> active;

  auto far_enough = [&](const Vec2& p) {
    auto [ix, iy] = cell_of(p);
    for (int dy = -2; dy <= 2; ++dy) {
      for (int dx = -2; dx <= 2; ++dx) {
        int cx = ix + dx, cy = iy + dy;
        if (cx < 0 || cy < 0 || cx >= gx || cy >= gy) continue;
        int idx = grid[static_cast<size_t>(cy) * gx + cx];
        if (idx >= 0 && (points[idx] - p).norm() < r_min) return false;
      }
    }
    return true;
  };
  auto insert = [&](const Vec2& p) {
    auto [ix, iy] = cell_of(p);
    grid[static_cast<size_t>(iy) * gx + ix] = static_cast<int>(points.size());
    active.push_back(points.size());
    points.push_back(p);
  };

  insert({region.min.x() + rng.uniform() * region.width(),
          region.min.y() + rng.uniform() * region.height()});

  while (!active.empty()) {
    size_t pick = rng.uniform_int(active.size());
    const Vec2 base = points[active[pick]];
    bool placed = false;
    for (int attempt = 0; attempt < k; ++attempt) {
      double radius = r_min * (1.0 + rng.uniform());
      double angle = 2.0 * std::numbers::pi * rng.uniform();
      Vec2 cand = base + radius * Vec2(std::cos(angle), std::sin(angle));
      if (!region.contains(cand) || !far_enough(cand)) continue;
      insert(cand);
      placed = true;
      break;
    }
    if (!placed) {
      active[pick] = active.back();
      active.pop_back();
    }
  }
  return points;
}

std::vector<Vec2> grid_sample(const Region& region, int nx, int ny,
                              double jitter, uint64_t seed) {
  check_region(region);
  if (nx < 1 || ny < 1) throw InvalidGrid("grid needs nx, ny >= 1");
  if (!(jitter >= 0.0) || jitter >= 0.5 || !std::isfinite(jitter))
    throw InvalidGrid("jitter must lie in [0, 0.5)");

  Rng rng(seed);
  const double cw = region.width() / nx;
  const double ch = region.height() / ny;
  std::vector<Vec2> points;
  points.reserve(static_cast<size_t>(nx) * ny);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      double cx = region.min.x() + (ix + 0.5) * cw;
      double cy = region.min.y() + (iy + 0.5) * ch;
      double dx = rng.uniform(-1.0, 1.0) * jitter * cw * 0.5;
      double dy = rng.uniform(-1.0, 1.0) * jitter * ch * 0.5;
      points.emplace_back(cx + dx, cy + dy);
    }
  }
  return points;
}

namespace {

std::vector<Vec2> dense_cluster_sample(const FieldSpec& spec,
                                       const Region& region, Rng& rng) {
  if (spec.count < 1) throw ValidationError("count", "cluster count must be >= 1");
  if (!(spec.cluster_std > 0.0))
    throw ValidationError("cluster_std", "blob std must be positive");
  if (!(spec.r_min > 0.0)) throw InvalidRadius("minimum spacing must be positive");

  // Blob centers stay inset from the walls so clusters are not clipped.
  const int n_centers = 1 + static_cast<int>(rng.uniform_int(3));
  const double inset_x = 0.15 * region.width();
  const double inset_y = 0.15 * region.height();
  std::vector<Vec2> centers;
  for (int c = 0; c < n_centers; ++c) {
    centers.emplace_back(
        region.min.x() + inset_x + rng.uniform() * (region.width() - 2 * inset_x),
        region.min.y() + inset_y +
            rng.uniform() * (region.height() - 2 * inset_y));
  }

  std::vector<Vec2> points;
  const long max_attempts = 200L * spec.count;
  for (long attempt = 0;
       attempt < max_attempts && points.size() < static_cast<size_t>(spec.count);
       ++attempt) {
    const Vec2& center = centers[rng.uniform_int(centers.size())];
    Vec2 cand = center + spec.cluster_std * Vec2(rng.normal(), rng.normal());
    if (!region.contains(cand)) continue;
    bool ok = true;
    for (const Vec2& p : points) {
      if ((p - cand).norm() < spec.r_min) {
        ok = false;
        break;
      }
    }
    if (ok) points.push_back(cand);
  }
  return points;
}

}  // namespace

DebrisField make_field(const FieldSpec& spec, const Region& region,
                       uint64_t seed) {
  check_region(region);
  if (!(spec.item_size > 0.0))
    throw ValidationError("item_size", "item size must be positive");
  if (spec.drift_speed_max < 0.0)
    throw ValidationError("drift_speed_max", "drift speed must be >= 0");
  if (spec.tumble_rate_max < 0.0)
    throw ValidationError("tumble_rate_max", "tumble rate must be >= 0");

  std::vector<Vec2> points;
  Rng rng(derive_seed(seed, 1));
  switch (spec.kind) {
    case FieldKind::PoissonDisk:
    case FieldKind::Dispersed:
      points = poisson_disk_sample(region, spec.r_min, 30, seed);
      break;
    case FieldKind::Grid:
      points = grid_sample(region, spec.nx, spec.ny, spec.jitter, seed);
      break;
    case FieldKind::DenseCluster: {
      Rng cluster_rng(seed);
      points = dense_cluster_sample(spec, region, cluster_rng);
      break;
    }
  }

  DebrisField field;
  field.region = region;
  field.items.reserve(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    DebrisItem item;
    item.id = static_cast<int>(i);
    item.position = points[i];
    item.size = spec.item_size;
    if (spec.tumbling) {
      double angle = 2.0 * std::numbers::pi * rng.uniform();
      double speed = rng.uniform() * spec.drift_speed_max;
      item.drift_velocity = speed * Vec2(std::cos(angle), std::sin(angle));
      item.tumble_rate = rng.uniform() * spec.tumble_rate_max;
    }
    field.items.push_back(item);
  }
  return field;
}

std::string field_to_csv(const DebrisField& field) {
  CsvTable table({"id", "x", "y", "vx", "vy", "tumble_rate", "size"});
  for (const DebrisItem& item : field.items) {
    table.add_row({std::to_string(item.id), format_double(item.position.x()),
                   format_double(item.position.y()),
                   format_double(item.drift_velocity.x()),
                   format_double(item.drift_velocity.y()),
                   format_double(item.tumble_rate), format_double(item.size)});
  }
  return table.render();
}

DebrisField field_from_csv(const std::string& text, const Region& region) {
  auto rows = parse_csv(text);
  if (rows.empty()) throw ParseError("debris CSV has no header");
  const std::vector<std::string> expect = {"id", "x",           "y",   "vx",
                                           "vy", "tumble_rate", "size"};
  if (rows.front() != expect) throw ParseError("debris CSV header mismatch");

  DebrisField field;
  field.region = region;
  for (size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != expect.size())
      throw ParseError("debris CSV row " + std::to_string(r) +
                       " has wrong width");
    try {
      DebrisItem item;
      item.id = std::stoi(row[0]);
      item.position = {std::stod(row[1]), std::stod(row[2])};
      item.drift_velocity = {std::stod(row[3]), std::stod(row[4])};
      item.tumble_rate = std::stod(row[5]);
      item.size = std::stod(row[6]);
      field.items.push_back(item);
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      throw ParseError("debris CSV row " + std::to_string(r) +
                       " holds a non-numeric field");
    }
  }
  return field;
}

}  // namespace orbsim
