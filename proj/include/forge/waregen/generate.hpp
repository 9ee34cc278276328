#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "forge/core/error.hpp"
#include "forge/core/rng.hpp"
#include "forge/layout/scene.hpp"
#include "forge/waregen/config.hpp"

namespace forge::waregen {

inline constexpr int kMaxPlacementAttempts = 1000;

namespace detail {

// Count drawn from one third of the configured range: sparse takes the
// lower third, moderate the middle, dense the upper.
inline int box_count_for(Density mode, Range<int> range, Rng& rng) {
  const int span = range.max - range.min;
  const int third = static_cast<int>(mode == Density::Sparse ? 0 : (mode == Density::Moderate ? 1 : 2));
  const int lo = range.min + (span * third) / 3;
  const int hi = range.min + (span * (third + 1)) / 3;
  return static_cast<int>(rng.uniform_int(lo, hi));
}

struct Interval {
  double lo, hi;
};

inline void fill_shelf(layout::Shelf& shelf, double band_height, const GenConfig& cfg,
                       Density mode, Rng& rng, int& next_box_id) {
  const int wanted = box_count_for(mode, cfg.boxes_per_shelf, rng);
  const double shelf_w = shelf.x_max - shelf.x_min;
  const double shelf_d = shelf.z_max - shelf.z_min;
  const double clear = band_height - cfg.band_margin;
  std::vector<Interval> taken;

  for (int column = 0; column < wanted; ++column) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxPlacementAttempts && !placed; ++attempt) {
      const double w = rng.uniform(cfg.box_width.min, cfg.box_width.max);
      const double d = rng.uniform(cfg.box_depth.min, cfg.box_depth.max);
      const double h = rng.uniform(cfg.box_height.min, cfg.box_height.max);
      const double yaw = rng.bernoulli(cfg.yaw_probability) ? rng.uniform(-cfg.max_yaw, cfg.max_yaw) : 0.0;
      const OrientedRect probe{{0, 0}, w / 2, d / 2, yaw};
      const Vec2 half = probe.aabb_half();
      if (2 * half.x > shelf_w || 2 * half.y > shelf_d || h > clear) continue;

      const double cx = rng.uniform(shelf.x_min + half.x, shelf.x_max - half.x);
      const double cz = rng.uniform(shelf.z_min + half.y, shelf.z_max - half.y);
      const Interval iv{cx - half.x, cx + half.x};
      const bool clash = std::any_of(taken.begin(), taken.end(), [&](const Interval& t) {
        return iv.lo < t.hi + cfg.box_gap && t.lo < iv.hi + cfg.box_gap;
      });
      if (clash) continue;

      taken.push_back(iv);
      placed = true;

      const int stack = static_cast<int>(rng.uniform_int(cfg.stack_height.min, cfg.stack_height.max));
      double bottom = shelf.elevation;
      double sw = w, sd = d, sh = h;
      for (int level = 0; level < stack; ++level) {
        if (level > 0) {
          sw = w * rng.uniform(cfg.stack_shrink, 1.0);
          sd = d * rng.uniform(cfg.stack_shrink, 1.0);
          sh = rng.uniform(cfg.box_height.min, cfg.box_height.max);
          if (bottom + sh > shelf.elevation + clear) break;
        }
        layout::BoxInstance box;
        box.id = next_box_id++;
        box.center = {cx, bottom + sh / 2, cz};
        box.size = {sw, sh, sd};
        box.yaw = yaw;
        box.stack_level = level;
        box.column = column;
        box.texture_id = static_cast<int>(rng.uniform_int(0, cfg.texture_variants - 1));
        box.color_id = static_cast<int>(rng.uniform_int(0, cfg.color_variants - 1));
        box.reflectance_id = static_cast<int>(rng.uniform_int(0, 3));
        shelf.boxes.push_back(box);
        bottom += sh;
      }
    }
    if (!placed) {
      if (taken.empty()) {
        throw Error(ErrorCode::GenerationInfeasible,
                    "no box fits on shelf " + std::to_string(shelf.level) + " of rack " +
                        std::to_string(shelf.rack_id) + " after " +
                        std::to_string(kMaxPlacementAttempts) + " attempts");
      }
      break;  // shelf is full
    }
  }
}

inline layout::Rack make_rack(int id, double x_min, double width, double depth, double row_z,
                              int shelves, Density mode, const GenConfig& cfg, Rng& rng,
                              bool distractor, int& next_box_id) {
  layout::Rack rack;
  rack.id = id;
  rack.width = width;
  rack.depth = depth;
  rack.base = {x_min + width / 2, 0.0, row_z - depth / 2};
  rack.distractor = distractor;
  rack.texture_id = static_cast<int>(rng.uniform_int(0, cfg.texture_variants - 1));
  rack.color_id = static_cast<int>(rng.uniform_int(0, cfg.color_variants - 1));

  double h = rng.uniform(cfg.first_shelf_height.min, cfg.first_shelf_height.max);
  for (int level = 0; level < shelves; ++level) {
    rack.shelf_heights.push_back(h);
    h += rng.uniform(cfg.shelf_spacing.min, cfg.shelf_spacing.max);
  }
  for (int level = 0; level < shelves; ++level) {
    layout::Shelf shelf;
    shelf.rack_id = id;
    shelf.level = level;
    shelf.elevation = rack.shelf_heights[level];
    shelf.x_min = rack.x_min();
    shelf.x_max = rack.x_max();
    shelf.z_min = rack.z_min();
    shelf.z_max = rack.z_max();
    const double band = level + 1 < shelves ? rack.shelf_heights[level + 1] - shelf.elevation
                                            : cfg.top_clearance;
    fill_shelf(shelf, band, cfg, mode, rng, next_box_id);
    rack.shelves.push_back(std::move(shelf));
  }
  return rack;
}

}  // namespace detail

/// Scene plus the density mode drawn for each labelled rack, in rack order.
struct GeneratedScene {
  layout::SceneGraph scene;
  std::vector<Density> rack_modes;
};

inline GeneratedScene generate_warehouse_detailed(const GenConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  GeneratedScene out;
  auto& scene = out.scene;
  scene.top_clearance = cfg.top_clearance;
  scene.row_z = 0.0;
  scene.floor = {static_cast<int>(rng.uniform_int(0, cfg.texture_variants - 1)),
                 static_cast<int>(rng.uniform_int(0, cfg.color_variants - 1))};
  scene.wall = {static_cast<int>(rng.uniform_int(0, cfg.texture_variants - 1)),
                static_cast<int>(rng.uniform_int(0, cfg.color_variants - 1))};

  const int racks = static_cast<int>(rng.uniform_int(cfg.rack_count.min, cfg.rack_count.max));
  int next_box_id = 0;
  double x = 0.0;
  for (int i = 0; i < racks; ++i) {
    if (i > 0) {
      const double gap = rng.uniform(cfg.rack_spacing.min, cfg.rack_spacing.max);
      scene.rack_spacing.push_back(gap);
      x += gap;
    }
    const double width = rng.uniform(cfg.rack_width.min, cfg.rack_width.max);
    const double depth = rng.uniform(cfg.rack_depth.min, cfg.rack_depth.max);
    const int shelves = static_cast<int>(rng.uniform_int(cfg.shelves_per_rack.min, cfg.shelves_per_rack.max));
    Rng rack_rng(derive_seed(seed, static_cast<std::uint64_t>(i) + 1));
    const auto mode = static_cast<Density>(rack_rng.weighted(cfg.density_weights));
    out.rack_modes.push_back(mode);
    auto rack = detail::make_rack(i, x, width, depth, scene.row_z, shelves, mode, cfg, rack_rng,
                                  false, next_box_id);
    x += width;
    scene.racks.push_back(std::move(rack));
  }

  // A busy background is a second row placed beyond the sensing range of
  // any camera on the aisle, so it never enters a label.
  if (rng.bernoulli(cfg.distractor_probability)) {
    scene.background = layout::BackgroundKind::BusyWarehouse;
    const double far_z = scene.row_z - cfg.max_range - 1.0;
    double bx = 0.0;
    for (int i = 0; i < racks; ++i) {
      const double width = rng.uniform(cfg.rack_width.min, cfg.rack_width.max);
      const int shelves = static_cast<int>(rng.uniform_int(cfg.shelves_per_rack.min, cfg.shelves_per_rack.max));
      Rng rack_rng(derive_seed(seed, 1000 + static_cast<std::uint64_t>(i)));
      const auto mode = static_cast<Density>(rack_rng.weighted(cfg.density_weights));
      auto rack = detail::make_rack(racks + i, bx, width, cfg.rack_depth.max, far_z, shelves, mode,
                                    cfg, rack_rng, true, next_box_id);
      bx += width + cfg.rack_spacing.max;
      scene.racks.push_back(std::move(rack));
    }
  } else {
    scene.background = layout::BackgroundKind::Wall;
  }
  return out;
}

inline layout::SceneGraph generate_warehouse(const GenConfig& cfg, std::uint64_t seed) {
  return generate_warehouse_detailed(cfg, seed).scene;
}

/// Mean over labelled shelves of the fraction of shelf width covered by
/// the X extents of box columns.
inline double mean_fill_fraction(const layout::SceneGraph& scene) {
  double total = 0;
  int shelves = 0;
  for (const auto& rack : scene.racks) {
    if (rack.distractor) continue;
    for (const auto& shelf : rack.shelves) {
      double covered = 0;
      for (const auto& box : shelf.boxes) {
        if (box.stack_level == 0) covered += 2 * box.footprint().aabb_half().x;
      }
      total += covered / (shelf.x_max - shelf.x_min);
      ++shelves;
    }
  }
  return shelves == 0 ? 0.0 : total / shelves;
}

}  // namespace forge::waregen
