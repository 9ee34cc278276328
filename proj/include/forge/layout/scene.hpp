#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "forge/core/geometry.hpp"

namespace forge::layout {

/// One box. `center` is the world-space centre; `size` is (width along local
/// X, height, depth along local Z).
struct BoxInstance {
  int id = 0;
  Vec3 center;
  Vec3 size;
  double yaw = 0.0;
  int stack_level = 0;  // 0 rests on the shelf, k rests on level k-1
  int column = 0;       // boxes sharing a column form one stack
  int texture_id = 0;
  int color_id = 0;
  int reflectance_id = 0;

  OrientedRect footprint() const {
    return {{center.x, center.z}, size.x / 2, size.z / 2, yaw};
  }
  double bottom() const { return center.y - size.y / 2; }
  double top() const { return center.y + size.y / 2; }
  friend bool operator==(const BoxInstance&, const BoxInstance&) = default;
};

struct Shelf {
  int rack_id = 0;
  int level = 0;
  double elevation = 0.0;  // world Y of the shelf surface
  double x_min = 0.0, x_max = 0.0;
  double z_min = 0.0, z_max = 0.0;
  std::vector<BoxInstance> boxes;

  bool covers(double x, double z) const {
    return x >= x_min && x <= x_max && z >= z_min && z <= z_max;
  }
  friend bool operator==(const Shelf&, const Shelf&) = default;
};

struct Rack {
  int id = 0;
  Vec3 base;  // centre of the footprint on the floor
  double width = 0.0;
  double depth = 0.0;
  std::vector<double> shelf_heights;
  std::vector<Shelf> shelves;
  bool distractor = false;  // background clutter, never labelled
  int texture_id = 0;
  int color_id = 0;

  double x_min() const { return base.x - width / 2; }
  double x_max() const { return base.x + width / 2; }
  double z_min() const { return base.z - depth / 2; }
  double z_max() const { return base.z + depth / 2; }
  friend bool operator==(const Rack&, const Rack&) = default;
};

struct SurfaceAttributes {
  int texture_id = 0;
  int color_id = 0;
  friend bool operator==(const SurfaceAttributes&, const SurfaceAttributes&) = default;
};

enum class BackgroundKind { Wall, BusyWarehouse };

struct SceneGraph {
  std::vector<Rack> racks;
  SurfaceAttributes floor;
  SurfaceAttributes wall;
  BackgroundKind background = BackgroundKind::Wall;
  double row_z = 0.0;                 // world Z of the rack fronts
  std::vector<double> rack_spacing;   // gaps between consecutive racks
  double top_clearance = 2.0;         // band height above the topmost shelf

  const Rack* find_rack(int id) const {
    for (const auto& r : racks) {
      if (r.id == id) return &r;
    }
    return nullptr;
  }

  /// Top of the front-view band that starts at `shelf`.
  double band_top(const Rack& rack, int level) const {
    if (level + 1 < static_cast<int>(rack.shelf_heights.size())) {
      return rack.shelf_heights[level + 1];
    }
    return rack.shelf_heights[level] + top_clearance;
  }
  friend bool operator==(const SceneGraph&, const SceneGraph&) = default;
};

/// A stack of boxes on a shelf, reduced to its axis-aligned envelope. This
/// is the unit a layout can resolve: stacked boxes share a footprint and
/// abut vertically, so they form one blob in both views.
struct ColumnEnvelope {
  int rack_id = 0;
  int level = 0;
  int column = 0;
  int box_count = 0;
  Aabb bounds;  // world coordinates
};

inline std::vector<ColumnEnvelope> column_envelopes(const Rack& rack, int max_levels) {
  std::vector<ColumnEnvelope> out;
  for (const auto& shelf : rack.shelves) {
    if (shelf.level >= max_levels) continue;
    std::vector<ColumnEnvelope> cols;
    for (const auto& box : shelf.boxes) {
      const Vec2 half = box.footprint().aabb_half();
      const Aabb b{{box.center.x - half.x, box.bottom(), box.center.z - half.y},
                   {box.center.x + half.x, box.top(), box.center.z + half.y}};
      auto it = std::find_if(cols.begin(), cols.end(),
                             [&](const ColumnEnvelope& c) { return c.column == box.column; });
      if (it == cols.end()) {
        cols.push_back({rack.id, shelf.level, box.column, 1, b});
      } else {
        it->box_count++;
        it->bounds.min = {std::min(it->bounds.min.x, b.min.x), std::min(it->bounds.min.y, b.min.y),
                          std::min(it->bounds.min.z, b.min.z)};
        it->bounds.max = {std::max(it->bounds.max.x, b.max.x), std::max(it->bounds.max.y, b.max.y),
                          std::max(it->bounds.max.z, b.max.z)};
      }
    }
    out.insert(out.end(), cols.begin(), cols.end());
  }
  return out;
}

inline std::vector<ColumnEnvelope> column_envelopes(const SceneGraph& scene, int max_levels,
                                                    bool include_distractors = false) {
  std::vector<ColumnEnvelope> out;
  for (const auto& rack : scene.racks) {
    if (rack.distractor && !include_distractors) continue;
    auto cols = column_envelopes(rack, max_levels);
    out.insert(out.end(), cols.begin(), cols.end());
  }
  return out;
}

}  // namespace forge::layout
