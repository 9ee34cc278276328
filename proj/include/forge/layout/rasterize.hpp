#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "forge/layout/scene.hpp"
#include "forge/layout/types.hpp"

namespace forge::layout {

namespace detail {

// Cells whose centres can fall in [lo, hi] (grid-relative coordinates),
// widened by one cell; the exact test happens per cell.
struct IndexRange {
  int first = 0;
  int last = -1;
};

inline IndexRange candidate_range(double lo, double hi, const GridSpec& spec) {
  const double m = spec.meters_per_cell();
  const double half = spec.resolution / 2.0;
  const double a = std::floor(lo / m + half - 0.5) - 1;
  const double b = std::ceil(hi / m + half - 0.5) + 1;
  IndexRange r;
  r.first = static_cast<int>(std::max(0.0, a));
  r.last = static_cast<int>(std::min(static_cast<double>(spec.resolution - 1), b));
  return r;
}

// Top view: world X/Z at the centre of (row, col).
inline double top_cell_x(const ShelfFrame& f, const GridSpec& s, int col) {
  return f.origin.x + s.cell_center(col);
}
inline double top_cell_z(const ShelfFrame& f, const GridSpec& s, int row) {
  return f.origin.z + s.cell_center(row);
}
// Front view: world Y at the centre of `row`.
inline double front_cell_y(const ShelfFrame& f, const GridSpec& s, int row) {
  return f.origin.y - s.cell_center(row);
}

}  // namespace detail

/// Bird's-eye occupancy per shelf level. A cell is under a shape when its
/// centre lies inside the shape (boundary inclusive). Labels are amodal: no
/// occlusion reasoning.
inline LayoutStack rasterize_top_view(const SceneGraph& scene, const ShelfFrame& frame,
                                      const GridSpec& spec, std::span<const int> visible) {
  LayoutStack out(View::Top, spec.num_shelves, spec.resolution);
  const double ox = frame.origin.x;
  const double oz = frame.origin.z;

  for (int id : visible) {
    const Rack* rack = scene.find_rack(id);
    if (rack == nullptr) continue;
    for (const auto& shelf : rack->shelves) {
      if (shelf.level >= spec.num_shelves) continue;
      const auto cols = detail::candidate_range(shelf.x_min - ox, shelf.x_max - ox, spec);
      const auto rows = detail::candidate_range(shelf.z_min - oz, shelf.z_max - oz, spec);
      for (int r = rows.first; r <= rows.last; ++r) {
        const double z = detail::top_cell_z(frame, spec, r);
        for (int c = cols.first; c <= cols.last; ++c) {
          const double x = detail::top_cell_x(frame, spec, c);
          if (shelf.covers(x, z) && out.at(shelf.level, r, c) == CellClass::Background) {
            out.set(shelf.level, r, c, CellClass::Unoccupied);
          }
        }
      }
      for (const auto& box : shelf.boxes) {
        const OrientedRect fp = box.footprint();
        const Vec2 half = fp.aabb_half();
        const auto bc = detail::candidate_range(box.center.x - half.x - ox, box.center.x + half.x - ox, spec);
        const auto br = detail::candidate_range(box.center.z - half.y - oz, box.center.z + half.y - oz, spec);
        for (int r = br.first; r <= br.last; ++r) {
          const double z = detail::top_cell_z(frame, spec, r);
          for (int c = bc.first; c <= bc.last; ++c) {
            const double x = detail::top_cell_x(frame, spec, c);
            if (shelf.covers(x, z) && fp.contains({x, z})) {
              out.set(shelf.level, r, c, CellClass::Occupied);
            }
          }
        }
      }
    }
  }
  return out;
}

/// Frontal occupancy per shelf level: the band from a shelf surface up to
/// the next shelf (or the configured clearance) and the box silhouettes in
/// it, projected along Z.
inline LayoutStack rasterize_front_view(const SceneGraph& scene, const ShelfFrame& frame,
                                        const GridSpec& spec, std::span<const int> visible) {
  LayoutStack out(View::Front, spec.num_shelves, spec.resolution);
  const double ox = frame.origin.x;
  const double oy = frame.origin.y;

  for (int id : visible) {
    const Rack* rack = scene.find_rack(id);
    if (rack == nullptr) continue;
    for (const auto& shelf : rack->shelves) {
      if (shelf.level >= spec.num_shelves) continue;
      const double y_lo = shelf.elevation;
      const double y_hi = scene.band_top(*rack, shelf.level);
      // Front rows grow downwards: row coordinate = origin.y - world y.
      const auto cols = detail::candidate_range(shelf.x_min - ox, shelf.x_max - ox, spec);
      const auto rows = detail::candidate_range(oy - y_hi, oy - y_lo, spec);
      auto in_band = [&](double x, double y) {
        return x >= shelf.x_min && x <= shelf.x_max && y >= y_lo && y <= y_hi;
      };
      for (int r = rows.first; r <= rows.last; ++r) {
        const double y = detail::front_cell_y(frame, spec, r);
        for (int c = cols.first; c <= cols.last; ++c) {
          const double x = detail::top_cell_x(frame, spec, c);
          if (in_band(x, y) && out.at(shelf.level, r, c) == CellClass::Background) {
            out.set(shelf.level, r, c, CellClass::Unoccupied);
          }
        }
      }
      for (const auto& box : shelf.boxes) {
        const double hx = box.footprint().aabb_half().x;
        const double bx0 = box.center.x - hx;
        const double bx1 = box.center.x + hx;
        const auto bc = detail::candidate_range(bx0 - ox, bx1 - ox, spec);
        const auto br = detail::candidate_range(oy - box.top(), oy - box.bottom(), spec);
        for (int r = br.first; r <= br.last; ++r) {
          const double y = detail::front_cell_y(frame, spec, r);
          if (y < box.bottom() || y > box.top()) continue;
          for (int c = bc.first; c <= bc.last; ++c) {
            const double x = detail::top_cell_x(frame, spec, c);
            if (x >= bx0 && x <= bx1 && in_band(x, y)) {
              out.set(shelf.level, r, c, CellClass::Occupied);
            }
          }
        }
      }
    }
  }
  return out;
}

inline LayoutStack rasterize(View view, const SceneGraph& scene, const ShelfFrame& frame,
                             const GridSpec& spec, std::span<const int> visible) {
  return view == View::Top ? rasterize_top_view(scene, frame, spec, visible)
                           : rasterize_front_view(scene, frame, spec, visible);
}

}  // namespace forge::layout
