// Scene builders and brute-force oracles shared by the unit tests.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "forge/layout/scene.hpp"
#include "forge/layout/types.hpp"

namespace forge::test {

/// Rack whose front face sits at z = 0, extending into -Z.
inline layout::Rack make_rack(int id, double center_x, double width, double depth,
                              const std::vector<double>& heights) {
  layout::Rack r;
  r.id = id;
  r.base = {center_x, 0.0, -depth / 2};
  r.width = width;
  r.depth = depth;
  r.shelf_heights = heights;
  for (int level = 0; level < static_cast<int>(heights.size()); ++level) {
    layout::Shelf s;
    s.rack_id = id;
    s.level = level;
    s.elevation = heights[level];
    s.x_min = r.x_min();
    s.x_max = r.x_max();
    s.z_min = r.z_min();
    s.z_max = r.z_max();
    r.shelves.push_back(s);
  }
  return r;
}

/// Box resting on `shelf` (or on `below` height when stacked).
inline layout::BoxInstance& add_box(layout::Shelf& shelf, int id, int column, double x, double z,
                                    Vec3 size, double yaw = 0.0, double base = -1.0) {
  layout::BoxInstance b;
  b.id = id;
  b.column = column;
  const double y0 = base < 0 ? shelf.elevation : base;
  b.center = {x, y0 + size.y / 2, z};
  b.size = size;
  b.yaw = yaw;
  shelf.boxes.push_back(b);
  return shelf.boxes.back();
}

// ---- oracles --------------------------------------------------------------------

/// Point in convex polygon by cross products; boundary counts as inside.
template <std::size_t N>
bool in_convex(const std::array<Vec2, N>& poly, Vec2 p) {
  bool pos = false, neg = false;
  for (std::size_t i = 0; i < N; ++i) {
    const Vec2 a = poly[i], b = poly[(i + 1) % N];
    const double c = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    pos |= c > 1e-12;
    neg |= c < -1e-12;
  }
  return !(pos && neg);
}

/// Rotated footprint corners computed from scratch.
inline std::array<Vec2, 4> footprint_corners(const layout::BoxInstance& b) {
  const double c = std::cos(b.yaw), s = std::sin(b.yaw);
  std::array<Vec2, 4> out;
  const double hx = b.size.x / 2, hz = b.size.z / 2;
  const double sx[4] = {-1, 1, 1, -1}, sz[4] = {-1, -1, 1, 1};
  for (int k = 0; k < 4; ++k) {
    const double u = sx[k] * hx, v = sz[k] * hz;
    // Inverse of the rotation (x, z) -> (x c - z s, x s + z c).
    out[k] = {b.center.x + u * c + v * s, b.center.z - u * s + v * c};
  }
  return out;
}

inline double grid_center(const layout::GridSpec& g, int i) {
  return (i + 0.5 - g.resolution / 2.0) * g.extent / g.resolution;
}

/// Per-cell brute force over every visible shelf and box.
inline layout::LayoutStack oracle_top(const layout::SceneGraph& scene, const layout::ShelfFrame& frame,
                                      const layout::GridSpec& g, const std::vector<int>& visible) {
  layout::LayoutStack out(layout::View::Top, g.num_shelves, g.resolution);
  for (int ch = 0; ch < g.num_shelves; ++ch) {
    for (int r = 0; r < g.resolution; ++r) {
      for (int c = 0; c < g.resolution; ++c) {
        const double x = frame.origin.x + grid_center(g, c);
        const double z = frame.origin.z + grid_center(g, r);
        auto cls = layout::CellClass::Background;
        for (const auto& rack : scene.racks) {
          if (std::find(visible.begin(), visible.end(), rack.id) == visible.end()) continue;
          for (const auto& shelf : rack.shelves) {
            if (shelf.level != ch) continue;
            const bool on = x >= shelf.x_min && x <= shelf.x_max && z >= shelf.z_min && z <= shelf.z_max;
            if (!on) continue;
            if (cls == layout::CellClass::Background) cls = layout::CellClass::Unoccupied;
            for (const auto& b : shelf.boxes) {
              if (in_convex(footprint_corners(b), {x, z})) cls = layout::CellClass::Occupied;
            }
          }
        }
        out.set(ch, r, c, cls);
      }
    }
  }
  return out;
}

inline layout::LayoutStack oracle_front(const layout::SceneGraph& scene, const layout::ShelfFrame& frame,
                                        const layout::GridSpec& g, const std::vector<int>& visible) {
  layout::LayoutStack out(layout::View::Front, g.num_shelves, g.resolution);
  for (int ch = 0; ch < g.num_shelves; ++ch) {
    for (int r = 0; r < g.resolution; ++r) {
      for (int c = 0; c < g.resolution; ++c) {
        const double x = frame.origin.x + grid_center(g, c);
        const double y = frame.origin.y - grid_center(g, r);
        auto cls = layout::CellClass::Background;
        for (const auto& rack : scene.racks) {
          if (std::find(visible.begin(), visible.end(), rack.id) == visible.end()) continue;
          for (const auto& shelf : rack.shelves) {
            if (shelf.level != ch) continue;
            const double top = scene.band_top(rack, shelf.level);
            if (!(x >= shelf.x_min && x <= shelf.x_max && y >= shelf.elevation && y <= top)) continue;
            if (cls == layout::CellClass::Background) cls = layout::CellClass::Unoccupied;
            for (const auto& b : shelf.boxes) {
              double lo = 1e300, hi = -1e300;
              for (const auto& p : footprint_corners(b)) {
                lo = std::min(lo, p.x);
                hi = std::max(hi, p.x);
              }
              if (x >= lo - 1e-12 && x <= hi + 1e-12 && y >= b.bottom() && y <= b.top()) {
                cls = layout::CellClass::Occupied;
              }
            }
          }
        }
        out.set(ch, r, c, cls);
      }
    }
  }
  return out;
}

inline int count_mismatches(const layout::LayoutStack& a, const layout::LayoutStack& b) {
  int n = 0;
  for (std::size_t i = 0; i < a.cells().size(); ++i) n += a.cells()[i] != b.cells()[i];
  return n;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("forge_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace forge::test
