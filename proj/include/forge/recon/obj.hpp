#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "forge/layout/scene.hpp"
#include "forge/layout/types.hpp"
#include "forge/recon/stitch.hpp"

namespace forge::recon {

/// Wavefront OBJ text built from cuboids. Each cuboid is eight vertices
/// (bit 0 selects +X, bit 1 +Y, bit 2 +Z in its local frame) and six quads
/// wound counter-clockwise seen from outside.
class ObjWriter {
 public:
  void object(const std::string& name) { text_ += "o " + name + "\n"; }

  void cuboid(const std::array<Vec3, 8>& v) {
    for (const auto& p : v) {
      char line[96];
      std::snprintf(line, sizeof line, "v %.6f %.6f %.6f\n", p.x, p.y, p.z);
      text_ += line;
    }
    static constexpr int kFaces[6][4] = {{0, 4, 6, 2}, {1, 3, 7, 5}, {0, 1, 5, 4},
                                         {2, 6, 7, 3}, {0, 2, 3, 1}, {4, 5, 7, 6}};
    for (const auto& f : kFaces) {
      char line[96];
      std::snprintf(line, sizeof line, "f %d %d %d %d\n", base_ + f[0], base_ + f[1], base_ + f[2], base_ + f[3]);
      text_ += line;
    }
    base_ += 8;
  }

  void cuboid(const Aabb& b) {
    std::array<Vec3, 8> v;
    for (int i = 0; i < 8; ++i) {
      v[i] = {i & 1 ? b.max.x : b.min.x, i & 2 ? b.max.y : b.min.y, i & 4 ? b.max.z : b.min.z};
    }
    cuboid(v);
  }

  /// Box rotated by `yaw` about +Y, matching OrientedRect.
  void cuboid(Vec3 center, Vec3 size, double yaw) {
    const double c = std::cos(yaw), s = std::sin(yaw);
    const Vec3 ex{c, 0, -s}, ey{0, 1, 0}, ez{s, 0, c};
    std::array<Vec3, 8> v;
    for (int i = 0; i < 8; ++i) {
      const double a = (i & 1 ? 0.5 : -0.5) * size.x;
      const double b = (i & 2 ? 0.5 : -0.5) * size.y;
      const double d = (i & 4 ? 0.5 : -0.5) * size.z;
      v[i] = center + ex * a + ey * b + ez * d;
    }
    cuboid(v);
  }

  const std::string& str() const { return text_; }

 private:
  std::string text_ = "# forge cuboid export\n";
  int base_ = 1;
};

inline constexpr double kPlateThickness = 0.03;
inline constexpr double kPostSize = 0.05;

namespace detail {

inline Aabb world_aabb(const layout::ShelfFrame& frame, const Aabb& shelf) {
  const Vec3 a = frame.to_world(shelf.min), b = frame.to_world(shelf.max);
  return {{std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)},
          {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)}};
}

inline void posts(ObjWriter& w, double x0, double x1, double y0, double y1, double z0, double z1) {
  for (double x : {x0, x1 - kPostSize}) {
    for (double z : {z0, z1 - kPostSize}) w.cuboid(Aabb{{x, y0, z}, {x + kPostSize, y1, z + kPostSize}});
  }
}

}  // namespace detail

/// Groups slabs into racks: slabs whose X ranges overlap belong to one rack.
/// Returns the rack index of every slab, racks numbered by increasing X.
inline std::vector<int> group_slabs(const std::vector<Box3D>& slabs) {
  std::vector<std::size_t> order(slabs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return slabs[a].bounds.min.x < slabs[b].bounds.min.x; });
  std::vector<int> rack(slabs.size(), -1);
  int current = -1;
  double reach = -1e300;
  for (std::size_t i : order) {
    if (current < 0 || slabs[i].bounds.min.x >= reach) {
      ++current;
      reach = slabs[i].bounds.max.x;
    } else {
      reach = std::max(reach, slabs[i].bounds.max.x);
    }
    rack[i] = current;
  }
  return rack;
}

/// OBJ of a reconstruction in world coordinates (Y up). Without an anchor
/// the first frame's shelf frame is placed at the world origin.
inline std::string export_obj(const WorldRecon& world) {
  const layout::ShelfFrame frame{world.anchor.value_or(Vec3{}), layout::View::Top, 0.0};
  const auto rack_of = group_slabs(world.slabs);
  const int racks = rack_of.empty() ? 0 : *std::max_element(rack_of.begin(), rack_of.end()) + 1;

  ObjWriter w;
  for (int r = 0; r < racks; ++r) {
    Aabb span{{1e300, 1e300, 1e300}, {-1e300, -1e300, -1e300}};
    for (std::size_t i = 0; i < world.slabs.size(); ++i) {
      if (rack_of[i] != r) continue;
      const Aabb b = detail::world_aabb(frame, world.slabs[i].bounds);
      for (int k = 0; k < 3; ++k) {
        span.min[k] = std::min(span.min[k], b.min[k]);
        span.max[k] = std::max(span.max[k], b.max[k]);
      }
    }
    const std::string rack = "rack_" + std::to_string(r);
    w.object(rack);
    detail::posts(w, span.min.x, span.max.x, span.min.y - kPlateThickness, span.max.y, span.min.z, span.max.z);

    for (std::size_t i = 0; i < world.slabs.size(); ++i) {
      if (rack_of[i] != r) continue;
      const Box3D& slab = world.slabs[i];
      const Aabb b = detail::world_aabb(frame, slab.bounds);
      const std::string shelf = rack + "_shelf_" + std::to_string(slab.level);
      w.object(shelf);
      w.cuboid(Aabb{{b.min.x, b.min.y - kPlateThickness, b.min.z}, {b.max.x, b.min.y, b.max.z}});
      int n = 0;
      for (const auto& box : world.boxes) {
        const double cx = box.center().x;
        if (box.level != slab.level || cx < slab.bounds.min.x || cx > slab.bounds.max.x) continue;
        w.object(shelf + "_box_" + std::to_string(n++));
        w.cuboid(detail::world_aabb(frame, box.bounds));
      }
    }
  }
  // Boxes with no supporting slab still get exported.
  int loose = 0;
  for (const auto& box : world.boxes) {
    bool placed = false;
    for (const auto& slab : world.slabs) {
      const double cx = box.center().x;
      placed = placed || (box.level == slab.level && cx >= slab.bounds.min.x && cx <= slab.bounds.max.x);
    }
    if (placed) continue;
    w.object("unassigned_box_" + std::to_string(loose++));
    w.cuboid(detail::world_aabb(frame, box.bounds));
  }
  return w.str();
}

/// OBJ of a ground-truth scene graph; distractor racks included.
inline std::string export_obj(const layout::SceneGraph& scene) {
  ObjWriter w;
  for (const auto& rack : scene.racks) {
    const std::string name = "rack_" + std::to_string(rack.id);
    const double top = rack.shelf_heights.empty() ? rack.base.y : scene.band_top(rack, static_cast<int>(rack.shelf_heights.size()) - 1);
    w.object(name);
    detail::posts(w, rack.x_min(), rack.x_max(), rack.base.y, top, rack.z_min(), rack.z_max());
    for (const auto& shelf : rack.shelves) {
      const std::string sname = name + "_shelf_" + std::to_string(shelf.level);
      w.object(sname);
      w.cuboid(Aabb{{shelf.x_min, shelf.elevation - kPlateThickness, shelf.z_min},
                    {shelf.x_max, shelf.elevation, shelf.z_max}});
      for (const auto& box : shelf.boxes) {
        w.object(sname + "_box_" + std::to_string(box.id));
        w.cuboid(box.center, box.size, box.yaw);
      }
    }
  }
  return w.str();
}

}  // namespace forge::recon
