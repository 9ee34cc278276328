#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "forge/core/error.hpp"
#include "forge/layout/scene.hpp"
#include "forge/layout/types.hpp"

namespace forge::layout {

/// Horizontal view frustum: the triangle spanned by the camera and the two
/// edge rays cut off at `max_range`.
inline std::array<Vec2, 3> frustum_triangle(const CameraPose& pose, double fov,
                                            double max_range) {
  const Vec2 apex{pose.position.x, pose.position.z};
  auto ray = [&](double yaw) {
    return Vec2{apex.x - std::sin(yaw) * max_range, apex.y - std::cos(yaw) * max_range};
  };
  return {apex, ray(pose.yaw - fov / 2), ray(pose.yaw + fov / 2)};
}

namespace detail {

inline void project(std::span<const Vec2> poly, Vec2 axis, double& lo, double& hi) {
  lo = hi = poly[0].x * axis.x + poly[0].y * axis.y;
  for (const auto& p : poly.subspan(1)) {
    const double d = p.x * axis.x + p.y * axis.y;
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
}

// Separating-axis test for convex polygons; touching counts as overlap.
inline bool convex_overlap(std::span<const Vec2> a, std::span<const Vec2> b) {
  for (auto poly : {a, b}) {
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Vec2 p = poly[i];
      const Vec2 q = poly[(i + 1) % poly.size()];
      const Vec2 axis{q.y - p.y, p.x - q.x};
      double alo, ahi, blo, bhi;
      project(a, axis, alo, ahi);
      project(b, axis, blo, bhi);
      if (ahi < blo || bhi < alo) return false;
    }
  }
  return true;
}

}  // namespace detail

/// Racks whose footprint intersects the horizontal frustum, in scene order.
inline std::vector<int> visible_racks(const SceneGraph& scene, const CameraPose& pose,
                                      double fov, double max_range) {
  if (!(fov > 0.0 && fov < std::numbers::pi)) {
    throw Error(ErrorCode::InvalidConfig, "fov must lie in (0, pi)");
  }
  if (!(max_range > 0.0)) throw Error(ErrorCode::InvalidConfig, "max_range must be > 0");

  const auto tri = frustum_triangle(pose, fov, max_range);
  std::vector<int> out;
  for (const auto& rack : scene.racks) {
    const std::array<Vec2, 4> rect{Vec2{rack.x_min(), rack.z_min()}, Vec2{rack.x_max(), rack.z_min()},
                                   Vec2{rack.x_max(), rack.z_max()}, Vec2{rack.x_min(), rack.z_max()}};
    if (detail::convex_overlap(tri, rect)) out.push_back(rack.id);
  }
  return out;
}

}  // namespace forge::layout
