#pragma once

#include <algorithm>
#include <array>
#include <cmath>

namespace forge {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Vec3 operator*(Vec3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
  friend constexpr bool operator==(Vec3 a, Vec3 b) = default;
};

inline double norm(Vec3 v) { return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z); }

inline double max_abs(Vec3 v) {
  return std::max({std::abs(v.x), std::abs(v.y), std::abs(v.z)});
}

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Axis-aligned box given by its min/max corners.
struct Aabb {
  Vec3 min;
  Vec3 max;

  Vec3 center() const { return (min + max) * 0.5; }
  Vec3 size() const { return max - min; }
  double diagonal() const { return norm(size()); }
  friend bool operator==(const Aabb&, const Aabb&) = default;
};

inline Aabb aabb_from_center(Vec3 center, Vec3 size) {
  const Vec3 half = size * 0.5;
  return {center - half, center + half};
}

/// Footprint of a box rotated about the vertical axis, in the world X-Z
/// plane. `yaw` rotates local +X towards world -Z (right-handed about +Y).
struct OrientedRect {
  Vec2 center;
  double half_x = 0.0;
  double half_z = 0.0;
  double yaw = 0.0;

  bool contains(Vec2 p) const {
    const double c = std::cos(yaw);
    const double s = std::sin(yaw);
    const double dx = p.x - center.x;
    const double dz = p.y - center.y;
    const double u = dx * c - dz * s;
    const double v = dx * s + dz * c;
    return std::abs(u) <= half_x && std::abs(v) <= half_z;
  }

  /// Corners in counter-clockwise order when viewed with X right, Z up.
  std::array<Vec2, 4> corners() const {
    const double c = std::cos(yaw);
    const double s = std::sin(yaw);
    const Vec2 ex{c, -s};
    const Vec2 ez{s, c};
    auto at = [&](double a, double b) {
      return Vec2{center.x + ex.x * a + ez.x * b, center.y + ex.y * a + ez.y * b};
    };
    return {at(-half_x, -half_z), at(half_x, -half_z), at(half_x, half_z), at(-half_x, half_z)};
  }

  /// Half extents of the axis-aligned bounding rectangle.
  Vec2 aabb_half() const {
    const double c = std::abs(std::cos(yaw));
    const double s = std::abs(std::sin(yaw));
    return {half_x * c + half_z * s, half_x * s + half_z * c};
  }
};

}  // namespace forge
