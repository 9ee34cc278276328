#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "forge/core/geometry.hpp"
#include "forge/layout/types.hpp"
#include "forge/recon/detections.hpp"
#include "forge/recon/match.hpp"

namespace forge::recon {

/// Faces of a cuboid that lie on the layout border and may therefore be
/// cut short.
namespace face {
inline constexpr std::uint8_t kXMin = 1, kXMax = 2, kYMin = 4, kYMax = 8, kZMin = 16, kZMax = 32;
inline constexpr std::uint8_t min_bit(int axis) { return static_cast<std::uint8_t>(1u << (2 * axis)); }
inline constexpr std::uint8_t max_bit(int axis) { return static_cast<std::uint8_t>(2u << (2 * axis)); }
}  // namespace face

/// Axis-aligned cuboid in the shelf frame (X right, Y down, Z in). Used for
/// both boxes and shelf slabs; a slab spans its band, so its surface is at
/// `bounds.max.y`.
struct Box3D {
  int level = 0;
  Aabb bounds;
  int top_id = -1;
  int front_id = -1;
  std::uint8_t clipped = 0;

  Vec3 center() const { return bounds.center(); }
  Vec3 size() const { return bounds.size(); }
  bool boundary() const { return clipped != 0; }
  friend bool operator==(const Box3D&, const Box3D&) = default;
};

struct FrameRecon {
  int frame_index = 0;
  int channels = 0;  // shelf levels of the source layouts
  double meters_per_cell = 0.0;
  std::optional<Vec3> anchor;  // world origin of this frame's shelf frame, if known
  std::vector<Box3D> slabs;
  std::vector<Box3D> boxes;

  bool empty() const { return slabs.empty() && boxes.empty(); }
};

namespace detail {

inline const Detection2D* find(std::span<const Detection2D> dets, int id) {
  for (const auto& d : dets) {
    if (d.id == id) return &d;
  }
  return nullptr;
}

inline Box3D lift_pair(const Detection2D& top, const Detection2D& front, const layout::GridSpec& spec) {
  const int n = spec.resolution;
  Box3D b;
  b.level = top.channel;
  b.top_id = top.id;
  b.front_id = front.id;
  const double m = spec.meters_per_cell();
  const double half = spec.extent / 2;
  auto edge = [&](double cells) { return cells * m - half; };
  const double c0 = std::max(top.extent.col_lo, front.extent.col_lo);
  const double c1 = std::min(top.extent.col_hi, front.extent.col_hi);
  b.bounds.min.x = edge(c0);
  b.bounds.max.x = edge(c1);
  // Top rows run from the far edge (row 0) towards the camera.
  b.bounds.min.z = -edge(top.extent.row_hi);
  b.bounds.max.z = -edge(top.extent.row_lo);
  b.bounds.min.y = edge(front.extent.row_lo);
  b.bounds.max.y = edge(front.extent.row_hi);

  if (top.rect.col_min == 0 || front.rect.col_min == 0) b.clipped |= face::kXMin;
  if (top.rect.col_max == n - 1 || front.rect.col_max == n - 1) b.clipped |= face::kXMax;
  if (front.rect.row_min == 0) b.clipped |= face::kYMin;
  if (front.rect.row_max == n - 1) b.clipped |= face::kYMax;
  if (top.rect.row_max == n - 1) b.clipped |= face::kZMin;
  if (top.rect.row_min == 0) b.clipped |= face::kZMax;
  // A rotated footprint cut at a side border is also short in depth, and a
  // cut stack may show only some of its boxes.
  if (top.rect.col_min == 0 || top.rect.col_max == n - 1) b.clipped |= face::kZMin | face::kZMax;
  if (front.rect.col_min == 0 || front.rect.col_max == n - 1) b.clipped |= face::kYMin | face::kYMax;
  return b;
}

}  // namespace detail

/// 3D cuboids from matched top/front detections: X from the overlap of both
/// column ranges, Z from the top-view rows, Y from the front-view rows.
inline FrameRecon lift_to_3d(std::span<const DetectionPair> pairs, std::span<const Detection2D> top,
                             std::span<const Detection2D> front, const layout::GridSpec& spec,
                             int frame_index = 0, std::optional<Vec3> anchor = std::nullopt) {
  FrameRecon out;
  out.frame_index = frame_index;
  out.meters_per_cell = spec.meters_per_cell();
  out.channels = spec.num_shelves;
  out.anchor = anchor;
  for (const auto& p : pairs) {
    const Detection2D* t = detail::find(top, p.top_id);
    const Detection2D* f = detail::find(front, p.front_id);
    if (t == nullptr || f == nullptr) continue;
    const Box3D b = detail::lift_pair(*t, *f, spec);
    if (b.bounds.max.x <= b.bounds.min.x) continue;
    (p.kind == DetectionKind::Box ? out.boxes : out.slabs).push_back(b);
  }
  return out;
}

/// Extract, match per level, and lift one frame.
inline FrameRecon reconstruct_frame(const LayoutStack& top, const LayoutStack& front, const layout::GridSpec& spec,
                                    const ReconConfig& cfg = {}, int frame_index = 0,
                                    std::optional<Vec3> anchor = std::nullopt) {
  const auto td = extract_components(top, cfg.min_area);
  const auto fd = extract_components(front, cfg.min_area);
  std::vector<DetectionPair> pairs;
  for (int level = 0; level < top.channels(); ++level) {
    const auto m = match_top_front(td, fd, level, cfg.min_x_iou);
    pairs.insert(pairs.end(), m.pairs.begin(), m.pairs.end());
  }
  FrameRecon out = lift_to_3d(pairs, td, fd, spec, frame_index, anchor);
  out.channels = top.channels();
  return out;
}

}  // namespace forge::recon
