#pragma once

#include <limits>
#include <span>

#include "forge/core/error.hpp"
#include "forge/layout/scene.hpp"
#include "forge/layout/types.hpp"

namespace forge::layout {

/// World-space union of the shelf volumes (surface rectangle extruded up to
/// the band top) of the given racks, restricted to the first `max_levels`.
inline Aabb visible_shelf_bounds(const SceneGraph& scene, std::span<const int> visible,
                                 int max_levels) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  Aabb box{{inf, inf, inf}, {-inf, -inf, -inf}};
  bool any = false;
  for (int id : visible) {
    const Rack* rack = scene.find_rack(id);
    if (rack == nullptr) continue;
    for (const auto& shelf : rack->shelves) {
      if (shelf.level >= max_levels) continue;
      any = true;
      box.min.x = std::min(box.min.x, shelf.x_min);
      box.max.x = std::max(box.max.x, shelf.x_max);
      box.min.z = std::min(box.min.z, shelf.z_min);
      box.max.z = std::max(box.max.z, shelf.z_max);
      box.min.y = std::min(box.min.y, shelf.elevation);
      box.max.y = std::max(box.max.y, scene.band_top(*rack, shelf.level));
    }
  }
  if (!any) throw Error(ErrorCode::NoVisibleRack, "no visible shelf to anchor the frame");
  return box;
}

/// Shelf-centric frame for the visible set. The origin depends only on
/// which racks are visible, never on where the camera stands.
inline ShelfFrame make_shelf_frame(const SceneGraph& scene, std::span<const int> visible,
                                   View view, const GridSpec& spec) {
  if (visible.empty()) throw Error(ErrorCode::NoVisibleRack, "visible rack set is empty");
  const Aabb bounds = visible_shelf_bounds(scene, visible, spec.num_shelves);
  return {bounds.center(), view, spec.extent};
}

}  // namespace forge::layout
