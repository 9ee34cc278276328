#pragma once

#include <span>
#include <string>
#include <vector>

#include "forge/layout/frame.hpp"
#include "forge/layout/rasterize.hpp"
#include "forge/layout/visibility.hpp"

namespace forge::waregen {

struct Frame {
  layout::CameraPose pose;
  std::vector<int> visible;
  layout::ShelfFrame shelf_frame;  // shared by both views
  layout::LayoutStack top;
  layout::LayoutStack front;
  bool empty = false;  // nothing visible; stacks are all Background
};

struct Sequence {
  std::string scene_id;
  std::vector<Frame> frames;
};

struct RenderOptions {
  double fov = 1.5707963267948966;
  double max_range = 12.0;
};

inline Frame render_frame(const layout::SceneGraph& scene, const layout::CameraPose& pose,
                          const layout::GridSpec& spec, const RenderOptions& opts, int index) {
  Frame f;
  f.pose = pose;
  f.visible = layout::visible_racks(scene, pose, opts.fov, opts.max_range);
  if (f.visible.empty()) {
    f.empty = true;
    f.shelf_frame = {{pose.position.x, 0.0, scene.row_z}, layout::View::Top, spec.extent};
    f.top = layout::LayoutStack(layout::View::Top, spec.num_shelves, spec.resolution, index);
    f.front = layout::LayoutStack(layout::View::Front, spec.num_shelves, spec.resolution, index);
    return f;
  }
  f.shelf_frame = layout::make_shelf_frame(scene, f.visible, layout::View::Top, spec);
  layout::ShelfFrame front_frame = f.shelf_frame;
  front_frame.view = layout::View::Front;
  f.top = layout::rasterize_top_view(scene, f.shelf_frame, spec, f.visible);
  f.front = layout::rasterize_front_view(scene, front_frame, spec, f.visible);
  f.top.set_frame_index(index);
  f.front.set_frame_index(index);
  return f;
}

inline Sequence render_sequence(const layout::SceneGraph& scene,
                                std::span<const layout::CameraPose> trajectory,
                                const layout::GridSpec& spec, const RenderOptions& opts = {},
                                std::string scene_id = {}) {
  Sequence seq;
  seq.scene_id = std::move(scene_id);
  seq.frames.reserve(trajectory.size());
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    seq.frames.push_back(render_frame(scene, trajectory[i], spec, opts, static_cast<int>(i)));
  }
  return seq;
}

}  // namespace forge::waregen
