#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "forge/core/error.hpp"
#include "forge/core/rng.hpp"
#include "forge/layout/scene.hpp"
#include "forge/layout/types.hpp"
#include "forge/waregen/config.hpp"

namespace forge::waregen {

struct TrajectoryInfo {
  double standoff = 0.0;
  double height = 0.0;
  double step = 0.0;
};

/// Straight pass along the rack row at a fixed standoff and height, facing
/// the racks. The path runs between the centres of the first and last
/// labelled rack; when that needs steps longer than `max_step` the path is
/// shortened around the row centre instead.
inline std::vector<layout::CameraPose> generate_trajectory(const GenConfig& cfg,
                                                           const layout::SceneGraph& scene,
                                                           std::uint64_t seed,
                                                           TrajectoryInfo* info = nullptr) {
  double first = 0, last = 0;
  bool any = false;
  for (const auto& rack : scene.racks) {
    if (rack.distractor) continue;
    if (!any) first = rack.base.x;
    last = rack.base.x;
    any = true;
  }
  if (!any) throw Error(ErrorCode::InvalidConfig, "trajectory needs at least one rack");

  Rng rng(seed);
  const double standoff = rng.uniform(cfg.camera_standoff.min, cfg.camera_standoff.max);
  const double height = rng.uniform(cfg.camera_height.min, cfg.camera_height.max);
  const int n = cfg.frames_per_sequence;
  const double step = std::min(cfg.max_step, (last - first) / (n - 1));
  const double start = (first + last) / 2 - step * (n - 1) / 2;

  std::vector<layout::CameraPose> poses;
  poses.reserve(n);
  for (int i = 0; i < n; ++i) {
    poses.push_back({{start + step * i, height, scene.row_z + standoff}, 0.0});
  }
  if (info != nullptr) *info = {standoff, height, step};
  return poses;
}

}  // namespace forge::waregen
