#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <tuple>
#include <vector>

#include "forge/layout/scene.hpp"
#include "forge/layout/types.hpp"
#include "forge/recon/lift.hpp"
#include "forge/recon/stitch.hpp"

namespace forge::recon {

/// World AABB expressed in a shelf frame.
inline Aabb to_shelf(const layout::ShelfFrame& frame, const Aabb& world) {
  const Vec3 a = frame.to_shelf(world.min), b = frame.to_shelf(world.max);
  return {{std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)},
          {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)}};
}

struct TruthBox {
  int rack_id = 0;
  int level = 0;
  Aabb bounds;  // shelf frame
};

/// Labelled column envelopes of `scene` in the given shelf frame. With a
/// non-empty `racks`, only those racks contribute.
inline std::vector<TruthBox> truth_boxes(const layout::SceneGraph& scene, const layout::ShelfFrame& frame,
                                         int max_levels, std::span<const int> racks = {}) {
  std::vector<TruthBox> out;
  for (const auto& env : layout::column_envelopes(scene, max_levels)) {
    if (!racks.empty() && std::find(racks.begin(), racks.end(), env.rack_id) == racks.end()) continue;
    out.push_back({env.rack_id, env.level, to_shelf(frame, env.bounds)});
  }
  return out;
}

/// Whether a box rasterizes onto a border cell of either view.
inline bool touches_border(const Aabb& b, const layout::GridSpec& spec) {
  const double lo = spec.cell_center(0), hi = spec.cell_center(spec.resolution - 1);
  for (int k = 0; k < 3; ++k) {
    if (b.min[k] <= lo || b.max[k] >= hi) return true;
  }
  return false;
}

struct CompareReport {
  int predicted = 0;
  int truth = 0;
  int matched = 0;
  double precision = 1.0;
  double recall = 1.0;
  double mean_center_error = 0.0;  // metres, Euclidean
  double mean_size_error = 0.0;    // metres, Euclidean
  double max_center_error = 0.0;   // metres, largest per-axis deviation
};

/// Greedy nearest-centre matching of predicted against true boxes on the
/// same level; a pair qualifies when its centres are closer than half the
/// smaller of the two diagonals. Empty sets count as perfect.
inline CompareReport compare_boxes(std::span<const Box3D> predicted, std::span<const TruthBox> truth) {
  CompareReport r;
  r.predicted = static_cast<int>(predicted.size());
  r.truth = static_cast<int>(truth.size());
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    for (std::size_t j = 0; j < truth.size(); ++j) {
      if (predicted[i].level != truth[j].level) continue;
      const double d = norm(predicted[i].center() - truth[j].bounds.center());
      const double gate = 0.5 * std::min(predicted[i].bounds.diagonal(), truth[j].bounds.diagonal());
      if (d < gate) pairs.emplace_back(d, i, j);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  std::vector<char> pu(predicted.size(), 0), tu(truth.size(), 0);
  double center_sum = 0.0, size_sum = 0.0;
  for (const auto& [d, i, j] : pairs) {
    if (pu[i] || tu[j]) continue;
    pu[i] = tu[j] = 1;
    ++r.matched;
    center_sum += d;
    size_sum += norm(predicted[i].size() - truth[j].bounds.size());
    r.max_center_error = std::max(r.max_center_error, max_abs(predicted[i].center() - truth[j].bounds.center()));
  }
  if (r.predicted > 0) r.precision = static_cast<double>(r.matched) / r.predicted;
  if (r.truth > 0) r.recall = static_cast<double>(r.matched) / r.truth;
  if (r.matched > 0) {
    r.mean_center_error = center_sum / r.matched;
    r.mean_size_error = size_sum / r.matched;
  }
  return r;
}

/// Compares a stitched model against every labelled box of `scene`.
/// `anchor` is the shelf frame of the model's first frame.
inline CompareReport compare_to_truth(const WorldRecon& world, const layout::SceneGraph& scene,
                                      const layout::ShelfFrame& anchor, int max_levels) {
  const auto truth = truth_boxes(scene, anchor, max_levels);
  return compare_boxes(world.boxes, truth);
}

struct RecoveryReport {
  int eligible = 0;
  int recovered = 0;
  double rate() const { return eligible == 0 ? 1.0 : static_cast<double>(recovered) / eligible; }
};

/// Counts true boxes away from the grid border that some reconstructed box
/// on the same level reproduces within `tolerance` per axis, in both centre
/// and size.
inline RecoveryReport lift_recovery(const FrameRecon& recon, std::span<const TruthBox> truth,
                                    const layout::GridSpec& spec, double tolerance) {
  RecoveryReport r;
  for (const auto& t : truth) {
    if (touches_border(t.bounds, spec)) continue;
    ++r.eligible;
    for (const auto& b : recon.boxes) {
      if (b.level != t.level) continue;
      if (max_abs(b.center() - t.bounds.center()) <= tolerance &&
          max_abs(b.size() - t.bounds.size()) <= tolerance) {
        ++r.recovered;
        break;
      }
    }
  }
  return r;
}

}  // namespace forge::recon
