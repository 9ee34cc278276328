#pragma once

#include <span>
#include <vector>

#include "forge/recon/assignment.hpp"
#include "forge/recon/detections.hpp"

namespace forge::recon {

struct DetectionPair {
  int top_id = -1;
  int front_id = -1;
  DetectionKind kind = DetectionKind::Box;
  double x_iou = 0.0;
};

struct TopFrontMatch {
  std::vector<DetectionPair> pairs;
  std::vector<int> unmatched_top;
  std::vector<int> unmatched_front;
};

/// Pairs top-view and front-view detections of one shelf level by the
/// overlap of their column ranges. The assignment maximises total X-IoU;
/// pairs below `min_x_iou` are never formed. Boxes pair with boxes and
/// rack extents with rack extents.
inline TopFrontMatch match_top_front(std::span<const Detection2D> top, std::span<const Detection2D> front,
                                     int level, double min_x_iou = 0.25) {
  TopFrontMatch out;
  for (DetectionKind kind : {DetectionKind::Box, DetectionKind::RackExtent}) {
    std::vector<const Detection2D*> a, b;
    for (const auto& d : top) {
      if (d.channel == level && d.kind == kind) a.push_back(&d);
    }
    for (const auto& d : front) {
      if (d.channel == level && d.kind == kind) b.push_back(&d);
    }
    std::vector<std::vector<double>> w(a.size(), std::vector<double>(b.size(), 0.0));
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = 0; j < b.size(); ++j) {
        const double iou = x_iou(a[i]->rect, b[j]->rect);
        w[i][j] = iou >= min_x_iou ? iou : 0.0;
      }
    }
    const auto assign = solve_assignment(w);
    std::vector<char> front_used(b.size(), 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (assign[i] < 0) {
        out.unmatched_top.push_back(a[i]->id);
        continue;
      }
      front_used[assign[i]] = 1;
      out.pairs.push_back({a[i]->id, b[assign[i]]->id, kind, w[i][assign[i]]});
    }
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (!front_used[j]) out.unmatched_front.push_back(b[j]->id);
    }
  }
  return out;
}

}  // namespace forge::recon
