#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "forge/core/error.hpp"
#include "forge/recon/lift.hpp"

namespace forge::recon {

struct FrameMatch {
  std::vector<std::pair<int, int>> correspondences;  // box index in a -> box index in b
  Vec3 shift;          // content displacement: centre in b = centre in a + shift
  int direction = 0;   // sign of the dominant shift component, 0 if negligible
  int direction_axis = 0;
  int inliers = 0;
};

namespace detail {

struct Candidate {
  int kind;  // 0 box, 1 slab
  int ia, ib;
  Vec3 d;
};

inline bool similar_size(const Box3D& a, const Box3D& b, double tol) {
  const Vec3 sa = a.size(), sb = b.size();
  for (int k = 0; k < 3; ++k) {
    if (std::abs(sa[k] - sb[k]) > tol * std::max(sa[k], sb[k])) return false;
  }
  return true;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

/// Correspondences and consensus shift between two frame reconstructions.
///
/// Candidates are unclipped cuboids on the same level whose sizes agree
/// within the tolerance. Each candidate displacement is a shift hypothesis;
/// the one supported by the most distinct cuboids of `a` wins (ties go to
/// the smaller shift). Supporters are paired one-to-one, filtered to within
/// the inlier gate of their component-wise median, and averaged. Averaging
/// matters: each lifted edge is off by a fraction of a cell, and the mean
/// over many edges cancels that quantisation where a median would not.
inline FrameMatch match_frames(const FrameRecon& a, const FrameRecon& b, const ReconConfig& cfg = {}) {
  const double mpc = a.meters_per_cell > 0 ? a.meters_per_cell : b.meters_per_cell;
  const double gate = cfg.inlier_gate_cells * mpc;

  std::vector<detail::Candidate> cands;
  auto collect = [&](const std::vector<Box3D>& xa, const std::vector<Box3D>& xb, int kind) {
    for (std::size_t i = 0; i < xa.size(); ++i) {
      if (xa[i].boundary()) continue;
      for (std::size_t j = 0; j < xb.size(); ++j) {
        if (xb[j].boundary() || xa[i].level != xb[j].level) continue;
        if (!detail::similar_size(xa[i], xb[j], cfg.size_tolerance)) continue;
        cands.push_back({kind, static_cast<int>(i), static_cast<int>(j), xb[j].center() - xa[i].center()});
      }
    }
  };
  collect(a.boxes, b.boxes, 0);
  collect(a.slabs, b.slabs, 1);
  if (cands.empty()) {
    throw Error(ErrorCode::NoOverlap, "no corresponding cuboids between frames " +
                                          std::to_string(a.frame_index) + " and " + std::to_string(b.frame_index));
  }

  auto within = [&](Vec3 d, Vec3 h) { return max_abs(d - h) <= gate; };

  std::size_t best = 0;
  int best_support = -1;
  for (std::size_t h = 0; h < cands.size(); ++h) {
    std::vector<std::pair<int, int>> seen;
    for (const auto& c : cands) {
      if (within(c.d, cands[h].d)) seen.emplace_back(c.kind, c.ia);
    }
    std::sort(seen.begin(), seen.end());
    const int support = static_cast<int>(std::unique(seen.begin(), seen.end()) - seen.begin());
    if (support > best_support ||
        (support == best_support && norm(cands[h].d) < norm(cands[best].d))) {
      best = h;
      best_support = support;
    }
  }
  const Vec3 hyp = cands[best].d;

  // One-to-one pairing of supporters, closest to the hypothesis first.
  std::vector<const detail::Candidate*> order;
  for (const auto& c : cands) {
    if (within(c.d, hyp)) order.push_back(&c);
  }
  std::stable_sort(order.begin(), order.end(), [&](const auto* x, const auto* y) {
    return max_abs(x->d - hyp) < max_abs(y->d - hyp);
  });
  std::vector<std::pair<int, int>> used_a, used_b;
  std::vector<const detail::Candidate*> chosen;
  for (const auto* c : order) {
    const std::pair<int, int> ka{c->kind, c->ia}, kb{c->kind, c->ib};
    if (std::find(used_a.begin(), used_a.end(), ka) != used_a.end()) continue;
    if (std::find(used_b.begin(), used_b.end(), kb) != used_b.end()) continue;
    used_a.push_back(ka);
    used_b.push_back(kb);
    chosen.push_back(c);
  }

  Vec3 med;
  for (int k = 0; k < 3; ++k) {
    std::vector<double> comp;
    for (const auto* c : chosen) comp.push_back(c->d[k]);
    med[k] = detail::median(comp);
  }
  FrameMatch out;
  Vec3 sum;
  for (const auto* c : chosen) {
    if (!within(c->d, med)) continue;
    sum = sum + c->d;
    ++out.inliers;
    if (c->kind == 0) out.correspondences.emplace_back(c->ia, c->ib);
  }
  out.shift = out.inliers > 0 ? sum * (1.0 / out.inliers) : med;
  std::sort(out.correspondences.begin(), out.correspondences.end());

  int axis = 0;
  for (int k = 1; k < 3; ++k) {
    if (std::abs(out.shift[k]) > std::abs(out.shift[axis])) axis = k;
  }
  out.direction_axis = axis;
  out.direction = std::abs(out.shift[axis]) < 0.5 * mpc ? 0 : (out.shift[axis] > 0 ? 1 : -1);
  return out;
}

/// Global model expressed in the shelf frame of the first stitched frame.
struct WorldRecon {
  double meters_per_cell = 0.0;
  int channels = 0;
  std::optional<Vec3> anchor;    // world origin of the global frame, if known
  std::vector<Box3D> slabs;
  std::vector<Box3D> boxes;
  std::vector<Vec3> shifts;      // per frame, relative to the previous frame
  std::vector<Vec3> offsets;     // per frame, accumulated: global = local - offset
  int direction = 0;
  int direction_axis = 0;
};

namespace detail {

// Whether a (possibly clipped) cuboid `n` can be the same object as `g`.
// Unclipped faces must agree within the gate; a clipped face may fall
// short of the true one but not beyond it.
inline bool corresponds(const Box3D& g, const Box3D& n, double gate) {
  if (g.level != n.level) return false;
  for (int k = 0; k < 3; ++k) {
    const bool gmin = g.clipped & face::min_bit(k), gmax = g.clipped & face::max_bit(k);
    const bool nmin = n.clipped & face::min_bit(k), nmax = n.clipped & face::max_bit(k);
    const double g0 = g.bounds.min[k], g1 = g.bounds.max[k];
    const double n0 = n.bounds.min[k], n1 = n.bounds.max[k];
    if (!gmin && !gmax && !nmin && !nmax) {
      if (std::abs((g0 + g1) - (n0 + n1)) / 2 > gate) return false;
      continue;
    }
    if (g0 > n1 + gate || n0 > g1 + gate) return false;
    if (!gmin && !nmin && std::abs(g0 - n0) > gate) return false;
    if (gmin && !nmin && g0 < n0 - gate) return false;
    if (nmin && !gmin && n0 < g0 - gate) return false;
    if (!gmax && !nmax && std::abs(g1 - n1) > gate) return false;
    if (gmax && !nmax && g1 > n1 + gate) return false;
    if (nmax && !gmax && n1 > g1 + gate) return false;
  }
  return true;
}

// Completes clipped faces of `g` from `n`.
inline void fuse(Box3D& g, const Box3D& n) {
  for (int k = 0; k < 3; ++k) {
    const auto lo = face::min_bit(k), hi = face::max_bit(k);
    if (g.clipped & lo) {
      if (!(n.clipped & lo)) {
        g.bounds.min[k] = n.bounds.min[k];
        g.clipped &= static_cast<std::uint8_t>(~lo);
      } else {
        g.bounds.min[k] = std::min(g.bounds.min[k], n.bounds.min[k]);
      }
    }
    if (g.clipped & hi) {
      if (!(n.clipped & hi)) {
        g.bounds.max[k] = n.bounds.max[k];
        g.clipped &= static_cast<std::uint8_t>(~hi);
      } else {
        g.bounds.max[k] = std::max(g.bounds.max[k], n.bounds.max[k]);
      }
    }
  }
}

inline void merge_into(std::vector<Box3D>& global, const std::vector<Box3D>& next, Vec3 offset, double gate) {
  std::vector<Box3D> moved = next;
  for (auto& b : moved) b.bounds = {b.bounds.min - offset, b.bounds.max - offset};

  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < global.size(); ++i) {
    for (std::size_t j = 0; j < moved.size(); ++j) {
      if (corresponds(global[i], moved[j], gate)) {
        pairs.emplace_back(norm(global[i].center() - moved[j].center()), i, j);
      }
    }
  }
  std::sort(pairs.begin(), pairs.end());
  std::vector<char> gused(global.size(), 0), nused(moved.size(), 0);
  for (const auto& [dist, i, j] : pairs) {
    if (gused[i] || nused[j]) continue;
    gused[i] = nused[j] = 1;
    fuse(global[i], moved[j]);
  }
  for (std::size_t j = 0; j < moved.size(); ++j) {
    if (!nused[j]) global.push_back(moved[j]);
  }
}

}  // namespace detail

/// Brings `next` into the global frame (global = local - offset, where
/// `offset` is the accumulated shift since the first frame) and merges it:
/// matching cuboids complete each other's clipped faces, new ones are
/// appended. Never removes anything.
inline WorldRecon merge_frame(WorldRecon world, const FrameRecon& next, Vec3 offset, const ReconConfig& cfg = {}) {
  const double mpc = world.meters_per_cell > 0 ? world.meters_per_cell : next.meters_per_cell;
  world.meters_per_cell = mpc;
  world.channels = std::max(world.channels, next.channels);
  const double gate = cfg.fuse_gate_cells * mpc;
  detail::merge_into(world.boxes, next.boxes, offset, gate);
  detail::merge_into(world.slabs, next.slabs, offset, gate);
  return world;
}

inline WorldRecon world_from_frame(const FrameRecon& f) {
  WorldRecon w;
  w.meters_per_cell = f.meters_per_cell;
  w.channels = f.channels;
  w.anchor = f.anchor;
  w.slabs = f.slabs;
  w.boxes = f.boxes;
  w.shifts.push_back({});
  w.offsets.push_back({});
  return w;
}

/// Left fold of match_frames + merge_frame over a sequence. Empty frames
/// contribute nothing and keep a zero shift; matching always runs against
/// the most recent non-empty frame.
inline WorldRecon stitch_sequence(std::span<const FrameRecon> frames, const ReconConfig& cfg = {}) {
  if (frames.empty()) throw Error(ErrorCode::InvalidConfig, "stitch_sequence needs at least one frame");
  WorldRecon world = world_from_frame(frames[0]);
  const FrameRecon* prev = frames[0].empty() ? nullptr : &frames[0];
  Vec3 prev_offset;
  for (std::size_t t = 1; t < frames.size(); ++t) {
    const FrameRecon& next = frames[t];
    if (next.empty()) {
      world.shifts.push_back({});
      world.offsets.push_back(prev_offset);
      continue;
    }
    if (prev == nullptr) {
      // Nothing seen so far: this frame becomes the anchor.
      const auto shifts = world.shifts;
      const auto offsets = world.offsets;
      world = world_from_frame(next);
      world.shifts = shifts;
      world.offsets = offsets;
      world.shifts.push_back({});
      world.offsets.push_back({});
      prev = &next;
      continue;
    }
    FrameMatch m;
    try {
      m = match_frames(*prev, next, cfg);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NoOverlap) {
        throw Error(ErrorCode::NoOverlap, "stitching failed at frame " + std::to_string(t) + ": " + e.what());
      }
      throw;
    }
    const Vec3 offset = prev_offset + m.shift;
    world = merge_frame(std::move(world), next, offset, cfg);
    world.shifts.push_back(m.shift);
    world.offsets.push_back(offset);
    if (world.direction == 0 && m.direction != 0) {
      world.direction = m.direction;
      world.direction_axis = m.direction_axis;
    }
    prev = &next;
    prev_offset = offset;
  }
  return world;
}

}  // namespace forge::recon
