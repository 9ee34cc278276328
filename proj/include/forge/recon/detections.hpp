#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "forge/core/geometry.hpp"
#include "forge/layout/components.hpp"
#include "forge/layout/types.hpp"

namespace forge::recon {

using layout::CellClass;
using layout::LayoutStack;
using layout::View;

enum class DetectionKind { RackExtent, Box };

/// Inclusive cell rectangle.
struct CellRect {
  int col_min = 0, col_max = 0;
  int row_min = 0, row_max = 0;
  friend bool operator==(const CellRect&, const CellRect&) = default;
};

/// Continuous extent in cell units; cell `i` spans [i, i + 1].
struct CellExtent {
  double col_lo = 0, col_hi = 0;
  double row_lo = 0, row_hi = 0;
  friend bool operator==(const CellExtent&, const CellExtent&) = default;
};

inline CellExtent extent_of(const CellRect& r) {
  return {static_cast<double>(r.col_min), r.col_max + 1.0, static_cast<double>(r.row_min), r.row_max + 1.0};
}

struct Detection2D {
  int id = 0;
  View view = View::Top;
  int channel = 0;
  DetectionKind kind = DetectionKind::Box;
  CellRect rect;
  CellExtent extent;  // sub-cell estimate of the object's axis-aligned extent
  int area = 0;
  bool touches_border = false;
};

namespace detail {

inline double cross(Vec2 o, Vec2 a, Vec2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

inline std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }),
            pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

/// Axis-aligned extent of the rotated rectangle behind a blob. A rotated
/// rectangle sampled at cell centres loses its corners; fitting the
/// rectangle restores them. `inside(col, row)` tells blob membership.
///
/// Blobs that are full cell rectangles keep their cell bounds. Otherwise
/// every angle over a quarter turn whose tightest rectangle covers no
/// foreign cell centre is consistent, and the extent is averaged over the
/// consistent angles weighted by how much room the edges have: the mean
/// extent under a uniform prior on the rectangle.
template <typename Inside>
CellExtent fitted_extent(const std::vector<Vec2>& centres, const CellRect& rect, int n, Inside inside) {
  const CellExtent cells = extent_of(rect);
  const auto hull = convex_hull(centres);
  if (hull.size() < 3) return cells;

  auto tight = [&](double theta) {
    const Vec2 u{std::cos(theta), std::sin(theta)}, v{-u.y, u.x};
    std::array<double, 4> e{1e300, -1e300, 1e300, -1e300};
    for (const auto& p : hull) {
      const double a = p.x * u.x + p.y * u.y, b = p.x * v.x + p.y * v.y;
      e[0] = std::min(e[0], a);
      e[1] = std::max(e[1], a);
      e[2] = std::min(e[2], b);
      e[3] = std::max(e[3], b);
    }
    return e;
  };
  const double quarter = std::acos(-1.0) / 2;

  // Cells around the blob that can constrain the fit.
  const int c_lo = std::max(0, rect.col_min - 2), c_hi = std::min(n - 1, rect.col_max + 2);
  const int r_lo = std::max(0, rect.row_min - 2), r_hi = std::min(n - 1, rect.row_max + 2);
  std::vector<Vec2> foreign;
  for (int r = r_lo; r <= r_hi; ++r) {
    for (int c = c_lo; c <= c_hi; ++c) {
      if (!inside(c, r)) foreign.push_back({c + 0.5, r + 0.5});
    }
  }
  constexpr double kSlack = 1e-9;
  auto consistent = [&](double theta) {
    const auto e = tight(theta);
    const Vec2 u{std::cos(theta), std::sin(theta)}, v{-u.y, u.x};
    for (const auto& p : foreign) {
      const double a = p.x * u.x + p.y * u.y, b = p.x * v.x + p.y * v.y;
      if (a > e[0] - kSlack && a < e[1] + kSlack && b > e[2] - kSlack && b < e[3] + kSlack) return false;
    }
    return true;
  };

  // Edges of a rectangle at `theta` lie between the outermost blob centre
  // and the nearest foreign centre beyond it (within the span of the other
  // axis). Returns the extent with every edge in the middle of its gap and
  // the volume of edge positions, which is the likelihood of `theta`.
  struct Fit {
    CellExtent extent;
    double volume = 0.0;
  };
  auto fit_at = [&](double theta) {
    const Vec2 u{std::cos(theta), std::sin(theta)}, v{-u.y, u.x};
    const auto e = tight(theta);
    std::array<double, 4> bound{e[0] - 1.0, e[1] + 1.0, e[2] - 1.0, e[3] + 1.0};
    for (const auto& p : foreign) {
      const double a = p.x * u.x + p.y * u.y, b = p.x * v.x + p.y * v.y;
      if (b > e[2] - kSlack && b < e[3] + kSlack) {
        if (a <= e[0]) bound[0] = std::max(bound[0], a);
        if (a >= e[1]) bound[1] = std::min(bound[1], a);
      }
      if (a > e[0] - kSlack && a < e[1] + kSlack) {
        if (b <= e[2]) bound[2] = std::max(bound[2], b);
        if (b >= e[3]) bound[3] = std::min(bound[3], b);
      }
    }
    Fit f;
    f.volume = 1.0;
    std::array<double, 4> mid{};
    for (int k = 0; k < 4; ++k) {
      mid[k] = (e[k] + bound[k]) / 2;
      f.volume *= std::abs(bound[k] - e[k]);
    }
    f.extent = {1e300, -1e300, 1e300, -1e300};
    for (double a : {mid[0], mid[1]}) {
      for (double b : {mid[2], mid[3]}) {
        const double x = a * u.x + b * v.x, y = a * u.y + b * v.y;
        f.extent.col_lo = std::min(f.extent.col_lo, x);
        f.extent.col_hi = std::max(f.extent.col_hi, x);
        f.extent.row_lo = std::min(f.extent.row_lo, y);
        f.extent.row_hi = std::max(f.extent.row_hi, y);
      }
    }
    return f;
  };

  if (consistent(0.0)) return cells;
  constexpr int kSamples = 800;
  const double step = quarter / kSamples;
  CellExtent out{};
  double weight = 0.0;
  for (int k = 0; k < kSamples; ++k) {
    const double theta = -quarter / 2 + k * step;
    if (!consistent(theta)) continue;
    const Fit f = fit_at(theta);
    out.col_lo += f.volume * f.extent.col_lo;
    out.col_hi += f.volume * f.extent.col_hi;
    out.row_lo += f.volume * f.extent.row_lo;
    out.row_hi += f.volume * f.extent.row_hi;
    weight += f.volume;
  }
  if (weight <= 0) return cells;
  out.col_lo /= weight;
  out.col_hi /= weight;
  out.row_lo /= weight;
  out.row_hi /= weight;
  out.col_lo = std::clamp(out.col_lo, 0.0, cells.col_lo);
  out.col_hi = std::clamp(out.col_hi, cells.col_hi, static_cast<double>(n));
  out.row_lo = std::clamp(out.row_lo, 0.0, cells.row_lo);
  out.row_hi = std::clamp(out.row_hi, cells.row_hi, static_cast<double>(n));
  return out;
}

}  // namespace detail

/// Thresholds for reconstruction and stitching. Gates are in cells.
struct ReconConfig {
  int min_area = 4;
  double min_x_iou = 0.25;
  double size_tolerance = 0.2;
  double inlier_gate_cells = 1.5;
  double fuse_gate_cells = 1.5;
};

/// 4-connected blobs per channel: Occupied cells give Box detections,
/// Occupied-or-Unoccupied cells give rack extents. Blobs smaller than
/// `min_area` are dropped.
inline std::vector<Detection2D> extract_components(const LayoutStack& stack, int min_area = 4) {
  std::vector<Detection2D> out;
  const int n = stack.resolution();
  std::vector<std::uint8_t> mask(stack.cells_per_channel());
  std::vector<layout::ComponentBounds> comps;
  for (int ch = 0; ch < stack.channels(); ++ch) {
    const auto cells = stack.channel(ch);
    for (DetectionKind kind : {DetectionKind::Box, DetectionKind::RackExtent}) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        mask[i] = kind == DetectionKind::Box ? cells[i] == CellClass::Occupied : cells[i] != CellClass::Background;
      }
      const auto labels = layout::label_components(mask, n, &comps);
      const bool fit = kind == DetectionKind::Box && stack.view() == View::Top;
      std::vector<std::vector<Vec2>> rims;
      if (fit) {
        // Row-wise leftmost and rightmost cell centres suffice for the hull.
        rims.resize(comps.size());
        for (int r = 0; r < n; ++r) {
          for (int c = 0; c < n; ++c) {
            const int l = labels[r * n + c];
            if (l == 0) continue;
            const bool left = c == 0 || labels[r * n + c - 1] != l;
            const bool right = c == n - 1 || labels[r * n + c + 1] != l;
            if (left || right) rims[l - 1].push_back({c + 0.5, r + 0.5});
          }
        }
      }
      for (const auto& c : comps) {
        if (c.area < min_area) continue;
        Detection2D d;
        d.id = static_cast<int>(out.size());
        d.view = stack.view();
        d.channel = ch;
        d.kind = kind;
        d.rect = {c.col_min, c.col_max, c.row_min, c.row_max};
        if (fit) {
          const int l = c.label;
          d.extent = detail::fitted_extent(rims[l - 1], d.rect, n,
                                           [&](int col, int row) { return labels[row * n + col] == l; });
        } else {
          d.extent = extent_of(d.rect);
        }
        d.area = c.area;
        d.touches_border = c.col_min == 0 || c.row_min == 0 || c.col_max == n - 1 || c.row_max == n - 1;
        out.push_back(d);
      }
    }
  }
  return out;
}

/// IoU of the column ranges of two rectangles.
inline double x_iou(const CellRect& a, const CellRect& b) {
  const int inter = std::max(0, std::min(a.col_max, b.col_max) - std::max(a.col_min, b.col_min) + 1);
  const int uni = (a.col_max - a.col_min + 1) + (b.col_max - b.col_min + 1) - inter;
  return uni > 0 ? static_cast<double>(inter) / uni : 0.0;
}

}  // namespace forge::recon
