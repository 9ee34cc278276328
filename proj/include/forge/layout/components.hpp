#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

namespace forge::layout {

/// Bounding rectangle and size of one connected component.
struct ComponentBounds {
  int label = 0;
  int row_min = 0, row_max = 0;
  int col_min = 0, col_max = 0;
  int area = 0;
};

/// 4-connected labelling of `mask` (row-major, side `n`). Labels start at
/// 1 in raster order of each component's first cell; 0 marks cells outside
/// the mask.
inline std::vector<int> label_components(std::span<const std::uint8_t> mask, int n,
                                         std::vector<ComponentBounds>* bounds = nullptr) {
  std::vector<int> labels(mask.size(), 0);
  std::vector<int> stack;
  int next = 0;
  if (bounds != nullptr) bounds->clear();
  for (int start = 0; start < static_cast<int>(mask.size()); ++start) {
    if (!mask[start] || labels[start] != 0) continue;
    ++next;
    ComponentBounds b{next, start / n, start / n, start % n, start % n, 0};
    labels[start] = next;
    stack.push_back(start);
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      const int r = i / n, c = i % n;
      ++b.area;
      b.row_min = std::min(b.row_min, r);
      b.row_max = std::max(b.row_max, r);
      b.col_min = std::min(b.col_min, c);
      b.col_max = std::max(b.col_max, c);
      auto visit = [&](int j) {
        if (mask[j] && labels[j] == 0) {
          labels[j] = next;
          stack.push_back(j);
        }
      };
      if (r > 0) visit(i - n);
      if (r + 1 < n) visit(i + n);
      if (c > 0) visit(i - 1);
      if (c + 1 < n) visit(i + 1);
    }
    if (bounds != nullptr) bounds->push_back(b);
  }
  return labels;
}

}  // namespace forge::layout
