#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "forge/core/error.hpp"
#include "forge/core/geometry.hpp"

namespace forge::layout {

/// Square layout grid over the region of interest.
struct GridSpec {
  int resolution = 256;    // cells per side
  double extent = 10.0;    // metres per side
  int num_shelves = 3;     // channels, one per shelf level

  double meters_per_cell() const { return extent / resolution; }

  /// Coordinate of the centre of cell `index` along one axis, relative to
  /// the grid centre. Columns use it directly for X, front-view rows for Y
  /// (Y points down), top-view rows for -Z (row 0 is the far edge).
  double cell_center(int index) const {
    return (index + 0.5 - resolution / 2.0) * meters_per_cell();
  }

  /// Lower boundary of cell `index`, relative to the grid centre.
  double cell_edge(int index) const {
    return (index - resolution / 2.0) * meters_per_cell();
  }

  void validate() const {
    if (resolution < 8) throw Error(ErrorCode::InvalidConfig, "grid resolution must be >= 8");
    if (!(extent > 0.0)) throw Error(ErrorCode::InvalidConfig, "grid extent must be > 0");
    if (num_shelves < 1) throw Error(ErrorCode::InvalidConfig, "num_shelves must be >= 1");
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

enum class CellClass : std::uint8_t { Background = 0, Unoccupied = 1, Occupied = 2 };
inline constexpr int kNumClasses = 3;

enum class View : std::uint8_t { Top = 0, Front = 1 };

constexpr std::string_view to_string(View v) { return v == View::Top ? "top" : "front"; }

/// R channels of D x D cell classes, row-major within a channel.
class LayoutStack {
 public:
  LayoutStack() = default;
  LayoutStack(View view, int channels, int resolution, int frame_index = 0)
      : view_(view),
        channels_(channels),
        resolution_(resolution),
        frame_index_(frame_index),
        cells_(static_cast<std::size_t>(channels) * resolution * resolution,
               CellClass::Background) {}

  View view() const { return view_; }
  int channels() const { return channels_; }
  int resolution() const { return resolution_; }
  int frame_index() const { return frame_index_; }
  void set_frame_index(int index) { frame_index_ = index; }
  std::size_t cells_per_channel() const {
    return static_cast<std::size_t>(resolution_) * resolution_;
  }

  CellClass at(int channel, int row, int col) const { return cells_[index(channel, row, col)]; }
  void set(int channel, int row, int col, CellClass c) { cells_[index(channel, row, col)] = c; }

  std::span<const CellClass> channel(int c) const {
    return std::span<const CellClass>(cells_).subspan(c * cells_per_channel(), cells_per_channel());
  }
  std::span<CellClass> channel(int c) {
    return std::span<CellClass>(cells_).subspan(c * cells_per_channel(), cells_per_channel());
  }
  std::span<const CellClass> cells() const { return cells_; }
  std::span<CellClass> cells() { return cells_; }

  bool same_shape(const LayoutStack& o) const {
    return view_ == o.view_ && channels_ == o.channels_ && resolution_ == o.resolution_;
  }

  friend bool operator==(const LayoutStack& a, const LayoutStack& b) {
    return a.same_shape(b) && a.cells_ == b.cells_;
  }

 private:
  std::size_t index(int channel, int row, int col) const {
    return (static_cast<std::size_t>(channel) * resolution_ + row) * resolution_ + col;
  }

  View view_ = View::Top;
  int channels_ = 0;
  int resolution_ = 0;
  int frame_index_ = 0;
  std::vector<CellClass> cells_;
};

/// Same shape as LayoutStack; each cell holds a probability per CellClass.
/// Stored as float on disk; loss kernels are also instantiated with double.
template <typename Real>
class BasicProbabilityStack {
 public:
  using value_type = Real;

  BasicProbabilityStack() = default;
  BasicProbabilityStack(View view, int channels, int resolution, int frame_index = 0)
      : view_(view),
        channels_(channels),
        resolution_(resolution),
        frame_index_(frame_index),
        values_(static_cast<std::size_t>(channels) * resolution * resolution * kNumClasses,
                Real(0)) {}

  static BasicProbabilityStack one_hot(const LayoutStack& labels) {
    BasicProbabilityStack out(labels.view(), labels.channels(), labels.resolution(),
                              labels.frame_index());
    const auto cells = labels.cells();
    for (std::size_t i = 0; i < cells.size(); ++i) {
      out.values_[i * kNumClasses + static_cast<int>(cells[i])] = Real(1);
    }
    return out;
  }

  View view() const { return view_; }
  int channels() const { return channels_; }
  int resolution() const { return resolution_; }
  int frame_index() const { return frame_index_; }
  void set_frame_index(int index) { frame_index_ = index; }
  std::size_t cells_per_channel() const {
    return static_cast<std::size_t>(resolution_) * resolution_;
  }
  std::size_t cell_count() const { return cells_per_channel() * channels_; }

  /// Probability vector of flat cell `i` (channel-major, row-major).
  std::span<const Real, kNumClasses> cell(std::size_t i) const {
    return std::span<const Real, kNumClasses>(values_.data() + i * kNumClasses, kNumClasses);
  }
  std::span<Real, kNumClasses> cell(std::size_t i) {
    return std::span<Real, kNumClasses>(values_.data() + i * kNumClasses, kNumClasses);
  }
  std::span<const Real, kNumClasses> cell(int channel, int row, int col) const {
    return cell((static_cast<std::size_t>(channel) * resolution_ + row) * resolution_ + col);
  }

  std::span<const Real> values() const { return values_; }
  std::span<Real> values() { return values_; }

  /// Hard labels; ties resolve to the lower class id.
  LayoutStack argmax() const {
    LayoutStack out(view_, channels_, resolution_, frame_index_);
    auto cells = out.cells();
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto p = cell(i);
      int best = 0;
      for (int k = 1; k < kNumClasses; ++k) {
        if (p[k] > p[best]) best = k;
      }
      cells[i] = static_cast<CellClass>(best);
    }
    return out;
  }

  template <typename Other>
  bool same_shape(const Other& o) const {
    return view_ == o.view() && channels_ == o.channels() && resolution_ == o.resolution();
  }

  friend bool operator==(const BasicProbabilityStack& a, const BasicProbabilityStack& b) {
    return a.same_shape(b) && a.values_ == b.values_;
  }

 private:
  View view_ = View::Top;
  int channels_ = 0;
  int resolution_ = 0;
  int frame_index_ = 0;
  std::vector<Real> values_;
};

using ProbabilityStack = BasicProbabilityStack<float>;

/// Camera kept level with the ground; yaw 0 looks along world -Z.
struct CameraPose {
  Vec3 position;
  double yaw = 0.0;

  /// Viewing direction projected onto the ground, as (x, z).
  Vec2 forward() const { return {-std::sin(yaw), -std::cos(yaw)}; }
  friend bool operator==(const CameraPose&, const CameraPose&) = default;
};

/// Shelf-centric reference frame.
///
/// World: X along the rack row, Y up, Z towards the camera side of the aisle.
/// Shelf frame: X right, Y down, Z into the scene; i.e. the world axes with
/// Y and Z negated, which keeps it right-handed. Both views share one origin:
/// the centre of the union of visible shelf volumes.
struct ShelfFrame {
  Vec3 origin;
  View view = View::Top;
  double extent = 10.0;

  static constexpr std::array<Vec3, 3> axes() {
    return {Vec3{1, 0, 0}, Vec3{0, -1, 0}, Vec3{0, 0, -1}};
  }

  Vec3 to_shelf(Vec3 world) const {
    return {world.x - origin.x, origin.y - world.y, origin.z - world.z};
  }
  Vec3 to_world(Vec3 shelf) const {
    return {origin.x + shelf.x, origin.y - shelf.y, origin.z - shelf.z};
  }
  friend bool operator==(const ShelfFrame&, const ShelfFrame&) = default;
};

}  // namespace forge::layout
