#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "forge/core/error.hpp"
#include "forge/layout/types.hpp"

namespace forge::waregen {

template <typename T>
struct Range {
  T min{};
  T max{};

  void validate(const char* name) const {
    if (!(min <= max)) {
      throw Error(ErrorCode::InvalidConfig, std::string(name) + ": min must not exceed max");
    }
  }
  friend bool operator==(const Range&, const Range&) = default;
};

enum class Density { Dense = 0, Moderate = 1, Sparse = 2 };

constexpr const char* to_string(Density d) {
  switch (d) {
    case Density::Dense: return "dense";
    case Density::Moderate: return "moderate";
    case Density::Sparse: return "sparse";
  }
  return "?";
}

/// Everything the generator randomises. Lengths in metres, angles in
/// radians unless the name says otherwise.
struct GenConfig {
  layout::GridSpec grid;

  Range<int> rack_count{3, 5};
  Range<int> shelves_per_rack{2, 3};
  Range<double> rack_width{1.8, 2.6};
  Range<double> rack_depth{0.8, 1.2};
  Range<double> first_shelf_height{0.1, 0.3};
  Range<double> shelf_spacing{1.0, 1.4};
  Range<double> rack_spacing{0.4, 1.0};
  double top_clearance = 2.0;

  // Weights for dense / moderate / sparse placement.
  std::array<double, 3> density_weights{1.0, 1.0, 1.0};
  Range<int> boxes_per_shelf{0, 8};
  Range<double> box_width{0.25, 0.6};
  Range<double> box_depth{0.25, 0.7};
  Range<double> box_height{0.2, 0.5};
  double box_gap = 0.08;          // minimum free X distance between columns
  double yaw_probability = 0.3;
  double max_yaw = 0.35;
  Range<int> stack_height{1, 3};  // boxes per column
  double stack_shrink = 0.75;     // smallest footprint scale of a stacked box
  double band_margin = 0.05;      // free space kept below the next shelf

  double distractor_probability = 0.5;
  int texture_variants = 16;
  int color_variants = 12;

  Range<double> camera_standoff{1.5, 3.5};
  Range<double> camera_height{1.0, 1.8};
  double fov = std::numbers::pi / 2;
  double max_range = 12.0;
  double max_step = 0.5;
  int frames_per_sequence = 20;
  int sequences = 40;

  std::uint64_t seed = 0;

  void validate() const {
    grid.validate();
    rack_count.validate("rack_count");
    shelves_per_rack.validate("shelves_per_rack");
    rack_width.validate("rack_width");
    rack_depth.validate("rack_depth");
    first_shelf_height.validate("first_shelf_height");
    shelf_spacing.validate("shelf_spacing");
    rack_spacing.validate("rack_spacing");
    boxes_per_shelf.validate("boxes_per_shelf");
    box_width.validate("box_width");
    box_depth.validate("box_depth");
    box_height.validate("box_height");
    stack_height.validate("stack_height");
    camera_standoff.validate("camera_standoff");
    camera_height.validate("camera_height");
    if (rack_count.min < 1) throw Error(ErrorCode::InvalidConfig, "rack_count.min must be >= 1");
    if (shelves_per_rack.min < 1 || shelves_per_rack.max > grid.num_shelves) {
      throw Error(ErrorCode::InvalidConfig, "shelves_per_rack must lie in [1, num_shelves]");
    }
    if (boxes_per_shelf.min < 0) throw Error(ErrorCode::InvalidConfig, "boxes_per_shelf.min must be >= 0");
    if (stack_height.min < 1) throw Error(ErrorCode::InvalidConfig, "stack_height.min must be >= 1");
    if (frames_per_sequence < 2) throw Error(ErrorCode::InvalidConfig, "frames_per_sequence must be >= 2");
    if (sequences < 1) throw Error(ErrorCode::InvalidConfig, "sequences must be >= 1");
    if (!(fov > 0 && fov < std::numbers::pi)) throw Error(ErrorCode::InvalidConfig, "fov must lie in (0, pi)");
    if (!(max_range > 0)) throw Error(ErrorCode::InvalidConfig, "max_range must be > 0");
    if (!(max_step > 0)) throw Error(ErrorCode::InvalidConfig, "max_step must be > 0");
    if (rack_width.min <= 0 || rack_depth.min <= 0 || box_width.min <= 0 || box_depth.min <= 0 ||
        box_height.min <= 0 || shelf_spacing.min <= 0 || top_clearance <= 0) {
      throw Error(ErrorCode::InvalidConfig, "all sizes must be positive");
    }
    if (box_gap < 0 || band_margin < 0) throw Error(ErrorCode::InvalidConfig, "gaps must be >= 0");
    if (yaw_probability < 0 || yaw_probability > 1) {
      throw Error(ErrorCode::InvalidConfig, "yaw_probability must lie in [0, 1]");
    }
    if (!(stack_shrink > 0 && stack_shrink <= 1)) {
      throw Error(ErrorCode::InvalidConfig, "stack_shrink must lie in (0, 1]");
    }
    double wsum = 0;
    for (double w : density_weights) {
      if (w < 0) throw Error(ErrorCode::InvalidConfig, "density weights must be >= 0");
      wsum += w;
    }
    if (wsum <= 0) throw Error(ErrorCode::InvalidConfig, "density weights must not all be zero");
  }

  friend bool operator==(const GenConfig&, const GenConfig&) = default;
};

}  // namespace forge::waregen
