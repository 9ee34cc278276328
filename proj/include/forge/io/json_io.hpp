#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "forge/core/error.hpp"
#include "forge/eval/losses.hpp"
#include "forge/eval/metrics.hpp"
#include "forge/layout/scene.hpp"
#include "forge/predictor/degrade.hpp"
#include "forge/recon/compare.hpp"
#include "forge/recon/stitch.hpp"
#include "forge/waregen/config.hpp"
#include "forge/waregen/split.hpp"

namespace forge::io {

using json = nlohmann::json;

/// JSON text as written to disk: two-space indent, trailing newline.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::FormatError, what + ": " + e.what(), e.byte);
  }
}

namespace detail {

// Overloads used from the templates below before their definitions.
inline void read(const json& j, layout::GridSpec& v, const std::string& path);
inline void read(const json& j, layout::BoxInstance& v, const std::string& path);
inline void read(const json& j, layout::Shelf& v, const std::string& path);
inline void read(const json& j, layout::Rack& v, const std::string& path);
inline void read(const json& j, layout::SurfaceAttributes& v, const std::string& path);
inline void read(const json& j, recon::Box3D& v, const std::string& path);
inline json write(const layout::GridSpec& g);
inline json write(const recon::Box3D& b);

[[noreturn]] inline void invalid(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::ValidationError, path + ": " + what);
}

inline const json& field(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) invalid(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) invalid(path + "." + key, "missing field");
  return *it;
}

inline void read(const json& j, double& v, const std::string& path) {
  if (!j.is_number()) invalid(path, "expected a number");
  v = j.get<double>();
}

inline void read(const json& j, int& v, const std::string& path) {
  if (!j.is_number_integer()) invalid(path, "expected an integer");
  const auto x = j.get<std::int64_t>();
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) invalid(path, "out of range");
  v = static_cast<int>(x);
}

inline void read(const json& j, std::uint64_t& v, const std::string& path) {
  if (j.is_number_unsigned()) {
    v = j.get<std::uint64_t>();
  } else if (j.is_number_integer() && j.get<std::int64_t>() >= 0) {
    v = static_cast<std::uint64_t>(j.get<std::int64_t>());
  } else {
    invalid(path, "expected a non-negative integer");
  }
}

inline void read(const json& j, bool& v, const std::string& path) {
  if (!j.is_boolean()) invalid(path, "expected a boolean");
  v = j.get<bool>();
}

inline void read(const json& j, std::string& v, const std::string& path) {
  if (!j.is_string()) invalid(path, "expected a string");
  v = j.get<std::string>();
}

inline void read(const json& j, Vec3& v, const std::string& path) {
  if (!j.is_array() || j.size() != 3) invalid(path, "expected an array of 3 numbers");
  for (int k = 0; k < 3; ++k) read(j[k], v[k], path + "[" + std::to_string(k) + "]");
}

template <typename T>
void read(const json& j, waregen::Range<T>& v, const std::string& path) {
  if (!j.is_array() || j.size() != 2) invalid(path, "expected [min, max]");
  read(j[0], v.min, path + "[0]");
  read(j[1], v.max, path + "[1]");
}

template <typename T, std::size_t N>
void read(const json& j, std::array<T, N>& v, const std::string& path) {
  if (!j.is_array() || j.size() != N) invalid(path, "expected an array of " + std::to_string(N) + " values");
  for (std::size_t k = 0; k < N; ++k) read(j[k], v[k], path + "[" + std::to_string(k) + "]");
}

template <typename T>
void read(const json& j, std::vector<T>& v, const std::string& path) {
  if (!j.is_array()) invalid(path, "expected an array");
  v.resize(j.size());
  for (std::size_t k = 0; k < j.size(); ++k) read(j[k], v[k], path + "[" + std::to_string(k) + "]");
}

inline void read(const json& j, predictor::FlipMode& v, const std::string& path) {
  std::string s;
  read(j, s, path);
  if (s == "uniform") v = predictor::FlipMode::Uniform;
  else if (s == "two_class") v = predictor::FlipMode::TwoClass;
  else invalid(path, "expected \"uniform\" or \"two_class\"");
}

template <typename T>
void get(const json& obj, const char* key, T& v, const std::string& path) {
  read(field(obj, key, path), v, path + "." + key);
}

inline json write(double v) { return v; }
inline json write(int v) { return v; }
inline json write(std::uint64_t v) { return v; }
inline json write(bool v) { return v; }
inline json write(const std::string& v) { return v; }
inline json write(Vec3 v) { return json::array({v.x, v.y, v.z}); }
template <typename T>
json write(const waregen::Range<T>& v) {
  return json::array({v.min, v.max});
}
template <typename T, std::size_t N>
json write(const std::array<T, N>& v) {
  json j = json::array();
  for (const auto& x : v) j.push_back(write(x));
  return j;
}
template <typename T>
json write(const std::vector<T>& v) {
  json j = json::array();
  for (const auto& x : v) j.push_back(write(x));
  return j;
}
inline json write(predictor::FlipMode v) {
  return v == predictor::FlipMode::Uniform ? "uniform" : "two_class";
}

// Overrides the listed fields of `cfg` from `j`; unknown keys are rejected.
template <typename Config, typename Visit>
void read_fields(const json& j, Config& cfg, const std::string& path, Visit visit) {
  if (!j.is_object()) invalid(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    visit(cfg, [&](const char* name, auto& member) {
      if (it.key() == name) {
        read(it.value(), member, path + "." + name);
        known = true;
      }
    });
    if (!known) invalid(path + "." + it.key(), "unknown field");
  }
}

template <typename Config, typename Visit>
json write_fields(const Config& cfg, Visit visit) {
  json j = json::object();
  Config copy = cfg;
  visit(copy, [&](const char* name, auto& member) { j[name] = write(member); });
  return j;
}

}  // namespace detail

// ---- GridSpec ---------------------------------------------------------------

inline json to_json(const layout::GridSpec& g) {
  return {{"resolution", g.resolution}, {"extent", g.extent}, {"num_shelves", g.num_shelves}};
}

inline void detail::read(const json& j, layout::GridSpec& v, const std::string& path) {
  read_fields(j, v, path, [](layout::GridSpec& g, auto&& f) {
    f("resolution", g.resolution);
    f("extent", g.extent);
    f("num_shelves", g.num_shelves);
  });
}

inline layout::GridSpec grid_from_json(const json& j, const std::string& path = "grid") {
  layout::GridSpec g;
  detail::read(j, g, path);
  return g;
}

// ---- GenConfig --------------------------------------------------------------

namespace detail {

inline json write(const layout::GridSpec& g) { return to_json(g); }

inline constexpr auto gen_config_fields = [](waregen::GenConfig& c, auto&& f) {
  f("grid", c.grid);
  f("rack_count", c.rack_count);
  f("shelves_per_rack", c.shelves_per_rack);
  f("rack_width", c.rack_width);
  f("rack_depth", c.rack_depth);
  f("first_shelf_height", c.first_shelf_height);
  f("shelf_spacing", c.shelf_spacing);
  f("rack_spacing", c.rack_spacing);
  f("top_clearance", c.top_clearance);
  f("density_weights", c.density_weights);
  f("boxes_per_shelf", c.boxes_per_shelf);
  f("box_width", c.box_width);
  f("box_depth", c.box_depth);
  f("box_height", c.box_height);
  f("box_gap", c.box_gap);
  f("yaw_probability", c.yaw_probability);
  f("max_yaw", c.max_yaw);
  f("stack_height", c.stack_height);
  f("stack_shrink", c.stack_shrink);
  f("band_margin", c.band_margin);
  f("distractor_probability", c.distractor_probability);
  f("texture_variants", c.texture_variants);
  f("color_variants", c.color_variants);
  f("camera_standoff", c.camera_standoff);
  f("camera_height", c.camera_height);
  f("fov", c.fov);
  f("max_range", c.max_range);
  f("max_step", c.max_step);
  f("frames_per_sequence", c.frames_per_sequence);
  f("sequences", c.sequences);
  f("seed", c.seed);
};

inline constexpr auto noise_config_fields = [](predictor::NoiseConfig& c, auto&& f) {
  f("dropout_probability", c.dropout_probability);
  f("radius_min", c.radius_min);
  f("radius_max", c.radius_max);
  f("erosion_probability", c.erosion_probability);
  f("blob_rate", c.blob_rate);
  f("blob_size_min", c.blob_size_min);
  f("blob_size_max", c.blob_size_max);
  f("flip_probability", c.flip_probability);
  f("flip_mode", c.flip_mode);
  f("temperature", c.temperature);
  f("confidence_jitter", c.confidence_jitter);
  f("seed", c.seed);
};

}  // namespace detail

inline json to_json(const waregen::GenConfig& c) { return detail::write_fields(c, detail::gen_config_fields); }

/// Defaults overridden by whatever `j` lists, then validated.
inline waregen::GenConfig gen_config_from_json(const json& j) {
  waregen::GenConfig c;
  detail::read_fields(j, c, "config", detail::gen_config_fields);
  try {
    c.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ValidationError, std::string("config: ") + e.what());
  }
  return c;
}

inline json to_json(const predictor::NoiseConfig& c) {
  return detail::write_fields(c, detail::noise_config_fields);
}

inline predictor::NoiseConfig noise_config_from_json(const json& j) {
  predictor::NoiseConfig c;
  detail::read_fields(j, c, "noise", detail::noise_config_fields);
  try {
    c.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ValidationError, std::string("noise: ") + e.what());
  }
  return c;
}

// ---- SceneGraph -------------------------------------------------------------

inline json to_json(const layout::BoxInstance& b) {
  return {{"id", b.id},
          {"center", detail::write(b.center)},
          {"size", detail::write(b.size)},
          {"yaw", b.yaw},
          {"stack_level", b.stack_level},
          {"column", b.column},
          {"texture_id", b.texture_id},
          {"color_id", b.color_id},
          {"reflectance_id", b.reflectance_id}};
}

inline json to_json(const layout::Shelf& s) {
  json boxes = json::array();
  for (const auto& b : s.boxes) boxes.push_back(to_json(b));
  return {{"rack_id", s.rack_id}, {"level", s.level}, {"elevation", s.elevation},
          {"x_min", s.x_min},     {"x_max", s.x_max}, {"z_min", s.z_min},
          {"z_max", s.z_max},     {"boxes", boxes}};
}

inline json to_json(const layout::Rack& r) {
  json shelves = json::array();
  for (const auto& s : r.shelves) shelves.push_back(to_json(s));
  return {{"id", r.id},
          {"base", detail::write(r.base)},
          {"width", r.width},
          {"depth", r.depth},
          {"shelf_heights", detail::write(r.shelf_heights)},
          {"distractor", r.distractor},
          {"texture_id", r.texture_id},
          {"color_id", r.color_id},
          {"shelves", shelves}};
}

inline json to_json(const layout::SceneGraph& s) {
  json racks = json::array();
  for (const auto& r : s.racks) racks.push_back(to_json(r));
  return {{"racks", racks},
          {"floor", {{"texture_id", s.floor.texture_id}, {"color_id", s.floor.color_id}}},
          {"wall", {{"texture_id", s.wall.texture_id}, {"color_id", s.wall.color_id}}},
          {"background", s.background == layout::BackgroundKind::Wall ? "wall" : "busy_warehouse"},
          {"row_z", s.row_z},
          {"rack_spacing", detail::write(s.rack_spacing)},
          {"top_clearance", s.top_clearance}};
}

namespace detail {

inline void read(const json& j, layout::BoxInstance& b, const std::string& p) {
  get(j, "id", b.id, p);
  get(j, "center", b.center, p);
  get(j, "size", b.size, p);
  get(j, "yaw", b.yaw, p);
  get(j, "stack_level", b.stack_level, p);
  get(j, "column", b.column, p);
  get(j, "texture_id", b.texture_id, p);
  get(j, "color_id", b.color_id, p);
  get(j, "reflectance_id", b.reflectance_id, p);
  for (int k = 0; k < 3; ++k) {
    if (!(b.size[k] > 0)) invalid(p + ".size", "must be positive");
  }
}

inline void read(const json& j, layout::Shelf& s, const std::string& p) {
  get(j, "rack_id", s.rack_id, p);
  get(j, "level", s.level, p);
  get(j, "elevation", s.elevation, p);
  get(j, "x_min", s.x_min, p);
  get(j, "x_max", s.x_max, p);
  get(j, "z_min", s.z_min, p);
  get(j, "z_max", s.z_max, p);
  get(j, "boxes", s.boxes, p);
  if (s.level < 0) invalid(p + ".level", "must be >= 0");
  if (!(s.x_min < s.x_max)) invalid(p + ".x_max", "must exceed x_min");
  if (!(s.z_min < s.z_max)) invalid(p + ".z_max", "must exceed z_min");
}

inline void read(const json& j, layout::Rack& r, const std::string& p) {
  get(j, "id", r.id, p);
  get(j, "base", r.base, p);
  get(j, "width", r.width, p);
  get(j, "depth", r.depth, p);
  get(j, "shelf_heights", r.shelf_heights, p);
  get(j, "distractor", r.distractor, p);
  get(j, "texture_id", r.texture_id, p);
  get(j, "color_id", r.color_id, p);
  get(j, "shelves", r.shelves, p);
  if (!(r.width > 0)) invalid(p + ".width", "must be positive");
  if (!(r.depth > 0)) invalid(p + ".depth", "must be positive");
  if (r.shelves.size() != r.shelf_heights.size()) invalid(p + ".shelves", "count must match shelf_heights");
  for (std::size_t i = 0; i < r.shelves.size(); ++i) {
    if (r.shelves[i].level != static_cast<int>(i)) {
      invalid(p + ".shelves[" + std::to_string(i) + "].level", "must equal its index");
    }
  }
}

inline void read(const json& j, layout::SurfaceAttributes& s, const std::string& p) {
  get(j, "texture_id", s.texture_id, p);
  get(j, "color_id", s.color_id, p);
}

}  // namespace detail

inline layout::SceneGraph scene_from_json(const json& j) {
  const std::string p = "scene";
  layout::SceneGraph s;
  detail::get(j, "racks", s.racks, p);
  detail::get(j, "floor", s.floor, p);
  detail::get(j, "wall", s.wall, p);
  std::string bg;
  detail::get(j, "background", bg, p);
  if (bg == "wall") s.background = layout::BackgroundKind::Wall;
  else if (bg == "busy_warehouse") s.background = layout::BackgroundKind::BusyWarehouse;
  else detail::invalid(p + ".background", "expected \"wall\" or \"busy_warehouse\"");
  detail::get(j, "row_z", s.row_z, p);
  detail::get(j, "rack_spacing", s.rack_spacing, p);
  detail::get(j, "top_clearance", s.top_clearance, p);
  if (!(s.top_clearance > 0)) detail::invalid(p + ".top_clearance", "must be positive");
  return s;
}

// ---- Reconstructions --------------------------------------------------------

inline json to_json(const recon::Box3D& b) {
  return {{"level", b.level},
          {"min", detail::write(b.bounds.min)},
          {"max", detail::write(b.bounds.max)},
          {"top_id", b.top_id},
          {"front_id", b.front_id},
          {"clipped", static_cast<int>(b.clipped)}};
}

namespace detail {

inline json write(const recon::Box3D& b) { return to_json(b); }

inline void read(const json& j, recon::Box3D& b, const std::string& p) {
  get(j, "level", b.level, p);
  get(j, "min", b.bounds.min, p);
  get(j, "max", b.bounds.max, p);
  get(j, "top_id", b.top_id, p);
  get(j, "front_id", b.front_id, p);
  int clipped = 0;
  get(j, "clipped", clipped, p);
  if (clipped < 0 || clipped > 63) invalid(p + ".clipped", "must lie in [0, 63]");
  b.clipped = static_cast<std::uint8_t>(clipped);
  for (int k = 0; k < 3; ++k) {
    if (!(b.bounds.min[k] <= b.bounds.max[k])) invalid(p + ".max", "must not be below min");
  }
}

inline json write_anchor(const std::optional<Vec3>& a) { return a ? write(*a) : json(nullptr); }

inline std::optional<Vec3> read_anchor(const json& j, const std::string& p) {
  const json& a = field(j, "anchor", p);
  if (a.is_null()) return std::nullopt;
  Vec3 v;
  read(a, v, p + ".anchor");
  return v;
}

}  // namespace detail

inline json to_json(const recon::FrameRecon& f) {
  return {{"frame_index", f.frame_index},
          {"channels", f.channels},
          {"meters_per_cell", f.meters_per_cell},
          {"anchor", detail::write_anchor(f.anchor)},
          {"slabs", detail::write(f.slabs)},
          {"boxes", detail::write(f.boxes)}};
}

inline recon::FrameRecon frame_recon_from_json(const json& j) {
  const std::string p = "frame";
  recon::FrameRecon f;
  detail::get(j, "frame_index", f.frame_index, p);
  detail::get(j, "channels", f.channels, p);
  detail::get(j, "meters_per_cell", f.meters_per_cell, p);
  f.anchor = detail::read_anchor(j, p);
  detail::get(j, "slabs", f.slabs, p);
  detail::get(j, "boxes", f.boxes, p);
  return f;
}

inline json to_json(const recon::WorldRecon& w) {
  return {{"meters_per_cell", w.meters_per_cell},
          {"channels", w.channels},
          {"anchor", detail::write_anchor(w.anchor)},
          {"slabs", detail::write(w.slabs)},
          {"boxes", detail::write(w.boxes)},
          {"shifts", detail::write(w.shifts)},
          {"offsets", detail::write(w.offsets)},
          {"direction", w.direction},
          {"direction_axis", w.direction_axis}};
}

inline recon::WorldRecon world_recon_from_json(const json& j) {
  const std::string p = "world";
  recon::WorldRecon w;
  detail::get(j, "meters_per_cell", w.meters_per_cell, p);
  detail::get(j, "channels", w.channels, p);
  w.anchor = detail::read_anchor(j, p);
  detail::get(j, "slabs", w.slabs, p);
  detail::get(j, "boxes", w.boxes, p);
  detail::get(j, "shifts", w.shifts, p);
  detail::get(j, "offsets", w.offsets, p);
  detail::get(j, "direction", w.direction, p);
  detail::get(j, "direction_axis", w.direction_axis, p);
  if (w.shifts.size() != w.offsets.size()) detail::invalid(p + ".offsets", "length must match shifts");
  if (w.direction < -1 || w.direction > 1) detail::invalid(p + ".direction", "must be -1, 0 or 1");
  if (w.direction_axis < 0 || w.direction_axis > 2) detail::invalid(p + ".direction_axis", "must lie in [0, 2]");
  return w;
}

inline constexpr auto recon_config_fields = [](recon::ReconConfig& c, auto&& f) {
  f("min_area", c.min_area);
  f("min_x_iou", c.min_x_iou);
  f("size_tolerance", c.size_tolerance);
  f("inlier_gate_cells", c.inlier_gate_cells);
  f("fuse_gate_cells", c.fuse_gate_cells);
};

inline json to_json(const recon::ReconConfig& c) { return detail::write_fields(c, recon_config_fields); }

inline recon::ReconConfig recon_config_from_json(const json& j) {
  recon::ReconConfig c;
  detail::read_fields(j, c, "recon", recon_config_fields);
  if (c.min_area < 1) detail::invalid("recon.min_area", "must be >= 1");
  if (c.min_x_iou < 0 || c.min_x_iou > 1) detail::invalid("recon.min_x_iou", "must lie in [0, 1]");
  if (c.size_tolerance < 0) detail::invalid("recon.size_tolerance", "must be >= 0");
  if (!(c.inlier_gate_cells > 0)) detail::invalid("recon.inlier_gate_cells", "must be > 0");
  if (!(c.fuse_gate_cells > 0)) detail::invalid("recon.fuse_gate_cells", "must be > 0");
  return c;
}

// ---- Reports ----------------------------------------------------------------

inline json to_json(const eval::MetricsTable& t) {
  json j = json::object();
  for (layout::View v : {layout::View::Top, layout::View::Front}) {
    json view = json::object();
    for (eval::MetricClass c : {eval::MetricClass::Rack, eval::MetricClass::Box}) {
      const auto& e = t.at(v, c);
      view[std::string(eval::to_string(c))] = {{"miou", e.miou ? json(*e.miou) : json(nullptr)},
                                               {"map", e.map ? json(*e.map) : json(nullptr)}};
    }
    j[std::string(layout::to_string(v))] = view;
  }
  return j;
}

inline eval::MetricsTable metrics_from_json(const json& j) {
  eval::MetricsTable t;
  for (layout::View v : {layout::View::Top, layout::View::Front}) {
    const std::string vn(layout::to_string(v));
    const json& view = detail::field(j, vn.c_str(), "metrics");
    for (eval::MetricClass c : {eval::MetricClass::Rack, eval::MetricClass::Box}) {
      const std::string cn(eval::to_string(c));
      const std::string p = "metrics." + vn + "." + cn;
      const json& e = detail::field(view, cn.c_str(), "metrics." + vn);
      auto opt = [&](const char* key) -> std::optional<double> {
        const json& x = detail::field(e, key, p);
        if (x.is_null()) return std::nullopt;
        double d = 0;
        detail::read(x, d, p + "." + key);
        if (d < 0 || d > 100) detail::invalid(p + "." + key, "must lie in [0, 100]");
        return d;
      };
      t.at(v, c).miou = opt("miou");
      t.at(v, c).map = opt("map");
    }
  }
  return t;
}

inline json to_json(const eval::LossReport& r) {
  return {{"l_sup", r.l_sup},   {"l_adv", r.l_adv},     {"l_short", r.l_short},
          {"l_long", r.l_long}, {"l_discr", r.l_discr}, {"l_total", r.l_total}};
}

inline json to_json(const recon::CompareReport& r) {
  return {{"predicted", r.predicted},
          {"truth", r.truth},
          {"matched", r.matched},
          {"precision", r.precision},
          {"recall", r.recall},
          {"mean_center_error", r.mean_center_error},
          {"mean_size_error", r.mean_size_error},
          {"max_center_error", r.max_center_error}};
}

inline json to_json(const waregen::DatasetSplit& s) {
  return {{"train", s.train}, {"test", s.test}, {"validation", s.validation}, {"seed", s.seed}};
}

inline waregen::DatasetSplit split_from_json(const json& j, const std::string& p = "split") {
  waregen::DatasetSplit s;
  detail::get(j, "train", s.train, p);
  detail::get(j, "test", s.test, p);
  detail::get(j, "validation", s.validation, p);
  detail::get(j, "seed", s.seed, p);
  return s;
}

}  // namespace forge::io
