#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "forge/core/error.hpp"
#include "forge/eval/metrics.hpp"
#include "forge/io/grid_io.hpp"
#include "forge/io/json_io.hpp"
#include "forge/io/parallel.hpp"
#include "forge/predictor/degrade.hpp"
#include "forge/waregen/generate.hpp"
#include "forge/waregen/sequence.hpp"
#include "forge/waregen/split.hpp"
#include "forge/waregen/trajectory.hpp"

namespace forge::io {

namespace fs = std::filesystem;

/// 64-bit FNV-1a, hex encoded.
inline std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string config_hash(const waregen::GenConfig& cfg) { return fnv1a_hex(to_json(cfg).dump()); }

inline std::string sequence_id(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "seq_%04d", index);
  return buf;
}

inline std::string frame_file(const char* prefix, int index, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%04d.%s", prefix, index, ext);
  return buf;
}

// ---- Pose CSV ----------------------------------------------------------------

inline std::string poses_to_csv(const std::vector<layout::CameraPose>& poses) {
  std::string out = "frame,x,y,z,yaw\n";
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const auto& p = poses[i];
    char line[160];
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g,%.17g\n", i, p.position.x, p.position.y,
                  p.position.z, p.yaw);
    out += line;
  }
  return out;
}

inline std::vector<layout::CameraPose> poses_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "frame,x,y,z,yaw") {
    throw Error(ErrorCode::FormatError, "pose CSV must start with the header frame,x,y,z,yaw", 0);
  }
  std::vector<layout::CameraPose> poses;
  std::uint64_t offset = line.size() + 1;
  while (std::getline(in, line)) {
    if (line.empty()) {
      offset += 1;
      continue;
    }
    std::size_t frame = 0;
    double x = 0, y = 0, z = 0, yaw = 0;
    int used = 0;
    if (std::sscanf(line.c_str(), "%zu,%lf,%lf,%lf,%lf%n", &frame, &x, &y, &z, &yaw, &used) != 5 ||
        used != static_cast<int>(line.size())) {
      throw Error(ErrorCode::FormatError, "malformed pose row: " + line, offset);
    }
    if (frame != poses.size()) {
      throw Error(ErrorCode::FormatError, "pose rows must be numbered 0, 1, 2, ...", offset);
    }
    poses.push_back({{x, y, z}, yaw});
    offset += line.size() + 1;
  }
  return poses;
}

// ---- Per-frame metadata --------------------------------------------------------

struct FrameMeta {
  int index = 0;
  std::vector<int> visible;
  Vec3 origin;  // shelf-frame origin in world coordinates
  bool empty = false;
  friend bool operator==(const FrameMeta&, const FrameMeta&) = default;
};

inline json to_json(const std::vector<FrameMeta>& frames) {
  json j = json::array();
  for (const auto& f : frames) {
    j.push_back({{"index", f.index}, {"visible", f.visible}, {"origin", detail::write(f.origin)}, {"empty", f.empty}});
  }
  return j;
}

inline std::vector<FrameMeta> frame_meta_from_json(const json& j) {
  if (!j.is_array()) detail::invalid("frames", "expected an array");
  std::vector<FrameMeta> out(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = "frames[" + std::to_string(i) + "]";
    detail::get(j[i], "index", out[i].index, p);
    detail::get(j[i], "visible", out[i].visible, p);
    detail::get(j[i], "origin", out[i].origin, p);
    detail::get(j[i], "empty", out[i].empty, p);
    if (out[i].index != static_cast<int>(i)) detail::invalid(p + ".index", "must equal its position");
  }
  return out;
}

// ---- Manifest -----------------------------------------------------------------

/// One sequence; all paths are relative to the dataset root.
struct SequenceEntry {
  std::string id;
  int frames = 0;
  std::string scene;
  std::string poses;
  std::string meta;
  std::vector<std::string> top;
  std::vector<std::string> front;
  std::vector<std::string> top_prob;  // predictions only
  std::vector<std::string> front_prob;
  friend bool operator==(const SequenceEntry&, const SequenceEntry&) = default;
};

struct Manifest {
  std::string kind = "dataset";  // or "predictions"
  layout::GridSpec grid;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<SequenceEntry> sequences;
  waregen::DatasetSplit split;
};

inline constexpr int kManifestVersion = 1;

inline json to_json(const Manifest& m) {
  json seqs = json::array();
  for (const auto& s : m.sequences) {
    json e = {{"id", s.id}, {"frames", s.frames}, {"scene", s.scene}, {"poses", s.poses},
              {"meta", s.meta}, {"top", s.top}, {"front", s.front}};
    if (!s.top_prob.empty() || !s.front_prob.empty()) {
      e["top_prob"] = s.top_prob;
      e["front_prob"] = s.front_prob;
    }
    seqs.push_back(e);
  }
  return {{"format", "forge-dataset"}, {"version", kManifestVersion}, {"kind", m.kind},
          {"grid", to_json(m.grid)},   {"config_hash", m.config_hash},  {"seed", m.seed},
          {"sequences", seqs},         {"split", to_json(m.split)}};
}

inline Manifest manifest_from_json(const json& j) {
  const std::string p = "manifest";
  Manifest m;
  std::string format;
  detail::get(j, "format", format, p);
  if (format != "forge-dataset") detail::invalid(p + ".format", "expected \"forge-dataset\"");
  int version = 0;
  detail::get(j, "version", version, p);
  if (version != kManifestVersion) detail::invalid(p + ".version", "unsupported version " + std::to_string(version));
  detail::get(j, "kind", m.kind, p);
  if (m.kind != "dataset" && m.kind != "predictions") {
    detail::invalid(p + ".kind", "expected \"dataset\" or \"predictions\"");
  }
  m.grid = grid_from_json(detail::field(j, "grid", p), p + ".grid");
  detail::get(j, "config_hash", m.config_hash, p);
  detail::get(j, "seed", m.seed, p);
  const json& seqs = detail::field(j, "sequences", p);
  if (!seqs.is_array()) detail::invalid(p + ".sequences", "expected an array");
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    const std::string sp = p + ".sequences[" + std::to_string(i) + "]";
    SequenceEntry s;
    detail::get(seqs[i], "id", s.id, sp);
    detail::get(seqs[i], "frames", s.frames, sp);
    detail::get(seqs[i], "scene", s.scene, sp);
    detail::get(seqs[i], "poses", s.poses, sp);
    detail::get(seqs[i], "meta", s.meta, sp);
    detail::get(seqs[i], "top", s.top, sp);
    detail::get(seqs[i], "front", s.front, sp);
    if (seqs[i].contains("top_prob")) detail::get(seqs[i], "top_prob", s.top_prob, sp);
    if (seqs[i].contains("front_prob")) detail::get(seqs[i], "front_prob", s.front_prob, sp);
    const auto n = static_cast<std::size_t>(s.frames);
    if (s.frames < 1) detail::invalid(sp + ".frames", "must be >= 1");
    if (s.top.size() != n || s.front.size() != n) detail::invalid(sp + ".top", "one file per frame expected");
    if (!s.top_prob.empty() && (s.top_prob.size() != n || s.front_prob.size() != n)) {
      detail::invalid(sp + ".top_prob", "one file per frame expected");
    }
    m.sequences.push_back(std::move(s));
  }
  m.split = split_from_json(detail::field(j, "split", p), p + ".split");
  return m;
}

/// Loads `root/manifest.json` and checks that every referenced file exists
/// and that the recorded config hash matches `root/config.json`.
inline Manifest load_manifest(const fs::path& root) {
  Manifest m = manifest_from_json(parse_json(read_text(root / "manifest.json"), (root / "manifest.json").string()));
  auto require = [&](const std::string& rel, const std::string& what) {
    if (!fs::is_regular_file(root / rel)) {
      throw Error(ErrorCode::ValidationError, what + ": missing file " + (root / rel).string());
    }
  };
  for (const auto& s : m.sequences) {
    require(s.scene, s.id + " scene");
    require(s.poses, s.id + " poses");
    require(s.meta, s.id + " frame metadata");
    for (int f = 0; f < s.frames; ++f) {
      const std::string tag = s.id + " frame " + std::to_string(f);
      require(s.top[f], tag);
      require(s.front[f], tag);
      if (!s.top_prob.empty()) {
        require(s.top_prob[f], tag);
        require(s.front_prob[f], tag);
      }
    }
  }
  if (fs::is_regular_file(root / "config.json")) {
    const auto cfg = gen_config_from_json(parse_json(read_text(root / "config.json"), "config.json"));
    if (config_hash(cfg) != m.config_hash) {
      throw Error(ErrorCode::ValidationError, "manifest.config_hash: does not match config.json");
    }
  }
  return m;
}

// ---- Generation ---------------------------------------------------------------

/// Seeds of one sequence, all derived from the master seed.
struct SequenceSeeds {
  std::uint64_t scene;
  std::uint64_t trajectory;
};

inline SequenceSeeds sequence_seeds(std::uint64_t master, int index) {
  const std::uint64_t s = derive_seed(master, static_cast<std::uint64_t>(index));
  return {derive_seed(s, 0), derive_seed(s, 1)};
}

struct GeneratedSequence {
  layout::SceneGraph scene;
  std::vector<layout::CameraPose> poses;
  waregen::Sequence sequence;
};

inline GeneratedSequence generate_sequence(const waregen::GenConfig& cfg, std::uint64_t master, int index) {
  const auto seeds = sequence_seeds(master, index);
  GeneratedSequence g;
  g.scene = waregen::generate_warehouse(cfg, seeds.scene);
  g.poses = waregen::generate_trajectory(cfg, g.scene, seeds.trajectory);
  g.sequence = waregen::render_sequence(g.scene, g.poses, cfg.grid, {cfg.fov, cfg.max_range}, sequence_id(index));
  return g;
}

inline std::vector<FrameMeta> frame_meta(const waregen::Sequence& seq) {
  std::vector<FrameMeta> out;
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    const auto& f = seq.frames[i];
    out.push_back({static_cast<int>(i), f.visible, f.shelf_frame.origin, f.empty});
  }
  return out;
}

inline SequenceEntry write_sequence(const fs::path& root, const GeneratedSequence& g) {
  const std::string id = g.sequence.scene_id;
  fs::create_directories(root / id);
  SequenceEntry e;
  e.id = id;
  e.frames = static_cast<int>(g.sequence.frames.size());
  e.scene = id + "/scene.json";
  e.poses = id + "/poses.csv";
  e.meta = id + "/frames.json";
  write_text(root / e.scene, dump(to_json(g.scene)));
  write_text(root / e.poses, poses_to_csv(g.poses));
  write_text(root / e.meta, dump(to_json(frame_meta(g.sequence))));
  for (int f = 0; f < e.frames; ++f) {
    e.top.push_back(id + "/" + frame_file("top", f, "lay"));
    e.front.push_back(id + "/" + frame_file("front", f, "lay"));
    save_layout(root / e.top.back(), g.sequence.frames[f].top);
    save_layout(root / e.front.back(), g.sequence.frames[f].front);
  }
  return e;
}

/// Default train/test/validation fractions.
inline constexpr std::array<double, 3> kDefaultSplit{0.9, 0.05, 0.05};

/// Generates `cfg.sequences` sequences under `root` and writes config.json
/// and manifest.json. Output is identical for any `jobs`.
inline Manifest generate_dataset(const waregen::GenConfig& cfg, std::uint64_t seed, const fs::path& root,
                                 unsigned jobs = 1) {
  cfg.validate();
  fs::create_directories(root);
  Manifest m;
  m.grid = cfg.grid;
  m.config_hash = config_hash(cfg);
  m.seed = seed;
  m.sequences.resize(static_cast<std::size_t>(cfg.sequences));
  parallel_for(m.sequences.size(), jobs, [&](std::size_t i) {
    try {
      m.sequences[i] = write_sequence(root, generate_sequence(cfg, seed, static_cast<int>(i)));
    } catch (const Error& e) {
      throw Error(e.code(), sequence_id(static_cast<int>(i)) + ": " + e.what(), e.offset());
    }
  });
  std::vector<std::string> ids;
  for (const auto& s : m.sequences) ids.push_back(s.id);
  m.split = waregen::split_dataset(ids, kDefaultSplit, derive_seed(seed, 0x5B117ULL));
  write_text(root / "config.json", dump(to_json(cfg)));
  write_text(root / "manifest.json", dump(to_json(m)));
  return m;
}

// ---- Loading --------------------------------------------------------------------

struct LoadedSequence {
  std::vector<layout::LayoutStack> top, front;
  std::vector<layout::ProbabilityStack> top_prob, front_prob;  // filled when present
  std::vector<FrameMeta> meta;
};

inline LoadedSequence load_sequence(const fs::path& root, const SequenceEntry& e) {
  LoadedSequence s;
  for (int f = 0; f < e.frames; ++f) {
    s.top.push_back(load_layout(root / e.top[f], f));
    s.front.push_back(load_layout(root / e.front[f], f));
    if (!e.top_prob.empty()) {
      s.top_prob.push_back(load_probabilities(root / e.top_prob[f], f));
      s.front_prob.push_back(load_probabilities(root / e.front_prob[f], f));
    }
  }
  s.meta = frame_meta_from_json(parse_json(read_text(root / e.meta), e.meta));
  if (static_cast<int>(s.meta.size()) != e.frames) {
    throw Error(ErrorCode::ValidationError, e.meta + ": frame count does not match the manifest");
  }
  return s;
}

// ---- Degradation ------------------------------------------------------------------

/// Noise seed of one sequence; frames and views are separated inside degrade().
inline std::uint64_t sequence_noise_seed(std::uint64_t master, int index) {
  return derive_seed(master, 0x9E15EULL + static_cast<std::uint64_t>(index));
}

/// Writes simulated predictions for every frame of the dataset at `in` to
/// `out`: hard labels (.lay), probabilities (.plf), frame metadata and a
/// manifest of kind "predictions".
inline Manifest degrade_dataset(const fs::path& in, const predictor::NoiseConfig& noise, const fs::path& out,
                                unsigned jobs = 1) {
  noise.validate();
  const Manifest src = load_manifest(in);
  fs::create_directories(out);
  Manifest m = src;
  m.kind = "predictions";
  parallel_for(src.sequences.size(), jobs, [&](std::size_t i) {
    const auto& e = src.sequences[i];
    const auto seq = load_sequence(in, e);
    predictor::NoiseConfig cfg = noise;
    cfg.seed = sequence_noise_seed(noise.seed, static_cast<int>(i));
    fs::create_directories(out / e.id);
    SequenceEntry& d = m.sequences[i];
    fs::copy_file(in / e.scene, out / d.scene, fs::copy_options::overwrite_existing);
    fs::copy_file(in / e.poses, out / d.poses, fs::copy_options::overwrite_existing);
    fs::copy_file(in / e.meta, out / d.meta, fs::copy_options::overwrite_existing);
    d.top_prob.clear();
    d.front_prob.clear();
    for (int f = 0; f < e.frames; ++f) {
      const auto t = predictor::degrade(seq.top[f], cfg);
      const auto r = predictor::degrade(seq.front[f], cfg);
      d.top_prob.push_back(e.id + "/" + frame_file("top", f, "plf"));
      d.front_prob.push_back(e.id + "/" + frame_file("front", f, "plf"));
      save_layout(out / d.top[f], t.labels);
      save_layout(out / d.front[f], r.labels);
      save_probabilities(out / d.top_prob[f], t.probabilities);
      save_probabilities(out / d.front_prob[f], r.probabilities);
    }
  });
  if (fs::is_regular_file(in / "config.json")) {
    fs::copy_file(in / "config.json", out / "config.json", fs::copy_options::overwrite_existing);
  }
  write_text(out / "noise.json", dump(to_json(noise)));
  write_text(out / "manifest.json", dump(to_json(m)));
  return m;
}

// ---- Evaluation ---------------------------------------------------------------------

/// Metrics of the predictions at `pred` against the dataset at `truth`.
/// Sequences are paired by id and must agree in frame count and grid
/// shape. Missing probability files fall back to one-hot labels.
inline eval::MetricsTable evaluate_dataset(const fs::path& truth, const fs::path& pred) {
  const Manifest tm = load_manifest(truth);
  const Manifest pm =
      manifest_from_json(parse_json(read_text(pred / "manifest.json"), (pred / "manifest.json").string()));

  // Every truth frame needs a prediction; report all offenders at once.
  std::vector<std::string> missing;
  for (std::size_t i = 0; i < tm.sequences.size(); ++i) {
    const auto& te = tm.sequences[i];
    const SequenceEntry* pe = i < pm.sequences.size() && pm.sequences[i].id == te.id ? &pm.sequences[i] : nullptr;
    for (int f = 0; f < te.frames; ++f) {
      const bool have = pe != nullptr && f < pe->frames && fs::is_regular_file(pred / pe->top[f]) &&
                        fs::is_regular_file(pred / pe->front[f]) &&
                        (pe->top_prob.empty() ||
                         (fs::is_regular_file(pred / pe->top_prob[f]) && fs::is_regular_file(pred / pe->front_prob[f])));
      if (!have) missing.push_back(te.id + "/" + std::to_string(f));
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (std::size_t k = 0; k < missing.size() && k < 20; ++k) list += (k ? ", " : "") + missing[k];
    if (missing.size() > 20) list += ", ...";
    throw Error(ErrorCode::AlignmentError,
                std::to_string(missing.size()) + " frame(s) without predictions: " + list);
  }
  if (tm.sequences.size() != pm.sequences.size()) {
    throw Error(ErrorCode::AlignmentError, "truth has " + std::to_string(tm.sequences.size()) +
                                               " sequences, predictions have " + std::to_string(pm.sequences.size()));
  }
  eval::MetricsAccumulator acc;
  for (std::size_t i = 0; i < tm.sequences.size(); ++i) {
    const auto& te = tm.sequences[i];
    const auto& pe = pm.sequences[i];
    if (te.frames != pe.frames) {
      throw Error(ErrorCode::AlignmentError, "sequence " + te.id + " has " + std::to_string(te.frames) +
                                                 " frames, predictions have " + std::to_string(pe.frames));
    }
    const auto ts = load_sequence(truth, te);
    const auto ps = load_sequence(pred, pe);
    for (int f = 0; f < te.frames; ++f) {
      for (int v = 0; v < 2; ++v) {
        const auto& t = v == 0 ? ts.top[f] : ts.front[f];
        const auto& p = v == 0 ? ps.top[f] : ps.front[f];
        if (!t.same_shape(p)) {
          throw Error(ErrorCode::AlignmentError, te.id + " frame " + std::to_string(f) + ": grid shapes differ");
        }
        const layout::ProbabilityStack* prob = nullptr;
        if (!ps.top_prob.empty()) prob = v == 0 ? &ps.top_prob[f] : &ps.front_prob[f];
        acc.add(t, p, prob);
      }
    }
  }
  return acc.table();
}

}  // namespace forge::io
