#pragma once

#include <algorithm>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "forge/eval/losses.hpp"
#include "forge/io/dataset.hpp"
#include "forge/recon/lift.hpp"
#include "forge/recon/stitch.hpp"

namespace forge::io {

// ---- Per-frame reconstruction -------------------------------------------------

/// Reconstructs every frame of the dataset (truth or predictions) at
/// `layouts` into `out/<sequence>/frame_XXXX.json`. Frames with nothing
/// visible produce empty reconstructions without an anchor.
inline void recon_dataset(const fs::path& layouts, const fs::path& out, const recon::ReconConfig& cfg,
                          unsigned jobs = 1) {
  const Manifest m = load_manifest(layouts);
  fs::create_directories(out);
  json index = json::array();
  for (const auto& e : m.sequences) index.push_back({{"id", e.id}, {"frames", e.frames}});
  parallel_for(m.sequences.size(), jobs, [&](std::size_t i) {
    const auto& e = m.sequences[i];
    const auto seq = load_sequence(layouts, e);
    fs::create_directories(out / e.id);
    for (int f = 0; f < e.frames; ++f) {
      std::optional<Vec3> anchor;
      if (!seq.meta[f].empty) anchor = seq.meta[f].origin;
      const auto fr = recon::reconstruct_frame(seq.top[f], seq.front[f], m.grid, cfg, f, anchor);
      write_text(out / e.id / frame_file("frame", f, "json"), dump(to_json(fr)));
    }
  });
  write_text(out / "recon.json", dump({{"grid", to_json(m.grid)}, {"config", to_json(cfg)}, {"sequences", index}}));
}

/// All frame_XXXX.json files of one directory, in frame order.
inline std::vector<recon::FrameRecon> load_frame_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::IoError, "not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.starts_with("frame_") && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error(ErrorCode::ValidationError, dir.string() + ": no frame_*.json files");
  std::vector<recon::FrameRecon> frames;
  for (const auto& f : files) {
    try {
      frames.push_back(frame_recon_from_json(parse_json(read_text(f), f.string())));
    } catch (const Error& e) {
      throw Error(e.code(), f.filename().string() + ": " + e.what(), e.offset());
    }
  }
  return frames;
}

// ---- Multi-sequence stitching ----------------------------------------------------

/// Translation taking shelf-frame coordinates anchored at `b` to those
/// anchored at `a` (add it to a point expressed relative to `b`).
inline Vec3 anchor_offset(Vec3 a, Vec3 b) { return {b.x - a.x, a.y - b.y, a.z - b.z}; }

/// Merges `b` into `a`; `offset` is added to every coordinate of `b`.
inline recon::WorldRecon merge_worlds(recon::WorldRecon a, const recon::WorldRecon& b, Vec3 offset,
                                      const recon::ReconConfig& cfg = {}) {
  recon::FrameRecon as_frame;
  as_frame.channels = b.channels;
  as_frame.meters_per_cell = b.meters_per_cell;
  as_frame.slabs = b.slabs;
  as_frame.boxes = b.boxes;
  recon::WorldRecon out = recon::merge_frame(std::move(a), as_frame, Vec3{} - offset, cfg);
  for (std::size_t i = 0; i < b.shifts.size(); ++i) {
    out.shifts.push_back(b.shifts[i]);
    out.offsets.push_back(b.offsets[i] - offset);
  }
  return out;
}

/// Stitches each directory as one sequence and merges the results into the
/// frame of the first. `offsets[k]` registers sequence k + 1; when absent,
/// the offset comes from the recorded anchors.
inline recon::WorldRecon stitch_dirs(const std::vector<fs::path>& dirs, const std::vector<Vec3>& offsets,
                                     const recon::ReconConfig& cfg = {}) {
  if (dirs.empty()) throw Error(ErrorCode::InvalidConfig, "no frame directories given");
  if (offsets.size() > dirs.size() - 1) {
    throw Error(ErrorCode::InvalidConfig, "more offsets than additional sequences");
  }
  std::optional<recon::WorldRecon> world;
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    const auto frames = load_frame_dir(dirs[k]);
    recon::WorldRecon w;
    try {
      w = recon::stitch_sequence(frames, cfg);
    } catch (const Error& e) {
      throw Error(e.code(), dirs[k].string() + ": " + e.what());
    }
    if (!world) {
      world = std::move(w);
      continue;
    }
    Vec3 offset;
    if (k - 1 < offsets.size()) {
      offset = offsets[k - 1];
    } else if (world->anchor && w.anchor) {
      offset = anchor_offset(*world->anchor, *w.anchor);
    } else {
      throw Error(ErrorCode::InvalidConfig,
                  dirs[k].string() + ": no anchor recorded; pass an inter-sequence offset");
    }
    world = merge_worlds(std::move(*world), w, offset, cfg);
  }
  return *world;
}

// ---- Losses over a dataset ----------------------------------------------------------

struct DatasetLoss {
  struct PerSequence {
    std::string id;
    eval::LossReport report;
  };
  std::vector<PerSequence> sequences;
  eval::LossReport total;
};

inline json to_json(const DatasetLoss& d) {
  json seqs = json::array();
  for (const auto& s : d.sequences) {
    json e = to_json(s.report);
    e["id"] = s.id;
    seqs.push_back(e);
  }
  json j = to_json(d.total);
  j["sequences"] = seqs;
  return j;
}

inline std::pair<eval::DiscriminatorOutputs, eval::DiscriminatorOutputs> discriminator_from_json(const json& j) {
  eval::DiscriminatorOutputs real{eval::Source::Real, {}}, fake{eval::Source::Fake, {}};
  detail::get(j, "real", real.values, "disc");
  detail::get(j, "fake", fake.values, "disc");
  real.validate(eval::Source::Real);
  fake.validate(eval::Source::Fake);
  return {real, fake};
}

/// Loss terms of the predictions at `pred` (probabilities, or one-hot
/// labels when absent) against the dataset at `truth`. Supervised and
/// temporal terms are summed over sequences and views; the adversarial terms
/// are added once when discriminator outputs are given.
inline DatasetLoss loss_dataset(const fs::path& truth, const fs::path& pred,
                                const std::optional<std::pair<eval::DiscriminatorOutputs, eval::DiscriminatorOutputs>>& disc,
                                eval::PairwiseDivergence mode = eval::PairwiseDivergence::SymmetricKl) {
  const Manifest tm = load_manifest(truth);
  const Manifest pm = load_manifest(pred);
  if (tm.sequences.size() != pm.sequences.size()) {
    throw Error(ErrorCode::AlignmentError, "truth and predictions differ in sequence count");
  }
  DatasetLoss out;
  for (std::size_t i = 0; i < tm.sequences.size(); ++i) {
    const auto& te = tm.sequences[i];
    const auto& pe = pm.sequences[i];
    if (te.id != pe.id || te.frames != pe.frames) {
      throw Error(ErrorCode::AlignmentError, "sequence " + te.id + " does not align with " + pe.id);
    }
    const auto ts = load_sequence(truth, te);
    const auto ps = load_sequence(pred, pe);
    eval::LossReport r;
    for (int v = 0; v < 2; ++v) {
      const auto& labels = v == 0 ? ts.top : ts.front;
      std::vector<layout::ProbabilityStack> probs;
      if (ps.top_prob.empty()) {
        for (const auto& s : v == 0 ? ps.top : ps.front) probs.push_back(layout::ProbabilityStack::one_hot(s));
      } else {
        probs = v == 0 ? ps.top_prob : ps.front_prob;
      }
      const auto part = eval::loss_report<float>(probs, labels, nullptr, nullptr, mode);
      r.l_sup += part.l_sup;
      r.l_short += part.l_short;
      r.l_long += part.l_long;
    }
    r.l_total = eval::total_loss(r);
    out.total.l_sup += r.l_sup;
    out.total.l_short += r.l_short;
    out.total.l_long += r.l_long;
    out.sequences.push_back({te.id, r});
  }
  if (disc) {
    out.total.l_adv = eval::l_adv(disc->second);
    out.total.l_discr = eval::l_discr(disc->first, disc->second);
  }
  out.total.l_total = eval::total_loss(out.total);
  return out;
}

}  // namespace forge::io
