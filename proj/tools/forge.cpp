// forge: command-line front end for dataset generation, simulated
// prediction, evaluation and multi-view reconstruction.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "forge/core/error.hpp"
#include "forge/eval/gradcheck.hpp"
#include "forge/eval/losses.hpp"
#include "forge/eval/metrics.hpp"
#include "forge/io/dataset.hpp"
#include "forge/io/grid_io.hpp"
#include "forge/io/json_io.hpp"
#include "forge/io/pipeline.hpp"
#include "forge/layout/rasterize.hpp"
#include "forge/predictor/degrade.hpp"
#include "forge/recon/compare.hpp"
#include "forge/recon/obj.hpp"
#include "forge/waregen/generate.hpp"

namespace fs = std::filesystem;
using forge::io::json;

namespace {

struct Common {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;
  unsigned jobs = 1;
};

void add_common(CLI::App* cmd, Common& c, bool out_required) {
  cmd->add_option("--seed", c.seed, "Random seed (default: $FORGE_SEED, then the config)")->envname("FORGE_SEED");
  cmd->add_option("--config", c.config, "JSON configuration file")->check(CLI::ExistingFile);
  auto* out = cmd->add_option("--out", c.out, "Output path");
  if (out_required) out->required();
  cmd->add_option("--jobs", c.jobs, "Worker threads (0 = all cores)");
}

void log_resolved(const std::string& command, const json& settings) {
  std::cerr << "forge " << command << ": " << json({{"command", command}, {"settings", settings}}).dump() << "\n";
}

json read_json_file(const std::string& path) { return forge::io::parse_json(forge::io::read_text(path), path); }

// JSON results go to --out when given, otherwise to stdout.
void emit(const Common& c, const json& j) {
  if (c.out.empty()) {
    std::cout << forge::io::dump(j);
  } else {
    const fs::path p(c.out);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    forge::io::write_text(p, forge::io::dump(j));
  }
}

forge::Vec3 parse_vec3(const std::string& s) {
  forge::Vec3 v;
  char c1 = 0, c2 = 0;
  std::istringstream in(s);
  if (!(in >> v.x >> c1 >> v.y >> c2 >> v.z) || c1 != ',' || c2 != ',' || !in.eof()) {
    throw forge::Error(forge::ErrorCode::InvalidConfig, "expected x,y,z but got '" + s + "'");
  }
  return v;
}

// ---- selftest -------------------------------------------------------------------

int selftest() {
  using namespace forge;
  int failed = 0;
  auto check = [&](const char* name, const std::function<bool()>& fn) {
    bool ok = false;
    try {
      ok = fn();
    } catch (const std::exception& e) {
      std::cout << "  (" << e.what() << ")\n";
    }
    std::cout << (ok ? "ok   " : "FAIL ") << name << "\n";
    failed += !ok;
  };

  check("rasterize 1 m box as 8x8 cells", [] {
    layout::GridSpec spec{80, 10.0, 1};
    layout::SceneGraph scene;
    layout::Rack rack;
    rack.base = {0, 0, -2};
    rack.width = 4;
    rack.depth = 4;
    rack.shelf_heights = {0.5};
    layout::Shelf shelf{0, 0, 0.5, -2, 2, -4, 0, {}};
    shelf.boxes.push_back({0, {0, 1.0, -2}, {1, 1, 1}, 0, 0, 0, 0, 0, 0});
    rack.shelves = {shelf};
    scene.racks = {rack};
    const layout::ShelfFrame frame{{0, 1.5, -2}, layout::View::Top, 10.0};
    const auto top = layout::rasterize_top_view(scene, frame, spec, std::vector<int>{0});
    int occ = 0;
    for (auto c : top.cells()) occ += c == layout::CellClass::Occupied;
    return occ == 64 && top.at(0, 40, 40) == layout::CellClass::Occupied;
  });

  waregen::GenConfig cfg;
  cfg.grid = {128, 10.0, 3};
  cfg.rack_count = {2, 2};
  cfg.frames_per_sequence = 8;
  const auto g = io::generate_sequence(cfg, 1, 0);

  check("noise-free degrade is the identity", [&] {
    const auto p = predictor::degrade(g.sequence.frames[0].top, predictor::NoiseConfig::none());
    return p.labels == g.sequence.frames[0].top && p.probabilities.argmax() == p.labels;
  });

  check("truth against truth scores 100 mIoU", [&] {
    eval::MetricsAccumulator acc;
    for (const auto& f : g.sequence.frames) {
      acc.add(f.top, f.top);
      acc.add(f.front, f.front);
    }
    const auto t = acc.table();
    for (auto v : {layout::View::Top, layout::View::Front}) {
      for (auto c : {eval::MetricClass::Rack, eval::MetricClass::Box}) {
        if (t.at(v, c).miou.value_or(0) != 100.0) return false;
      }
    }
    return true;
  });

  check("supervised loss of one-hot truth is zero", [&] {
    std::vector<layout::ProbabilityStack> p{layout::ProbabilityStack::one_hot(g.sequence.frames[0].top)};
    std::vector<layout::LayoutStack> t{g.sequence.frames[0].top};
    return eval::l_sup<float>(p, t) < 1e-9;
  });

  check("loss gradients match finite differences", [] {
    Rng rng(5);
    auto random_stack = [&](int frame) {
      layout::BasicProbabilityStack<double> s(layout::View::Top, 2, 4, frame);
      for (std::size_t i = 0; i < s.cells_per_channel() * 2; ++i) {
        auto p = s.cell(i);
        double sum = 0;
        for (auto& v : p) sum += v = 0.05 + rng.uniform();
        for (auto& v : p) v /= sum;
      }
      return s;
    };
    eval::GradientCheckInputs in;
    for (int f = 0; f < 4; ++f) in.preds.push_back(random_stack(f));
    for (int f = 0; f < 4; ++f) {
      layout::LayoutStack t(layout::View::Top, 2, 4, f);
      for (auto& c : t.cells()) c = static_cast<layout::CellClass>(rng.uniform_int(0, 2));
      in.truths.push_back(t);
    }
    for (int i = 0; i < 6; ++i) {
      in.real.push_back(rng.uniform());
      in.fake.push_back(rng.uniform());
    }
    double worst = 0;
    for (auto mode : {eval::PairwiseDivergence::SymmetricKl, eval::PairwiseDivergence::SquaredError}) {
      in.pairwise = mode;
      for (auto id : {eval::LossId::Sup, eval::LossId::Adv, eval::LossId::Discr, eval::LossId::Short,
                      eval::LossId::Long}) {
        worst = std::max(worst, eval::gradient_check(id, in, 1e-6));
      }
    }
    return worst <= 1e-4;
  });

  check(".lay round trip is byte-exact", [&] {
    const auto bytes = io::encode_layout(g.sequence.frames[0].front);
    return io::encode_layout(io::decode_layout(bytes)) == bytes;
  });

  check("noise-free stitching recovers every box", [&] {
    std::vector<recon::FrameRecon> frames;
    for (const auto& f : g.sequence.frames) {
      frames.push_back(recon::reconstruct_frame(f.top, f.front, cfg.grid, {}, f.top.frame_index(), f.shelf_frame.origin));
    }
    const auto world = recon::stitch_sequence(frames);
    const auto r = recon::compare_to_truth(world, g.scene, g.sequence.frames[0].shelf_frame, cfg.grid.num_shelves);
    return r.precision == 1.0 && r.recall == 1.0;
  });

  std::cout << (failed == 0 ? "selftest passed\n" : "selftest failed\n");
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic warehouse layouts, simulated predictions, evaluation and reconstruction"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "forge 1.0.0");

  // gen
  Common gen_c;
  std::optional<int> gen_sequences, gen_frames;
  auto* gen = app.add_subcommand("gen", "Generate a dataset of scenes, trajectories and ground-truth layouts");
  add_common(gen, gen_c, true);
  gen->add_option("--sequences", gen_sequences, "Override the number of sequences");
  gen->add_option("--frames", gen_frames, "Override frames per sequence");

  // degrade
  Common deg_c;
  std::string deg_in, deg_noise;
  auto* deg = app.add_subcommand("degrade", "Simulate network predictions from ground-truth layouts");
  add_common(deg, deg_c, true);
  deg->add_option("--in", deg_in, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  deg->add_option("--noise", deg_noise, "Noise configuration JSON")->check(CLI::ExistingFile);

  // eval
  Common eval_c;
  std::string eval_truth, eval_pred;
  auto* ev = app.add_subcommand("eval", "mIoU and mAP of predictions against ground truth");
  add_common(ev, eval_c, false);
  ev->add_option("--truth", eval_truth, "Ground-truth dataset directory")->required()->check(CLI::ExistingDirectory);
  ev->add_option("--pred", eval_pred, "Prediction directory")->required()->check(CLI::ExistingDirectory);

  // loss
  Common loss_c;
  std::string loss_truth, loss_pred, loss_disc, loss_pairwise = "kl";
  auto* loss = app.add_subcommand("loss", "Reference loss terms of predictions against ground truth");
  add_common(loss, loss_c, false);
  loss->add_option("--truth", loss_truth, "Ground-truth dataset directory")->required()->check(CLI::ExistingDirectory);
  loss->add_option("--pred", loss_pred, "Prediction directory")->required()->check(CLI::ExistingDirectory);
  loss->add_option("--disc", loss_disc, "Discriminator outputs JSON {\"real\": [...], \"fake\": [...]}")
      ->check(CLI::ExistingFile);
  loss->add_option("--pairwise", loss_pairwise, "Temporal divergence: kl or l2")
      ->check(CLI::IsMember({"kl", "l2"}));

  // recon
  Common rec_c;
  std::string rec_layouts;
  auto* rec = app.add_subcommand("recon", "Lift every frame's layouts to 3D boxes");
  add_common(rec, rec_c, true);
  rec->add_option("--layouts", rec_layouts, "Dataset or prediction directory")->required()->check(CLI::ExistingDirectory);

  // stitch
  Common st_c;
  std::vector<std::string> st_frames, st_offsets;
  auto* st = app.add_subcommand("stitch", "Merge per-frame reconstructions into one model");
  add_common(st, st_c, false);
  st->add_option("--frames", st_frames, "Directory of frame_XXXX.json; repeat to merge sequences")->required();
  st->add_option("--offset", st_offsets, "x,y,z registering each further sequence (default: from anchors)");

  // export-obj
  Common obj_c;
  std::string obj_world, obj_scene;
  auto* obj = app.add_subcommand("export-obj", "Write a reconstruction or scene graph as Wavefront OBJ");
  add_common(obj, obj_c, true);
  auto* obj_w = obj->add_option("--world", obj_world, "Reconstruction JSON")->check(CLI::ExistingFile);
  auto* obj_s = obj->add_option("--scene", obj_scene, "Scene graph JSON")->check(CLI::ExistingFile);
  obj_w->excludes(obj_s);

  // compare
  Common cmp_c;
  std::string cmp_world, cmp_scene;
  auto* cmp = app.add_subcommand("compare", "Precision, recall and errors of a reconstruction against its scene");
  add_common(cmp, cmp_c, false);
  cmp->add_option("--world", cmp_world, "Reconstruction JSON")->required()->check(CLI::ExistingFile);
  cmp->add_option("--scene", cmp_scene, "Scene graph JSON")->required()->check(CLI::ExistingFile);

  auto* self = app.add_subcommand("selftest", "Run built-in sanity checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    using namespace forge;
    if (gen->parsed()) {
      waregen::GenConfig cfg;
      if (!gen_c.config.empty()) cfg = io::gen_config_from_json(read_json_file(gen_c.config));
      if (gen_c.seed) cfg.seed = *gen_c.seed;
      if (gen_sequences) cfg.sequences = *gen_sequences;
      if (gen_frames) cfg.frames_per_sequence = *gen_frames;
      cfg.validate();
      log_resolved("gen", {{"config", io::to_json(cfg)}, {"out", gen_c.out}, {"jobs", gen_c.jobs}});
      const auto m = io::generate_dataset(cfg, cfg.seed, gen_c.out, gen_c.jobs);
      std::cerr << "forge gen: wrote " << m.sequences.size() << " sequences to " << gen_c.out << "\n";
    } else if (deg->parsed()) {
      predictor::NoiseConfig noise;
      if (!deg_noise.empty()) noise = io::noise_config_from_json(read_json_file(deg_noise));
      if (!deg_c.config.empty()) noise = io::noise_config_from_json(read_json_file(deg_c.config));
      if (deg_c.seed) noise.seed = *deg_c.seed;
      log_resolved("degrade", {{"noise", io::to_json(noise)}, {"in", deg_in}, {"out", deg_c.out}, {"jobs", deg_c.jobs}});
      io::degrade_dataset(deg_in, noise, deg_c.out, deg_c.jobs);
    } else if (ev->parsed()) {
      log_resolved("eval", {{"truth", eval_truth}, {"pred", eval_pred}, {"out", eval_c.out}});
      emit(eval_c, io::to_json(io::evaluate_dataset(eval_truth, eval_pred)));
    } else if (loss->parsed()) {
      std::optional<std::pair<eval::DiscriminatorOutputs, eval::DiscriminatorOutputs>> disc;
      if (!loss_disc.empty()) disc = io::discriminator_from_json(read_json_file(loss_disc));
      const auto mode = loss_pairwise == "l2" ? eval::PairwiseDivergence::SquaredError
                                              : eval::PairwiseDivergence::SymmetricKl;
      log_resolved("loss", {{"truth", loss_truth}, {"pred", loss_pred}, {"disc", loss_disc},
                            {"pairwise", loss_pairwise}, {"out", loss_c.out}});
      emit(loss_c, io::to_json(io::loss_dataset(loss_truth, loss_pred, disc, mode)));
    } else if (rec->parsed()) {
      recon::ReconConfig cfg;
      if (!rec_c.config.empty()) cfg = io::recon_config_from_json(read_json_file(rec_c.config));
      log_resolved("recon", {{"config", io::to_json(cfg)}, {"layouts", rec_layouts}, {"out", rec_c.out},
                             {"jobs", rec_c.jobs}});
      io::recon_dataset(rec_layouts, rec_c.out, cfg, rec_c.jobs);
    } else if (st->parsed()) {
      recon::ReconConfig cfg;
      if (!st_c.config.empty()) cfg = io::recon_config_from_json(read_json_file(st_c.config));
      std::vector<fs::path> dirs(st_frames.begin(), st_frames.end());
      std::vector<Vec3> offsets;
      for (const auto& o : st_offsets) offsets.push_back(parse_vec3(o));
      log_resolved("stitch", {{"config", io::to_json(cfg)}, {"frames", st_frames}, {"offsets", st_offsets},
                              {"out", st_c.out}});
      emit(st_c, io::to_json(io::stitch_dirs(dirs, offsets, cfg)));
    } else if (obj->parsed()) {
      if (obj_world.empty() && obj_scene.empty()) {
        throw Error(ErrorCode::InvalidConfig, "export-obj needs --world or --scene");
      }
      log_resolved("export-obj", {{"world", obj_world}, {"scene", obj_scene}, {"out", obj_c.out}});
      const std::string text = obj_world.empty()
                                   ? recon::export_obj(io::scene_from_json(read_json_file(obj_scene)))
                                   : recon::export_obj(io::world_recon_from_json(read_json_file(obj_world)));
      const fs::path p(obj_c.out);
      if (p.has_parent_path()) fs::create_directories(p.parent_path());
      io::write_text(p, text);
    } else if (cmp->parsed()) {
      log_resolved("compare", {{"world", cmp_world}, {"scene", cmp_scene}, {"out", cmp_c.out}});
      const auto world = io::world_recon_from_json(read_json_file(cmp_world));
      const auto scene = io::scene_from_json(read_json_file(cmp_scene));
      if (!world.anchor) throw Error(ErrorCode::ValidationError, "world.anchor: required for comparison");
      const layout::ShelfFrame frame{*world.anchor, layout::View::Top, 0.0};
      emit(cmp_c, io::to_json(recon::compare_to_truth(world, scene, frame, world.channels)));
    } else if (self->parsed()) {
      return selftest();
    }
  } catch (const forge::Error& e) {
    json line = {{"error", std::string(forge::to_string(e.code()))}, {"message", e.what()}};
    if (e.offset()) line["offset"] = *e.offset();
    std::cerr << line.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json({{"error", "Internal"}, {"message", e.what()}}).dump() << "\n";
    return 1;
  }
  return 0;
}
