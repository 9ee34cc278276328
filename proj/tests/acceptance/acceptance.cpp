// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "../unit/support.hpp"
#include "forge/eval/gradcheck.hpp"
#include "forge/eval/losses.hpp"
#include "forge/eval/metrics.hpp"
#include "forge/io/dataset.hpp"
#include "forge/io/pipeline.hpp"
#include "forge/predictor/degrade.hpp"
#include "forge/recon/compare.hpp"
#include "forge/recon/lift.hpp"
#include "forge/recon/stitch.hpp"

#ifndef FORGE_SOURCE_DIR
#error "FORGE_SOURCE_DIR must point at the source tree"
#endif

namespace fs = std::filesystem;
using namespace forge;
using layout::CellClass;
using layout::View;
using eval::MetricClass;

namespace {

const fs::path kConfigs = fs::path(FORGE_SOURCE_DIR) / "configs";

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

waregen::GenConfig load_gen(const std::string& name) {
  return io::gen_config_from_json(io::parse_json(io::read_text(kConfigs / name), name));
}

predictor::NoiseConfig load_noise(const std::string& name) {
  return io::noise_config_from_json(io::parse_json(io::read_text(kConfigs / name), name));
}

// ---- 1. evaluation sanity ------------------------------------------------------

Outcome truth_vs_truth() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = load_gen("reference.json");
  const auto root = test::scratch_dir("acceptance_eval");
  const auto truth = root / "truth", blank = root / "blank";
  const io::Manifest m = io::generate_dataset(cfg, cfg.seed, truth, 2);

  const auto self = io::evaluate_dataset(truth, truth);
  int hundred = 0;
  for (View v : {View::Top, View::Front}) {
    for (MetricClass c : {MetricClass::Rack, MetricClass::Box}) {
      hundred += self.at(v, c).miou == 100.0;
      hundred += self.at(v, c).map == 100.0;
    }
  }

  // Same dataset with every layout replaced by Background.
  fs::copy(truth, blank, fs::copy_options::recursive);
  io::Manifest pm = m;
  pm.kind = "predictions";
  for (const auto& e : m.sequences) {
    for (int f = 0; f < e.frames; ++f) {
      for (const auto* rel : {&e.top[f], &e.front[f]}) {
        auto stack = io::load_layout(truth / *rel, f);
        for (auto& c : stack.cells()) c = CellClass::Background;
        io::save_layout(blank / *rel, stack);
      }
    }
  }
  io::write_text(blank / "manifest.json", io::dump(io::to_json(pm)));
  const auto none = io::evaluate_dataset(truth, blank);
  int zero = 0;
  for (View v : {View::Top, View::Front}) {
    for (MetricClass c : {MetricClass::Rack, MetricClass::Box}) zero += none.at(v, c).miou == 0.0;
  }
  const double secs = seconds_since(t0);
  fs::remove_all(root);
  return {hundred == 8 && zero == 4 && secs < 60,
          fmt("%d/8 cells at 100, %d/4 mIoU at 0 for all-Background, %.1f s", hundred, zero, secs)};
}

// ---- 2. loss kernels -------------------------------------------------------------

using PStack = layout::BasicProbabilityStack<double>;

PStack random_probs(Rng& rng, int channels, int n, int frame = 0) {
  PStack s(View::Top, channels, n, frame);
  for (std::size_t i = 0; i < s.cell_count(); ++i) {
    auto c = s.cell(i);
    double sum = 0;
    for (auto& v : c) sum += v = 0.05 + rng.uniform();
    for (auto& v : c) v /= sum;
  }
  return s;
}

layout::LayoutStack random_labels(Rng& rng, int channels, int n) {
  layout::LayoutStack s(View::Top, channels, n);
  for (auto& c : s.cells()) c = static_cast<CellClass>(rng.uniform_int(0, 2));
  return s;
}

Outcome loss_kernels() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(2024);
  std::vector<std::string> failures;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };

  // Zero cases.
  const auto labels = random_labels(rng, 3, 6);
  const std::vector<layout::LayoutStack> truths{labels};
  const std::vector<PStack> one_hot{PStack::one_hot(labels)};
  expect(std::abs(eval::l_sup<double>(one_hot, truths)) <= 1e-11, "l_sup of one-hot truth");
  const auto p = random_probs(rng, 3, 6);
  const std::vector<PStack> constant{p, p, p, p};
  for (auto mode : {eval::PairwiseDivergence::SymmetricKl, eval::PairwiseDivergence::SquaredError}) {
    expect(eval::l_short<double>(constant, mode) == 0.0, "l_short of a constant sequence");
    expect(eval::l_long<double>(constant, mode) == 0.0, "l_long of a constant sequence");
    const std::vector<PStack> pair{random_probs(rng, 2, 4), random_probs(rng, 2, 4)};
    expect(eval::l_long<double>(pair, mode) == 0.0, "l_long of a length-2 sequence");
  }
  expect(eval::l_adv({eval::Source::Fake, {1.0, 1.0, 1.0}}) == 0.0, "l_adv of all ones");
  expect(eval::l_discr({eval::Source::Real, {1.0, 1.0}}, {eval::Source::Fake, {0.0, 0.0, 0.0}}) == 0.0,
         "l_discr of a perfect discriminator");

  // Additivity.
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<PStack> preds;
    std::vector<layout::LayoutStack> ts;
    const int frames = static_cast<int>(rng.uniform_int(2, 5));
    for (int f = 0; f < frames; ++f) {
      preds.push_back(random_probs(rng, 2, 4, f));
      ts.push_back(random_labels(rng, 2, 4));
    }
    const eval::DiscriminatorOutputs real{eval::Source::Real, {rng.uniform(), rng.uniform()}};
    const eval::DiscriminatorOutputs fake{eval::Source::Fake, {rng.uniform(), rng.uniform(), rng.uniform()}};
    const auto r = eval::loss_report<double>(preds, ts, &real, &fake);
    expect(r.l_total == r.l_sup + r.l_short + r.l_long + r.l_adv + r.l_discr, "l_total additivity");
  }

  // Gradient checks on random small inputs.
  double worst = 0.0;
  constexpr int kChecks = 100;
  for (int i = 0; i < kChecks; ++i) {
    const auto id = static_cast<eval::LossId>(i % 5);
    eval::GradientCheckInputs in;
    in.pairwise = (i / 5) % 2 ? eval::PairwiseDivergence::SquaredError : eval::PairwiseDivergence::SymmetricKl;
    const int channels = static_cast<int>(rng.uniform_int(1, 3));
    const int n = static_cast<int>(rng.uniform_int(2, 4));
    const int count = static_cast<int>(rng.uniform_int(id == eval::LossId::Long ? 3 : 2, 5));
    for (int f = 0; f < count; ++f) {
      in.preds.push_back(random_probs(rng, channels, n, f));
      in.truths.push_back(random_labels(rng, channels, n));
    }
    for (int k = static_cast<int>(rng.uniform_int(1, 6)); k > 0; --k) in.real.push_back(rng.uniform(0.01, 0.99));
    for (int k = static_cast<int>(rng.uniform_int(1, 6)); k > 0; --k) in.fake.push_back(rng.uniform(0.01, 0.99));
    worst = std::max(worst, eval::gradient_check(id, in, 1e-6));
  }
  expect(worst <= 1e-4, "gradient check");

  const double secs = seconds_since(t0);
  std::string detail = fmt("zero cases and additivity %s, %d gradient checks max rel err %.2e, %.1f s",
                           failures.empty() ? "hold" : "broken", kChecks, worst, secs);
  for (const auto& f : failures) detail += "; failed: " + f;
  return {failures.empty() && secs < 60, detail};
}

// ---- 3. rasterization oracle -------------------------------------------------------

Outcome rasterization_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  waregen::GenConfig cfg;
  cfg.grid = {32, 10.0, 3};
  cfg.frames_per_sequence = 5;
  constexpr int kScenes = 50;
  long mismatches = 0;
  int frames = 0, scenes_checked = 0;
  for (int s = 0; s < kScenes; ++s) {
    const auto gs = io::generate_sequence(cfg, 5000 + static_cast<std::uint64_t>(s), 0);
    bool any = false;
    for (const auto& fr : gs.sequence.frames) {
      if (fr.empty) continue;
      any = true;
      ++frames;
      auto front = fr.shelf_frame;
      front.view = View::Front;
      mismatches += test::count_mismatches(fr.top, test::oracle_top(gs.scene, fr.shelf_frame, cfg.grid, fr.visible));
      mismatches += test::count_mismatches(fr.front, test::oracle_front(gs.scene, front, cfg.grid, fr.visible));
    }
    scenes_checked += any;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && scenes_checked == kScenes && secs < 120,
          fmt("%d scenes, %d frames, %ld mismatched cells, %.1f s", scenes_checked, frames, mismatches, secs)};
}

// ---- 4. lift roundtrip -------------------------------------------------------------

Outcome lift_roundtrip() {
  const auto t0 = std::chrono::steady_clock::now();
  waregen::GenConfig cfg;  // D = 256
  constexpr int kSequences = 20;
  const double tol = cfg.grid.meters_per_cell();
  long eligible = 0, recovered = 0;
  int frames = 0, below = 0;
  double worst = 1.0;
  for (int s = 0; s < kSequences; ++s) {
    const auto gs = io::generate_sequence(cfg, 7, s);
    for (const auto& f : gs.sequence.frames) {
      if (f.empty) continue;
      const auto fr = recon::reconstruct_frame(f.top, f.front, cfg.grid);
      const auto truth = recon::truth_boxes(gs.scene, f.shelf_frame, cfg.grid.num_shelves, f.visible);
      const auto r = recon::lift_recovery(fr, truth, cfg.grid, tol);
      eligible += r.eligible;
      recovered += r.recovered;
      ++frames;
      worst = std::min(worst, r.rate());
      below += r.rate() < 0.95;
    }
  }
  const double secs = seconds_since(t0);
  return {below == 0 && eligible > 0 && secs < 300,
          fmt("%d frames, worst frame %.1f%%, %d below 95%%, pooled %ld/%ld, %.1f s", frames, 100 * worst, below,
              recovered, eligible, secs)};
}

// ---- 5. stitching ------------------------------------------------------------------

Outcome stitching() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = load_gen("aisle4.json");
  const double mpc = cfg.grid.meters_per_cell();
  const auto gs = io::generate_sequence(cfg, cfg.seed, 0);
  const auto& frames = gs.sequence.frames;
  std::vector<recon::FrameRecon> recons;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    std::optional<Vec3> anchor;
    if (!frames[t].empty) anchor = frames[t].shelf_frame.origin;
    recons.push_back(recon::reconstruct_frame(frames[t].top, frames[t].front, cfg.grid, {}, static_cast<int>(t), anchor));
  }
  const auto world = recon::stitch_sequence(recons);
  const auto first = static_cast<std::size_t>(
      std::find_if(frames.begin(), frames.end(), [](const auto& f) { return !f.empty; }) - frames.begin());
  const auto rep = recon::compare_to_truth(world, gs.scene, frames[first].shelf_frame, cfg.grid.num_shelves);

  // Content moves opposite to the shelf-frame origin.
  double shift_err = 0.0;
  std::size_t prev = first;
  for (std::size_t t = first + 1; t < frames.size(); ++t) {
    if (frames[t].empty) continue;
    const Vec3 a = frames[prev].shelf_frame.origin, b = frames[t].shelf_frame.origin;
    const Vec3 truth{a.x - b.x, b.y - a.y, b.z - a.z};
    shift_err = std::max(shift_err, max_abs(world.shifts[t] - truth));
    prev = t;
  }
  const double secs = seconds_since(t0);
  const bool ok = rep.precision == 1.0 && rep.recall == 1.0 && rep.mean_center_error <= mpc &&
                  shift_err <= 0.5 * mpc && frames.size() >= 20 && secs < 300;
  return {ok, fmt("%zu frames, P %.3f R %.3f (%d matched of %d), mean centre err %.4f m, max shift err %.4f m "
                  "(cell %.4f m), %.1f s",
                  frames.size(), rep.precision, rep.recall, rep.matched, rep.truth, rep.mean_center_error, shift_err,
                  mpc, secs)};
}

// ---- 6. noise robustness -------------------------------------------------------------

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = (i + j) / 2.0 + 1;
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = ranks(x), ry = ranks(y);
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / rx.size();
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / ry.size();
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

Outcome noise_robustness() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = load_gen("aisle4.json");
  const auto noise_a = load_noise("noise_a.json");
  const std::vector<double> sweep{0.0, 0.02, 0.05, 0.1};
  constexpr int kSeeds = 20;
  std::vector<double> miou(sweep.size(), 0.0);
  double recall = 0.0;
  int stitch_failures = 0;
  for (int s = 0; s < kSeeds; ++s) {
    const auto gs = io::generate_sequence(cfg, cfg.seed, s);
    const auto& frames = gs.sequence.frames;
    for (std::size_t k = 0; k < sweep.size(); ++k) {
      auto nc = noise_a;
      nc.flip_probability = sweep[k];
      nc.seed = io::sequence_noise_seed(noise_a.seed, s);
      eval::MetricsAccumulator acc;
      for (const auto& f : frames) {
        acc.add(f.top, predictor::degrade(f.top, nc).labels);
        acc.add(f.front, predictor::degrade(f.front, nc).labels);
      }
      double sum = 0;
      for (View v : {View::Top, View::Front}) {
        for (MetricClass c : {MetricClass::Rack, MetricClass::Box}) sum += acc.miou(v, c).value_or(0.0);
      }
      miou[k] += sum / 4 / kSeeds;
    }

    // Stitched recall under the calibrated config itself.
    auto nc = noise_a;
    nc.seed = io::sequence_noise_seed(noise_a.seed, s);
    std::vector<recon::FrameRecon> recons;
    for (std::size_t t = 0; t < frames.size(); ++t) {
      const auto top = predictor::degrade(frames[t].top, nc).labels;
      const auto front = predictor::degrade(frames[t].front, nc).labels;
      recons.push_back(recon::reconstruct_frame(top, front, cfg.grid, {}, static_cast<int>(t)));
    }
    try {
      const auto world = recon::stitch_sequence(recons);
      const auto first = std::find_if(frames.begin(), frames.end(), [](const auto& f) { return !f.empty; });
      recall += recon::compare_to_truth(world, gs.scene, first->shelf_frame, cfg.grid.num_shelves).recall / kSeeds;
    } catch (const Error&) {
      ++stitch_failures;  // counts as zero recall
    }
  }
  const double rho = spearman(sweep, miou);
  const double secs = seconds_since(t0);
  return {recall >= 0.9 && rho <= -0.9 && secs < 600,
          fmt("mIoU over flip {0, .02, .05, .1}: %.2f %.2f %.2f %.2f, Spearman %.2f, stitched recall %.3f "
              "(%d stitch failures), %.1f s",
              miou[0], miou[1], miou[2], miou[3], rho, recall, stitch_failures, secs)};
}

// ---- 7. determinism ---------------------------------------------------------------------

// Relative path -> contents of every file under `root`.
std::vector<std::pair<std::string, std::string>> snapshot(const fs::path& root) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out.emplace_back(fs::relative(e.path(), root).string(), io::read_text(e.path()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct PipelineRun {
  std::vector<std::pair<std::string, std::string>> dataset, predictions, frames;
  std::string metrics, world;
};

PipelineRun run_pipeline(const fs::path& root, unsigned jobs) {
  const auto cfg = load_gen("reference.json");
  const auto noise = load_noise("noise_a.json");
  io::generate_dataset(cfg, cfg.seed, root / "data", jobs);
  io::degrade_dataset(root / "data", noise, root / "pred", jobs);
  io::recon_dataset(root / "pred", root / "frames", {}, jobs);
  PipelineRun r;
  r.metrics = io::dump(io::to_json(io::evaluate_dataset(root / "data", root / "pred")));
  r.world = io::dump(io::to_json(io::stitch_dirs({root / "frames" / io::sequence_id(0)}, {})));
  r.dataset = snapshot(root / "data");
  r.predictions = snapshot(root / "pred");
  r.frames = snapshot(root / "frames");
  return r;
}

Outcome determinism() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto root = test::scratch_dir("acceptance_determinism");
  const auto a = run_pipeline(root / "a", 4);
  const auto b = run_pipeline(root / "b", 4);
  const auto c = run_pipeline(root / "c", 1);
  fs::remove_all(root);
  std::string differing;
  auto check = [&](bool same, const char* what) {
    if (!same) differing += std::string(differing.empty() ? "" : ", ") + what;
  };
  for (const auto* other : {&b, &c}) {
    check(a.dataset == other->dataset, "dataset");
    check(a.predictions == other->predictions, "predictions");
    check(a.frames == other->frames, "frame reconstructions");
    check(a.metrics == other->metrics, "metrics JSON");
    check(a.world == other->world, "world JSON");
  }
  const double secs = seconds_since(t0);
  return {differing.empty() && !a.dataset.empty(),
          fmt("%zu dataset files, %zu prediction files, metrics and world JSON compared across 3 runs "
              "(jobs 4, 4, 1): %s, %.1f s",
              a.dataset.size(), a.predictions.size(), differing.empty() ? "identical" : ("differ in " + differing).c_str(),
              secs)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"truth-vs-truth evaluation", truth_vs_truth},
      {"loss kernel suite", loss_kernels},
      {"rasterization oracle equivalence", rasterization_oracle},
      {"lift roundtrip", lift_roundtrip},
      {"stitching end-to-end", stitching},
      {"noise robustness", noise_robustness},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s [%zu] %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
