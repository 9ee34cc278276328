#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

#include "forge/core/rng.hpp"
#include "forge/io/dataset.hpp"
#include "forge/io/pipeline.hpp"
#include "forge/layout/rasterize.hpp"
#include "forge/recon/assignment.hpp"
#include "forge/recon/compare.hpp"
#include "forge/recon/detections.hpp"
#include "forge/recon/lift.hpp"
#include "forge/recon/match.hpp"
#include "forge/recon/obj.hpp"
#include "forge/recon/stitch.hpp"
#include "support.hpp"

using namespace forge;
using layout::CellClass;
using layout::View;
using recon::Box3D;
using recon::Detection2D;
using recon::DetectionKind;
using recon::FrameRecon;

namespace {

constexpr double kMpc = 10.0 / 256;

Box3D cuboid(int level, Vec3 min, Vec3 max, std::uint8_t clipped = 0) {
  Box3D b;
  b.level = level;
  b.bounds = {min, max};
  b.clipped = clipped;
  return b;
}

Box3D shifted(Box3D b, Vec3 d) {
  b.bounds = {b.bounds.min + d, b.bounds.max + d};
  return b;
}

FrameRecon frame_of(std::vector<Box3D> boxes, int index = 0) {
  FrameRecon f;
  f.frame_index = index;
  f.meters_per_cell = kMpc;
  f.channels = 3;
  f.boxes = std::move(boxes);
  return f;
}

std::vector<Box3D> three_boxes() {
  return {cuboid(0, {-1.0, 0.0, 0.2}, {-0.6, 0.3, 0.6}), cuboid(0, {0.0, 0.0, 0.1}, {0.5, 0.4, 0.7}),
          cuboid(1, {0.3, -1.2, 0.2}, {0.6, -0.9, 0.5})};
}

std::vector<Detection2D> boxes_only(const std::vector<Detection2D>& d) {
  std::vector<Detection2D> out;
  std::copy_if(d.begin(), d.end(), std::back_inserter(out), [](const Detection2D& x) { return x.kind == DetectionKind::Box; });
  return out;
}

Detection2D det(int id, View view, int c0, int c1, int r0 = 0, int r1 = 5) {
  Detection2D d;
  d.id = id;
  d.view = view;
  d.rect = {c0, c1, r0, r1};
  d.extent = recon::extent_of(d.rect);
  return d;
}

}  // namespace

// ---- detections -------------------------------------------------------------------

TEST(Extract, BackgroundHasNoDetections) {
  EXPECT_TRUE(recon::extract_components(layout::LayoutStack(View::Top, 2, 16)).empty());
}

TEST(Extract, SquareGivesOneExactBox) {
  layout::LayoutStack s(View::Front, 1, 32);
  for (int r = 10; r < 18; ++r) {
    for (int c = 4; c < 12; ++c) s.set(0, r, c, CellClass::Occupied);
  }
  const auto d = boxes_only(recon::extract_components(s));
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].rect, (recon::CellRect{4, 11, 10, 17}));
  EXPECT_EQ(d[0].area, 64);
  EXPECT_FALSE(d[0].touches_border);
}

TEST(Extract, OneFreeColumnSeparatesTwoBoxes) {
  layout::LayoutStack s(View::Top, 1, 16);
  for (int r = 2; r < 8; ++r) {
    for (int c = 0; c < 16; ++c) s.set(0, r, c, CellClass::Unoccupied);
    for (int c = 2; c < 6; ++c) s.set(0, r, c, CellClass::Occupied);
    for (int c = 7; c < 11; ++c) s.set(0, r, c, CellClass::Occupied);
  }
  const auto all = recon::extract_components(s);
  EXPECT_EQ(boxes_only(all).size(), 2u);
  EXPECT_EQ(all.size() - boxes_only(all).size(), 1u);  // one rack extent
}

TEST(Extract, SmallBlobsAreDropped) {
  layout::LayoutStack s(View::Top, 1, 8);
  s.set(0, 1, 1, CellClass::Occupied);
  s.set(0, 1, 2, CellClass::Occupied);
  s.set(0, 1, 3, CellClass::Occupied);
  EXPECT_TRUE(recon::extract_components(s, 4).empty());
  EXPECT_EQ(boxes_only(recon::extract_components(s, 3)).size(), 1u);
}

TEST(Extract, RotatedFootprintExtentCoversTheTrueCorners) {
  layout::SceneGraph scene;
  auto r = test::make_rack(0, 0.0, 3.0, 2.0, {0.2});
  const auto& box = test::add_box(r.shelves[0], 0, 0, 0.0, -1.0, {0.8, 0.3, 0.5}, 0.3);
  scene.racks.push_back(r);
  const layout::GridSpec g{256, 10.0, 1};
  const layout::ShelfFrame f{{0, 1.0, -1.0}, View::Top, 10};
  const auto d = boxes_only(recon::extract_components(layout::rasterize_top_view(scene, f, g, std::vector<int>{0})));
  ASSERT_EQ(d.size(), 1u);
  double lo = 1e300, hi = -1e300;
  for (const auto& p : test::footprint_corners(box)) {
    lo = std::min(lo, p.x);
    hi = std::max(hi, p.x);
  }
  const double m = g.meters_per_cell();
  EXPECT_NEAR(d[0].extent.col_lo * m - 5.0, lo, m);
  EXPECT_NEAR(d[0].extent.col_hi * m - 5.0, hi, m);
  EXPECT_LE(d[0].extent.col_lo, d[0].rect.col_min);
  EXPECT_GE(d[0].extent.col_hi, d[0].rect.col_max + 1);
}

// ---- assignment and top/front matching ------------------------------------------

TEST(Assignment, MatchesExhaustiveSearch) {
  Rng rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    const int rows = static_cast<int>(rng.uniform_int(1, 6)), cols = static_cast<int>(rng.uniform_int(1, 6));
    std::vector<std::vector<double>> w(rows, std::vector<double>(cols));
    for (auto& row : w) {
      for (auto& v : row) v = rng.bernoulli(0.3) ? 0.0 : rng.uniform();
    }
    const auto a = recon::solve_assignment(w);
    double got = 0;
    std::vector<int> seen;
    for (int i = 0; i < rows; ++i) {
      if (a[i] < 0) continue;
      got += w[i][a[i]];
      seen.push_back(a[i]);
    }
    std::sort(seen.begin(), seen.end());
    EXPECT_TRUE(std::adjacent_find(seen.begin(), seen.end()) == seen.end());

    // Every injection of rows into columns-or-nothing.
    const int n = std::max(rows, cols);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = 0;
    do {
      double s = 0;
      for (int i = 0; i < rows; ++i) {
        if (perm[i] < cols) s += w[i][perm[i]];
      }
      best = std::max(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    EXPECT_NEAR(got, best, 1e-12) << trial;
  }
}

TEST(MatchTopFront, SinglePair) {
  const std::vector<Detection2D> top{det(0, View::Top, 3, 9)}, front{det(1, View::Front, 3, 9)};
  const auto m = recon::match_top_front(top, front, 0);
  ASSERT_EQ(m.pairs.size(), 1u);
  EXPECT_EQ(m.pairs[0].top_id, 0);
  EXPECT_EQ(m.pairs[0].front_id, 1);
  EXPECT_DOUBLE_EQ(m.pairs[0].x_iou, 1.0);
}

TEST(MatchTopFront, DisjointPairsDoNotCross) {
  const std::vector<Detection2D> top{det(0, View::Top, 20, 29), det(1, View::Top, 0, 9)};
  const std::vector<Detection2D> front{det(2, View::Front, 1, 10), det(3, View::Front, 19, 28)};
  auto m = recon::match_top_front(top, front, 0);
  ASSERT_EQ(m.pairs.size(), 2u);
  std::sort(m.pairs.begin(), m.pairs.end(), [](auto& a, auto& b) { return a.top_id < b.top_id; });
  EXPECT_EQ(m.pairs[0].front_id, 3);
  EXPECT_EQ(m.pairs[1].front_id, 2);
}

TEST(MatchTopFront, NoOverlapLeavesUnmatched) {
  const std::vector<Detection2D> top{det(0, View::Top, 0, 9)}, front{det(1, View::Front, 30, 39)};
  const auto m = recon::match_top_front(top, front, 0);
  EXPECT_TRUE(m.pairs.empty());
  EXPECT_EQ(m.unmatched_front, std::vector<int>{1});
  EXPECT_EQ(m.unmatched_top, std::vector<int>{0});
}

// ---- lift ---------------------------------------------------------------------------

TEST(Lift, BandHighUnitBoxIsRecovered) {
  layout::SceneGraph scene;
  scene.top_clearance = 1.0;
  auto r = test::make_rack(0, 0.0, 4.0, 2.0, {0.5});
  test::add_box(r.shelves[0], 0, 0, 0.2, -1.0, {1.0, 1.0, 1.0});
  scene.racks.push_back(r);
  const layout::GridSpec g{128, 10.0, 3};
  const std::vector<int> vis{0};
  const auto f = layout::make_shelf_frame(scene, vis, View::Top, g);
  auto ff = f;
  ff.view = View::Front;
  const auto recon = recon::reconstruct_frame(layout::rasterize_top_view(scene, f, g, vis),
                                              layout::rasterize_front_view(scene, ff, g, vis), g);
  ASSERT_EQ(recon.boxes.size(), 1u);
  ASSERT_EQ(recon.slabs.size(), 1u);
  const auto truth = recon::truth_boxes(scene, f, g.num_shelves);
  ASSERT_EQ(truth.size(), 1u);
  const Vec3 ds = recon.boxes[0].size() - truth[0].bounds.size();
  const Vec3 dc = recon.boxes[0].center() - truth[0].bounds.center();
  EXPECT_LE(max_abs(ds), g.meters_per_cell());
  EXPECT_LE(max_abs(dc), g.meters_per_cell());
  EXPECT_EQ(recon.boxes[0].clipped, 0);
}

TEST(Lift, RotatedFootprintKeepsItsAxisAlignedExtent) {
  const layout::GridSpec g{256, 10.0, 3};
  for (double yaw : {-0.33, -0.2, -0.06, 0.03, 0.11, 0.25, 0.35}) {
    layout::SceneGraph scene;
    scene.top_clearance = 1.0;
    auto r = test::make_rack(0, 0.0, 4.0, 2.0, {0.5});
    test::add_box(r.shelves[0], 0, 0, 0.13, -0.97, {0.55, 0.3, 0.42}, yaw);
    scene.racks.push_back(r);
    const std::vector<int> vis{0};
    const auto f = layout::make_shelf_frame(scene, vis, View::Top, g);
    auto ff = f;
    ff.view = View::Front;
    const auto recon = recon::reconstruct_frame(layout::rasterize_top_view(scene, f, g, vis),
                                                layout::rasterize_front_view(scene, ff, g, vis), g);
    ASSERT_EQ(recon.boxes.size(), 1u) << "yaw " << yaw;
    const auto truth = recon::truth_boxes(scene, f, g.num_shelves);
    const Vec3 ds = recon.boxes[0].size() - truth[0].bounds.size();
    const Vec3 dc = recon.boxes[0].center() - truth[0].bounds.center();
    EXPECT_LE(max_abs(ds), g.meters_per_cell()) << "yaw " << yaw;
    EXPECT_LE(max_abs(dc), g.meters_per_cell()) << "yaw " << yaw;
  }
}

TEST(Lift, NoPairsGivesAnEmptyFrame) {
  const auto f = recon::lift_to_3d({}, {}, {}, layout::GridSpec{});
  EXPECT_TRUE(f.boxes.empty());
  EXPECT_TRUE(f.empty());
}

TEST(Lift, BoxAtTheEdgeIsFlagged) {
  layout::LayoutStack top(View::Top, 1, 32), front(View::Front, 1, 32);
  for (int r = 10; r < 16; ++r) {
    for (int c = 0; c < 5; ++c) {
      top.set(0, r, c, CellClass::Occupied);
      front.set(0, r, c, CellClass::Occupied);
    }
  }
  const auto f = recon::reconstruct_frame(top, front, {32, 10.0, 1});
  ASSERT_EQ(f.boxes.size(), 1u);
  EXPECT_TRUE(f.boxes[0].boundary());
  EXPECT_TRUE(f.boxes[0].clipped & recon::face::kXMin);
}

// ---- frame matching -----------------------------------------------------------------

TEST(MatchFrames, RecoversATranslation) {
  const auto a = frame_of(three_boxes());
  std::vector<Box3D> moved;
  for (const auto& b : three_boxes()) moved.push_back(shifted(b, {0.5, 0, 0}));
  const auto m = recon::match_frames(a, frame_of(moved));
  EXPECT_NEAR(m.shift.x, 0.5, 1e-12);
  EXPECT_NEAR(m.shift.y, 0.0, 1e-12);
  EXPECT_NEAR(m.shift.z, 0.0, 1e-12);
  EXPECT_EQ(m.direction, 1);
  EXPECT_EQ(m.direction_axis, 0);
  EXPECT_EQ(m.inliers, 3);
}

TEST(MatchFrames, IdenticalFramesHaveNoShift) {
  const auto m = recon::match_frames(frame_of(three_boxes()), frame_of(three_boxes()));
  EXPECT_EQ(max_abs(m.shift), 0.0);
  EXPECT_EQ(m.direction, 0);
}

TEST(MatchFrames, NewcomerIsExcluded) {
  std::vector<Box3D> next;
  for (const auto& b : three_boxes()) next.push_back(shifted(b, {-0.3, 0, 0}));
  // Same size and level as the first box, so it is a candidate.
  next.push_back(cuboid(0, {1.5, 0.0, 0.2}, {1.9, 0.3, 0.6}));
  const auto m = recon::match_frames(frame_of(three_boxes()), frame_of(next));
  EXPECT_NEAR(m.shift.x, -0.3, 1e-12);
  EXPECT_EQ(m.inliers, 3);
  EXPECT_EQ(m.direction, -1);
  for (const auto& [ia, ib] : m.correspondences) EXPECT_NE(ib, 3);
}

TEST(MatchFrames, ShiftWithinHalfACellUnderCellNoise) {
  Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec3 d{rng.uniform(-0.8, 0.8), 0, 0};
    std::vector<Box3D> next;
    for (const auto& b : three_boxes()) {
      // Each face lands on a different side of a cell edge.
      auto n = shifted(b, d);
      n.bounds.min.x += rng.uniform(-0.4, 0.4) * kMpc;
      n.bounds.max.x += rng.uniform(-0.4, 0.4) * kMpc;
      next.push_back(n);
    }
    const auto m = recon::match_frames(frame_of(three_boxes()), frame_of(next));
    EXPECT_LE(std::abs(m.shift.x - d.x), 0.5 * kMpc) << trial;
  }
}

TEST(MatchFrames, NothingInCommonThrows) {
  const auto a = frame_of({cuboid(0, {0, 0, 0}, {0.3, 0.3, 0.3})});
  const auto b = frame_of({cuboid(1, {0, 0, 0}, {0.9, 0.9, 0.9})});
  try {
    recon::match_frames(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoOverlap);
  }
}

// ---- merging and stitching ------------------------------------------------------------

TEST(Merge, DuplicateFrameIsIdempotent) {
  const auto f = frame_of(three_boxes());
  const auto w = recon::world_from_frame(f);
  const auto twice = recon::merge_frame(w, f, {});
  EXPECT_EQ(twice.boxes, w.boxes);
}

TEST(Merge, ClippedBoxIsCompletedLater) {
  // Half of the box is cut off at the right border in the first frame.
  const Box3D full = cuboid(0, {4.6, 0.0, 0.2}, {5.4, 0.3, 0.6});
  const Box3D half = cuboid(0, {4.6, 0.0, 0.2}, {5.0, 0.3, 0.6}, recon::face::kXMax);
  auto w = recon::world_from_frame(frame_of({half}));
  // Camera moved +1 m: the box now sits 1 m further left in the local frame.
  w = recon::merge_frame(w, frame_of({shifted(full, {-1.0, 0, 0})}), {-1.0, 0, 0});
  ASSERT_EQ(w.boxes.size(), 1u);
  EXPECT_EQ(w.boxes[0].bounds, full.bounds);
  EXPECT_EQ(w.boxes[0].clipped, 0);
}

TEST(Merge, NewBoxesAreAppended) {
  auto w = recon::world_from_frame(frame_of(three_boxes()));
  const auto before = w.boxes.size();
  std::vector<Box3D> next = three_boxes();
  next.push_back(cuboid(0, {3.0, 0, 0.1}, {3.4, 0.2, 0.5}));
  next.push_back(cuboid(1, {3.0, -1, 0.1}, {3.4, -0.8, 0.5}));
  w = recon::merge_frame(w, frame_of(next), {});
  EXPECT_EQ(w.boxes.size(), before + 2);
}

TEST(Stitch, SingleFrameIsTheWorld) {
  const auto f = frame_of(three_boxes());
  const auto w = recon::stitch_sequence(std::vector<FrameRecon>{f});
  EXPECT_EQ(w.boxes, f.boxes);
  ASSERT_EQ(w.shifts.size(), 1u);
}

TEST(Stitch, FailureNamesTheFrame) {
  const std::vector<FrameRecon> frames{frame_of({cuboid(0, {0, 0, 0}, {0.3, 0.3, 0.3})}),
                                       frame_of({cuboid(1, {0, 0, 0}, {0.9, 0.9, 0.9})})};
  try {
    recon::stitch_sequence(frames);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoOverlap);
    EXPECT_NE(std::string(e.what()).find("frame 1"), std::string::npos);
  }
}

TEST(Stitch, EmptyFramesAreSkipped) {
  const std::vector<FrameRecon> frames{frame_of({}), frame_of(three_boxes()), frame_of({}), frame_of(three_boxes())};
  const auto w = recon::stitch_sequence(frames);
  EXPECT_EQ(w.boxes.size(), 3u);
  EXPECT_EQ(w.shifts.size(), 4u);
}

namespace {

struct AisleRun {
  io::GeneratedSequence g;
  std::vector<FrameRecon> frames;
};

AisleRun aisle(int seed) {
  waregen::GenConfig cfg;
  cfg.grid = {128, 10.0, 3};
  cfg.rack_count = {4, 4};
  cfg.frames_per_sequence = 24;
  AisleRun run{io::generate_sequence(cfg, seed, 0), {}};
  for (const auto& f : run.g.sequence.frames) {
    run.frames.push_back(recon::reconstruct_frame(f.top, f.front, cfg.grid, {}, f.top.frame_index(),
                                                  f.empty ? std::nullopt : std::optional<Vec3>(f.shelf_frame.origin)));
  }
  return run;
}

}  // namespace

TEST(Stitch, AislePassFindsEveryBox) {
  const auto run = aisle(21);
  const auto w = recon::stitch_sequence(run.frames);
  const auto truth = recon::truth_boxes(run.g.scene, run.g.sequence.frames[0].shelf_frame, 3);
  EXPECT_EQ(w.boxes.size(), truth.size());
  const auto r = recon::compare_boxes(w.boxes, truth);
  EXPECT_EQ(r.precision, 1.0);
  EXPECT_EQ(r.recall, 1.0);
}

TEST(Stitch, ReversedOrderGivesTheSameModel) {
  const auto run = aisle(22);
  auto rev = run.frames;
  std::reverse(rev.begin(), rev.end());
  const auto fwd = recon::stitch_sequence(run.frames);
  const auto bwd = recon::stitch_sequence(rev);
  ASSERT_EQ(fwd.boxes.size(), bwd.boxes.size());
  ASSERT_TRUE(fwd.anchor && bwd.anchor);
  // Re-express the reversed model in the forward anchor frame.
  const Vec3 d = io::anchor_offset(*fwd.anchor, *bwd.anchor);
  std::vector<Box3D> moved;
  for (const auto& b : bwd.boxes) moved.push_back(shifted(b, d));
  std::vector<recon::TruthBox> ref;
  for (const auto& b : fwd.boxes) ref.push_back({0, b.level, b.bounds});
  const auto r = recon::compare_boxes(moved, ref);
  EXPECT_EQ(r.matched, static_cast<int>(fwd.boxes.size()));
  EXPECT_LE(r.max_center_error, fwd.meters_per_cell);
}

// ---- comparison -----------------------------------------------------------------------

TEST(Compare, EmptyWorldHasZeroRecall) {
  const std::vector<recon::TruthBox> truth{{0, 0, {{0, 0, 0}, {1, 1, 1}}}};
  const auto r = recon::compare_boxes({}, truth);
  EXPECT_EQ(r.recall, 0.0);
  EXPECT_EQ(r.precision, 1.0);
}

TEST(Compare, BothEmptyIsPerfect) {
  const auto r = recon::compare_boxes({}, {});
  EXPECT_EQ(r.precision, 1.0);
  EXPECT_EQ(r.recall, 1.0);
}

TEST(Compare, ReportsErrors) {
  const std::vector<Box3D> pred{cuboid(0, {0.1, 0, 0}, {1.1, 1, 1})};
  const std::vector<recon::TruthBox> truth{{0, 0, {{0, 0, 0}, {1, 1, 1}}}};
  const auto r = recon::compare_boxes(pred, truth);
  EXPECT_EQ(r.matched, 1);
  EXPECT_NEAR(r.mean_center_error, 0.1, 1e-12);
  EXPECT_NEAR(r.mean_size_error, 0.0, 1e-12);
}

// ---- OBJ ------------------------------------------------------------------------------

TEST(Obj, CuboidFacesPointOutwards) {
  recon::ObjWriter w;
  w.object("b");
  w.cuboid(Vec3{1, 2, 3}, Vec3{0.4, 0.6, 0.8}, 0.3);
  std::istringstream in(w.str());
  std::vector<Vec3> v;
  std::vector<std::array<int, 4>> faces;
  std::string tag;
  for (std::string line; std::getline(in, line);) {
    std::istringstream ls(line);
    ls >> tag;
    if (tag == "v") {
      Vec3 p;
      ls >> p.x >> p.y >> p.z;
      v.push_back(p);
    } else if (tag == "f") {
      std::array<int, 4> f;
      ls >> f[0] >> f[1] >> f[2] >> f[3];
      faces.push_back(f);
    }
  }
  ASSERT_EQ(v.size(), 8u);
  ASSERT_EQ(faces.size(), 6u);
  const Vec3 c{1, 2, 3};
  for (const auto& f : faces) {
    const Vec3 a = v[f[0] - 1], b = v[f[1] - 1], d = v[f[2] - 1];
    const Vec3 e1 = b - a, e2 = d - a;
    const Vec3 n{e1.y * e2.z - e1.z * e2.y, e1.z * e2.x - e1.x * e2.z, e1.x * e2.y - e1.y * e2.x};
    const Vec3 out = a - c;
    EXPECT_GT(n.x * out.x + n.y * out.y + n.z * out.z, 0.0);
  }
}

TEST(Obj, WorldExportNamesRacksShelvesAndBoxes) {
  recon::WorldRecon w;
  w.anchor = Vec3{2, 1, -0.5};
  w.slabs = {cuboid(0, {-1, -0.5, -0.5}, {1, 0.5, 0.5}), cuboid(0, {3, -0.5, -0.5}, {5, 0.5, 0.5})};
  w.boxes = {cuboid(0, {-0.5, 0.0, -0.2}, {0.0, 0.5, 0.2}), cuboid(0, {3.5, 0.0, -0.2}, {4.0, 0.5, 0.2}),
             cuboid(2, {9, 0, 0}, {9.5, 0.5, 0.5})};
  const std::string obj = recon::export_obj(w);
  for (const char* name : {"o rack_0\n", "o rack_1\n", "o rack_0_shelf_0\n", "o rack_0_shelf_0_box_0\n",
                           "o rack_1_shelf_0_box_0\n", "o unassigned_box_0\n"}) {
    EXPECT_NE(obj.find(name), std::string::npos) << name;
  }
  // World Y of the first box top: anchor.y - shelf min.y.
  EXPECT_NE(obj.find(" 1.000000 "), std::string::npos);
}

TEST(Obj, SceneExportHasOneObjectPerBox) {
  waregen::GenConfig cfg;
  const auto s = waregen::generate_warehouse(cfg, 3);
  const std::string obj = recon::export_obj(s);
  std::size_t boxes = 0, objects = 0;
  for (const auto& r : s.racks) {
    for (const auto& sh : r.shelves) boxes += sh.boxes.size();
  }
  std::istringstream in(obj);
  std::size_t faces = 0;
  for (std::string line; std::getline(in, line);) {
    objects += line.rfind("o ", 0) == 0;
    faces += line.rfind("f ", 0) == 0;
  }
  std::size_t shelves = 0;
  for (const auto& r : s.racks) shelves += r.shelves.size();
  EXPECT_EQ(objects, s.racks.size() + shelves + boxes);
  EXPECT_EQ(faces % 6, 0u);
}
