#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "forge/core/error.hpp"
#include "forge/layout/types.hpp"

namespace forge::eval {

using layout::CellClass;
using layout::LayoutStack;
using layout::ProbabilityStack;
using layout::View;

/// Rack is the whole shelf extent (Occupied or Unoccupied); Box is Occupied.
enum class MetricClass { Rack = 0, Box = 1 };

constexpr std::string_view to_string(MetricClass c) { return c == MetricClass::Rack ? "rack" : "box"; }

constexpr bool in_class(CellClass c, MetricClass m) {
  return m == MetricClass::Box ? c == CellClass::Occupied : c != CellClass::Background;
}

/// Score of the class event from a cell's probability vector.
template <typename Real>
double class_score(std::span<const Real, layout::kNumClasses> p, MetricClass m) {
  const double occ = p[static_cast<int>(CellClass::Occupied)];
  return m == MetricClass::Box ? occ : occ + static_cast<double>(p[static_cast<int>(CellClass::Unoccupied)]);
}

/// Positive and negative counts sharing one score.
struct ScoreTally {
  std::uint64_t positives = 0;
  std::uint64_t negatives = 0;
};

/// Area under the precision-recall curve from tallies ordered by strictly
/// decreasing score. Each tally is one threshold; the curve starts at
/// recall 0 with the precision of the first threshold and is integrated
/// with the trapezoidal rule. Returns nullopt when there are no positives.
inline std::optional<double> pr_auc(std::span<const ScoreTally> tallies) {
  std::uint64_t total = 0;
  for (const auto& t : tallies) total += t.positives;
  if (total == 0) return std::nullopt;
  std::uint64_t tp = 0, fp = 0;
  double prev_recall = 0.0, prev_precision = -1.0, area = 0.0;
  for (const auto& t : tallies) {
    if (t.positives == 0 && t.negatives == 0) continue;
    tp += t.positives;
    fp += t.negatives;
    const double recall = static_cast<double>(tp) / static_cast<double>(total);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    if (prev_precision < 0) prev_precision = precision;
    area += (recall - prev_recall) * (precision + prev_precision) / 2;
    prev_recall = recall;
    prev_precision = precision;
  }
  return area;
}

/// Exact PR-AUC of pooled scores; equal scores form one threshold.
inline std::optional<double> pr_auc(std::vector<double> positives, std::vector<double> negatives) {
  std::sort(positives.begin(), positives.end(), std::greater<>());
  std::sort(negatives.begin(), negatives.end(), std::greater<>());
  std::vector<ScoreTally> tallies;
  std::size_t i = 0, j = 0;
  while (i < positives.size() || j < negatives.size()) {
    double t = -1e300;
    if (i < positives.size()) t = std::max(t, positives[i]);
    if (j < negatives.size()) t = std::max(t, negatives[j]);
    ScoreTally tally;
    for (; i < positives.size() && positives[i] == t; ++i) ++tally.positives;
    for (; j < negatives.size() && negatives[j] == t; ++j) ++tally.negatives;
    tallies.push_back(tally);
  }
  return pr_auc(tallies);
}

/// mIoU / mAP for every (view, class) pair; cells are empty when the metric
/// is undefined on the dataset.
struct MetricsTable {
  struct Entry {
    std::optional<double> miou;
    std::optional<double> map;
  };
  std::array<std::array<Entry, 2>, 2> cells{};  // [view][class]

  Entry& at(View v, MetricClass c) { return cells[static_cast<int>(v)][static_cast<int>(c)]; }
  const Entry& at(View v, MetricClass c) const { return cells[static_cast<int>(v)][static_cast<int>(c)]; }
};

/// Streaming evaluation, one frame at a time.
///
/// mIoU is the mean IoU (percent) of the class masks over every (frame,
/// channel) whose union is non-empty, which keeps it symmetric in truth and
/// prediction. mAP is pixel-level: per shelf channel, scores of all frames
/// are pooled into one PR curve, and the mean is taken over channels that
/// contain any positive. Scores are binned to 2^-16 so memory does not grow
/// with the dataset; scores that differ by less share a threshold.
class MetricsAccumulator {
 public:
  static constexpr int kScoreBins = 1 << 16;

  /// `prob` may be null, in which case the prediction counts as one-hot.
  void add(const LayoutStack& truth, const LayoutStack& pred, const ProbabilityStack* prob = nullptr) {
    if (!pred.same_shape(truth)) throw Error(ErrorCode::ShapeError, "prediction and truth differ in shape");
    if (prob != nullptr && !prob->same_shape(truth)) {
      throw Error(ErrorCode::ShapeError, "probabilities and truth differ in shape");
    }
    const int v = static_cast<int>(truth.view());
    for (int c = 0; c < 2; ++c) {
      const auto cls = static_cast<MetricClass>(c);
      auto& acc = acc_[v][c];
      if (static_cast<int>(acc.hist.size()) < truth.channels()) acc.hist.resize(truth.channels());
      for (int ch = 0; ch < truth.channels(); ++ch) {
        const auto p = pred.channel(ch);
        const auto t = truth.channel(ch);
        auto& hist = acc.hist[ch];
        if (hist.empty()) hist.resize(kScoreBins);
        const std::size_t base = static_cast<std::size_t>(ch) * truth.cells_per_channel();
        std::size_t inter = 0, uni = 0;
        for (std::size_t i = 0; i < t.size(); ++i) {
          const bool a = in_class(p[i], cls);
          const bool b = in_class(t[i], cls);
          inter += a && b;
          uni += a || b;
          const double score = prob != nullptr ? class_score<float>(prob->cell(base + i), cls) : (a ? 1.0 : 0.0);
          auto& tally = hist[bin(score)];
          (b ? tally.positives : tally.negatives)++;
        }
        if (uni > 0) {
          acc.iou_sum += static_cast<double>(inter) / static_cast<double>(uni);
          ++acc.iou_count;
        }
      }
    }
  }

  std::optional<double> miou(View view, MetricClass cls) const {
    const auto& acc = acc_[static_cast<int>(view)][static_cast<int>(cls)];
    if (acc.iou_count == 0) return std::nullopt;
    return 100.0 * acc.iou_sum / static_cast<double>(acc.iou_count);
  }

  std::optional<double> map(View view, MetricClass cls) const {
    const auto& acc = acc_[static_cast<int>(view)][static_cast<int>(cls)];
    double sum = 0.0;
    int count = 0;
    for (const auto& hist : acc.hist) {
      if (hist.empty()) continue;
      std::vector<ScoreTally> desc(hist.rbegin(), hist.rend());
      if (auto ap = pr_auc(desc)) {
        sum += *ap;
        ++count;
      }
    }
    if (count == 0) return std::nullopt;
    return 100.0 * sum / count;
  }

  MetricsTable table() const {
    MetricsTable t;
    for (View v : {View::Top, View::Front}) {
      for (MetricClass c : {MetricClass::Rack, MetricClass::Box}) {
        t.at(v, c).miou = miou(v, c);
        t.at(v, c).map = map(v, c);
      }
    }
    return t;
  }

 private:
  static std::size_t bin(double score) {
    const double b = std::floor(score * kScoreBins);
    return static_cast<std::size_t>(std::clamp(b, 0.0, static_cast<double>(kScoreBins - 1)));
  }

  struct PerClass {
    double iou_sum = 0.0;
    std::uint64_t iou_count = 0;
    std::vector<std::vector<ScoreTally>> hist;  // [channel][bin]
  };
  std::array<std::array<PerClass, 2>, 2> acc_{};
};

namespace detail {

[[noreturn]] inline void undefined(View view, MetricClass cls) {
  throw Error(ErrorCode::UndefinedMetric,
              "no " + std::string(to_string(view)) + " channel contains class " + std::string(to_string(cls)));
}

inline void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) throw Error(ErrorCode::ShapeError, "datasets differ in length");
}

}  // namespace detail

/// mIoU (percent) over the stacks of `view`; see MetricsAccumulator.
inline double miou(std::span<const LayoutStack> preds, std::span<const LayoutStack> truths, MetricClass cls,
                   View view) {
  detail::check_lengths(preds.size(), truths.size());
  MetricsAccumulator acc;
  for (std::size_t f = 0; f < truths.size(); ++f) {
    if (!preds[f].same_shape(truths[f])) throw Error(ErrorCode::ShapeError, "frame " + std::to_string(f) + " shape mismatch");
    if (truths[f].view() == view) acc.add(truths[f], preds[f]);
  }
  const auto r = acc.miou(view, cls);
  if (!r) detail::undefined(view, cls);
  return *r;
}

/// Pixel-level mAP (percent) over the stacks of `view`; see
/// MetricsAccumulator.
inline double average_precision(std::span<const ProbabilityStack> preds, std::span<const LayoutStack> truths,
                                MetricClass cls, View view) {
  detail::check_lengths(preds.size(), truths.size());
  MetricsAccumulator acc;
  for (std::size_t f = 0; f < truths.size(); ++f) {
    if (!preds[f].same_shape(truths[f])) throw Error(ErrorCode::ShapeError, "frame " + std::to_string(f) + " shape mismatch");
    if (truths[f].view() == view) acc.add(truths[f], preds[f].argmax(), &preds[f]);
  }
  const auto r = acc.map(view, cls);
  if (!r) detail::undefined(view, cls);
  return *r;
}

inline MetricsTable evaluate_stacks(std::span<const LayoutStack> truths, std::span<const LayoutStack> preds,
                                    std::span<const ProbabilityStack> probs) {
  detail::check_lengths(preds.size(), truths.size());
  detail::check_lengths(probs.size(), truths.size());
  MetricsAccumulator acc;
  for (std::size_t f = 0; f < truths.size(); ++f) acc.add(truths[f], preds[f], &probs[f]);
  return acc.table();
}

}  // namespace forge::eval
