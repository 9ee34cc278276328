#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "forge/core/error.hpp"
#include "forge/core/rng.hpp"
#include "forge/layout/components.hpp"
#include "forge/layout/types.hpp"

namespace forge::predictor {

enum class FlipMode {
  Uniform,   // any class may flip to either other class
  TwoClass,  // Occupied <-> Unoccupied only; Background is left alone
};

/// Failure modes of a simulated layout network. Applied in a fixed order:
/// box dropout, boundary morphology, false-positive blobs, label flips,
/// then probability softening.
struct NoiseConfig {
  double dropout_probability = 0.0;  // per Occupied component
  int radius_min = 0;                // morphology radius in cells
  int radius_max = 0;
  double erosion_probability = 0.5;  // otherwise the channel is dilated
  double blob_rate = 0.0;            // mean blobs per channel
  int blob_size_min = 2;
  int blob_size_max = 4;
  double flip_probability = 0.0;
  FlipMode flip_mode = FlipMode::Uniform;
  double temperature = 1e-3;         // softness of emitted probabilities
  double confidence_jitter = 0.0;    // in [0, 1)
  std::uint64_t seed = 0;

  static NoiseConfig none() { return {}; }

  void validate() const {
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob(dropout_probability) || !prob(erosion_probability) || !prob(flip_probability)) {
      throw Error(ErrorCode::InvalidConfig, "noise probabilities must lie in [0, 1]");
    }
    if (radius_min < 0 || radius_max < radius_min) {
      throw Error(ErrorCode::InvalidConfig, "morphology radii must satisfy 0 <= min <= max");
    }
    if (blob_rate < 0 || blob_size_min < 1 || blob_size_max < blob_size_min) {
      throw Error(ErrorCode::InvalidConfig, "invalid blob parameters");
    }
    if (!(temperature > 0)) throw Error(ErrorCode::InvalidConfig, "temperature must be > 0");
    if (!(confidence_jitter >= 0 && confidence_jitter < 1)) {
      throw Error(ErrorCode::InvalidConfig, "confidence_jitter must lie in [0, 1)");
    }
  }
  friend bool operator==(const NoiseConfig&, const NoiseConfig&) = default;
};

namespace detail {

using layout::CellClass;

inline std::vector<std::uint8_t> mask_of(std::span<const CellClass> cells, CellClass cls) {
  std::vector<std::uint8_t> m(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) m[i] = cells[i] == cls;
  return m;
}

inline void dropout(std::span<CellClass> cells, int n, double p, Rng& rng) {
  std::vector<layout::ComponentBounds> comps;
  const auto labels = layout::label_components(mask_of(cells, CellClass::Occupied), n, &comps);
  std::vector<std::uint8_t> drop(comps.size() + 1, 0);
  for (std::size_t k = 0; k < comps.size(); ++k) drop[k + 1] = rng.bernoulli(p);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (labels[i] != 0 && drop[labels[i]]) cells[i] = CellClass::Unoccupied;
  }
}

// Square structuring element of the given radius. Cells outside the grid
// do not constrain erosion.
inline void erode(std::span<CellClass> cells, int n, int radius) {
  const std::vector<CellClass> src(cells.begin(), cells.end());
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      if (src[r * n + c] != CellClass::Occupied) continue;
      bool keep = true;
      for (int dr = -radius; dr <= radius && keep; ++dr) {
        for (int dc = -radius; dc <= radius; ++dc) {
          const int rr = r + dr, cc = c + dc;
          if (rr < 0 || rr >= n || cc < 0 || cc >= n) continue;
          if (src[rr * n + cc] != CellClass::Occupied) {
            keep = false;
            break;
          }
        }
      }
      if (!keep) cells[r * n + c] = CellClass::Unoccupied;
    }
  }
}

// Grows Occupied into neighbouring Unoccupied cells; Background stays.
inline void dilate(std::span<CellClass> cells, int n, int radius) {
  const std::vector<CellClass> src(cells.begin(), cells.end());
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      if (src[r * n + c] != CellClass::Unoccupied) continue;
      bool grow = false;
      for (int dr = -radius; dr <= radius && !grow; ++dr) {
        for (int dc = -radius; dc <= radius; ++dc) {
          const int rr = r + dr, cc = c + dc;
          if (rr < 0 || rr >= n || cc < 0 || cc >= n) continue;
          if (src[rr * n + cc] == CellClass::Occupied) {
            grow = true;
            break;
          }
        }
      }
      if (grow) cells[r * n + c] = CellClass::Occupied;
    }
  }
}

inline void blobs(std::span<CellClass> cells, int n, const NoiseConfig& cfg, Rng& rng) {
  const int count = rng.poisson(cfg.blob_rate);
  for (int b = 0; b < count; ++b) {
    const int h = static_cast<int>(rng.uniform_int(cfg.blob_size_min, cfg.blob_size_max));
    const int w = static_cast<int>(rng.uniform_int(cfg.blob_size_min, cfg.blob_size_max));
    const int r0 = static_cast<int>(rng.uniform_int(0, n - 1));
    const int c0 = static_cast<int>(rng.uniform_int(0, n - 1));
    for (int r = r0; r < std::min(n, r0 + h); ++r) {
      for (int c = c0; c < std::min(n, c0 + w); ++c) {
        if (cells[r * n + c] == CellClass::Unoccupied) cells[r * n + c] = CellClass::Occupied;
      }
    }
  }
}

inline void flips(std::span<CellClass> cells, const NoiseConfig& cfg, Rng& rng) {
  for (auto& cell : cells) {
    const double u = rng.uniform();
    if (u >= cfg.flip_probability) continue;
    if (cfg.flip_mode == FlipMode::TwoClass) {
      if (cell == CellClass::Occupied) cell = CellClass::Unoccupied;
      else if (cell == CellClass::Unoccupied) cell = CellClass::Occupied;
    } else {
      const int shift = rng.bernoulli(0.5) ? 1 : 2;
      cell = static_cast<CellClass>((static_cast<int>(cell) + shift) % layout::kNumClasses);
    }
  }
}

}  // namespace detail

struct Prediction {
  layout::LayoutStack labels;
  layout::ProbabilityStack probabilities;
};

/// Simulated network output for one ground-truth stack. Deterministic in
/// (truth, cfg); labels always equal the argmax of the probabilities.
inline Prediction degrade(const layout::LayoutStack& truth, const NoiseConfig& cfg) {
  cfg.validate();
  layout::LayoutStack labels = truth;
  const int n = truth.resolution();
  const std::uint64_t base = derive_seed(cfg.seed, static_cast<std::uint64_t>(truth.view()) * 1000003ULL +
                                                       static_cast<std::uint64_t>(truth.frame_index()));

  for (int ch = 0; ch < truth.channels(); ++ch) {
    Rng rng(derive_seed(base, static_cast<std::uint64_t>(ch)));
    auto cells = labels.channel(ch);
    if (cfg.dropout_probability > 0) detail::dropout(cells, n, cfg.dropout_probability, rng);
    const int radius = static_cast<int>(rng.uniform_int(cfg.radius_min, cfg.radius_max));
    const bool erode = rng.bernoulli(cfg.erosion_probability);
    if (radius > 0) {
      if (erode) detail::erode(cells, n, radius);
      else detail::dilate(cells, n, radius);
    }
    if (cfg.blob_rate > 0) detail::blobs(cells, n, cfg, rng);
    if (cfg.flip_probability > 0) detail::flips(cells, cfg, rng);
  }

  // Winning class gets 1 - eps, the other two eps / 2 each, with
  // eps = 2 e^(-s/T) / (1 + 2 e^(-s/T)) and s in (0, 1], capped at 0.6 so
  // the label stays the strict argmax even after rounding to float.
  layout::ProbabilityStack probs(truth.view(), truth.channels(), n, truth.frame_index());
  Rng soft(derive_seed(base, 0xC0FFEEULL));
  const auto cells = labels.cells();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const double s = 1.0 - cfg.confidence_jitter * (cfg.confidence_jitter > 0 ? soft.uniform() : 0.0);
    const double e = std::exp(-s / cfg.temperature);
    const double eps = std::min(0.6, 2 * e / (1 + 2 * e));
    auto p = probs.cell(i);
    const int k = static_cast<int>(cells[i]);
    for (int j = 0; j < layout::kNumClasses; ++j) {
      p[j] = static_cast<float>(j == k ? 1.0 - eps : eps / 2);
    }
  }
  return {std::move(labels), std::move(probs)};
}

}  // namespace forge::predictor
