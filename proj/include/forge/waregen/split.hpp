#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "forge/core/error.hpp"
#include "forge/core/rng.hpp"

namespace forge::waregen {

struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> test;
  std::vector<std::string> validation;
  std::uint64_t seed = 0;
  friend bool operator==(const DatasetSplit&, const DatasetSplit&) = default;
};

/// Shuffles `ids` with `seed` and cuts it into train/test/validation.
/// `ratios` are either absolute counts summing to ids.size() or fractions
/// summing to 1.
inline DatasetSplit split_dataset(const std::vector<std::string>& ids,
                                  std::array<double, 3> ratios, std::uint64_t seed) {
  const double n = static_cast<double>(ids.size());
  const double sum = ratios[0] + ratios[1] + ratios[2];
  for (double r : ratios) {
    if (r < 0) throw Error(ErrorCode::InvalidSplit, "split ratios must be non-negative");
  }
  const bool integral = std::all_of(ratios.begin(), ratios.end(),
                                    [](double r) { return r == std::floor(r); });
  std::array<std::size_t, 3> counts{};
  if (integral && sum == n) {
    for (int i = 0; i < 3; ++i) counts[i] = static_cast<std::size_t>(ratios[i]);
  } else if (std::abs(sum - 1.0) <= 1e-9) {
    counts[0] = static_cast<std::size_t>(std::llround(ratios[0] * n));
    counts[1] = static_cast<std::size_t>(std::llround(ratios[1] * n));
    if (counts[0] + counts[1] > ids.size()) counts[1] = ids.size() - counts[0];
    counts[2] = ids.size() - counts[0] - counts[1];
  } else {
    throw Error(ErrorCode::InvalidSplit,
                "ratios sum to " + std::to_string(sum) + " but there are " +
                    std::to_string(ids.size()) + " sequences");
  }

  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(order[i - 1], order[j]);
  }

  DatasetSplit out;
  out.seed = seed;
  std::size_t k = 0;
  for (; k < counts[0]; ++k) out.train.push_back(ids[order[k]]);
  for (; k < counts[0] + counts[1]; ++k) out.test.push_back(ids[order[k]]);
  for (; k < order.size(); ++k) out.validation.push_back(ids[order[k]]);
  return out;
}

}  // namespace forge::waregen
