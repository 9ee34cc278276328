#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "forge/core/error.hpp"
#include "forge/layout/types.hpp"

namespace forge::eval {

using layout::BasicProbabilityStack;
using layout::CellClass;
using layout::kNumClasses;
using layout::LayoutStack;

inline constexpr double kLogEpsilon = 1e-12;

/// Gradient buffers, one per batch member, laid out like `values()`.
using Gradient = std::vector<std::vector<double>>;

struct CellDivergence {
  double value = 0.0;
  std::array<double, kNumClasses> grad{};
};

/// -log(p[truth] + eps) and its gradient with respect to p.
template <typename Real>
CellDivergence cell_divergence(std::span<const Real, kNumClasses> p, CellClass truth) {
  const int t = static_cast<int>(truth);
  CellDivergence out;
  const double pt = static_cast<double>(p[t]) + kLogEpsilon;
  out.value = -std::log(pt);
  out.grad[t] = -1.0 / pt;
  return out;
}

/// How two predicted distributions are compared in the consistency terms.
enum class PairwiseDivergence {
  SymmetricKl,   // 0.5 * sum_k (p_k - q_k) (log(p_k + eps) - log(q_k + eps))
  SquaredError,  // sum_k (p_k - q_k)^2
};

namespace detail {

template <typename Real>
void ensure_grad(Gradient* grad, std::span<const BasicProbabilityStack<Real>> items) {
  if (grad == nullptr) return;
  grad->resize(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    (*grad)[i].assign(items[i].values().size(), 0.0);
  }
}

// Sum over channels of the per-channel mean of the pairwise divergence.
// Accumulates into ga / gb when given.
template <typename Real>
double pair_term(const BasicProbabilityStack<Real>& a, const BasicProbabilityStack<Real>& b,
                 PairwiseDivergence mode, std::vector<double>* ga, std::vector<double>* gb) {
  const double inv = 1.0 / static_cast<double>(a.cells_per_channel());
  const auto pa = a.values();
  const auto pb = b.values();
  double total = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const double p = pa[i];
    const double q = pb[i];
    const double d = p - q;
    if (mode == PairwiseDivergence::SymmetricKl) {
      const double lp = std::log(p + kLogEpsilon);
      const double lq = std::log(q + kLogEpsilon);
      total += 0.5 * d * (lp - lq) * inv;
      if (ga) (*ga)[i] += 0.5 * inv * ((lp - lq) + d / (p + kLogEpsilon));
      if (gb) (*gb)[i] += 0.5 * inv * (-(lp - lq) - d / (q + kLogEpsilon));
    } else {
      total += d * d * inv;
      if (ga) (*ga)[i] += 2 * d * inv;
      if (gb) (*gb)[i] -= 2 * d * inv;
    }
  }
  return total;
}

template <typename Real>
void check_sequence(std::span<const BasicProbabilityStack<Real>> seq) {
  for (const auto& s : seq) {
    if (!s.same_shape(seq.front())) throw Error(ErrorCode::ShapeError, "sequence frames differ in shape");
  }
}

}  // namespace detail

/// Supervised term: over batch members and shelf channels, the mean cell
/// divergence between prediction and ground truth.
template <typename Real>
double l_sup(std::span<const BasicProbabilityStack<Real>> preds, std::span<const LayoutStack> truths,
             Gradient* grad = nullptr) {
  if (preds.size() != truths.size()) {
    throw Error(ErrorCode::ShapeError, "prediction and truth batches differ in size");
  }
  for (std::size_t j = 0; j < preds.size(); ++j) {
    if (!preds[j].same_shape(truths[j])) {
      throw Error(ErrorCode::ShapeError, "batch item " + std::to_string(j) + " shape mismatch");
    }
  }
  detail::ensure_grad(grad, preds);
  double total = 0.0;
  for (std::size_t j = 0; j < preds.size(); ++j) {
    const auto& pred = preds[j];
    const auto labels = truths[j].cells();
    const double inv = 1.0 / static_cast<double>(pred.cells_per_channel());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const auto cd = cell_divergence<Real>(pred.cell(i), labels[i]);
      total += cd.value * inv;
      if (grad) {
        for (int k = 0; k < kNumClasses; ++k) (*grad)[j][i * kNumClasses + k] += cd.grad[k] * inv;
      }
    }
  }
  return total;
}

/// Short-range consistency: divergence between consecutive frames.
template <typename Real>
double l_short(std::span<const BasicProbabilityStack<Real>> seq,
               PairwiseDivergence mode = PairwiseDivergence::SymmetricKl, Gradient* grad = nullptr) {
  if (seq.size() < 2) throw Error(ErrorCode::SequenceTooShort, "l_short needs at least two frames");
  detail::check_sequence(seq);
  detail::ensure_grad(grad, seq);
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < seq.size(); ++j) {
    total += detail::pair_term(seq[j], seq[j + 1], mode, grad ? &(*grad)[j] : nullptr,
                               grad ? &(*grad)[j + 1] : nullptr);
  }
  return total;
}

/// Long-range consistency: divergence between every pair of frames at
/// least two apart. Zero for sequences shorter than three.
template <typename Real>
double l_long(std::span<const BasicProbabilityStack<Real>> seq,
              PairwiseDivergence mode = PairwiseDivergence::SymmetricKl, Gradient* grad = nullptr) {
  detail::check_sequence(seq);
  detail::ensure_grad(grad, seq);
  double total = 0.0;
  for (std::size_t j = 0; j < seq.size(); ++j) {
    for (std::size_t k = j + 2; k < seq.size(); ++k) {
      total += detail::pair_term(seq[j], seq[k], mode, grad ? &(*grad)[j] : nullptr,
                                 grad ? &(*grad)[k] : nullptr);
    }
  }
  return total;
}

enum class Source { Real, Fake };

/// Discriminator scores for a batch, all from one source.
struct DiscriminatorOutputs {
  Source source = Source::Fake;
  std::vector<double> values;

  void validate(Source expected) const {
    if (source != expected) throw Error(ErrorCode::ValidationError, "discriminator outputs carry the wrong source tag");
    if (values.empty()) throw Error(ErrorCode::EmptyBatch, "discriminator batch is empty");
    for (double v : values) {
      if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::ValidationError, "discriminator output outside [0, 1]");
    }
  }
};

/// Least-squares adversarial term for the generator: mean of (v - 1)^2.
inline double l_adv(const DiscriminatorOutputs& fake, std::vector<double>* grad = nullptr) {
  fake.validate(Source::Fake);
  const double n = static_cast<double>(fake.values.size());
  double total = 0.0;
  if (grad) grad->assign(fake.values.size(), 0.0);
  for (std::size_t i = 0; i < fake.values.size(); ++i) {
    const double d = fake.values[i] - 1.0;
    total += d * d;
    if (grad) (*grad)[i] = 2 * d / n;
  }
  return total / n;
}

/// Least-squares discriminator term: mean (r - 1)^2 over real plus mean
/// f^2 over fake.
inline double l_discr(const DiscriminatorOutputs& real, const DiscriminatorOutputs& fake,
                      std::vector<double>* grad_real = nullptr, std::vector<double>* grad_fake = nullptr) {
  real.validate(Source::Real);
  fake.validate(Source::Fake);
  const double nr = static_cast<double>(real.values.size());
  const double nf = static_cast<double>(fake.values.size());
  double tr = 0.0, tf = 0.0;
  if (grad_real) grad_real->assign(real.values.size(), 0.0);
  if (grad_fake) grad_fake->assign(fake.values.size(), 0.0);
  for (std::size_t i = 0; i < real.values.size(); ++i) {
    const double d = real.values[i] - 1.0;
    tr += d * d;
    if (grad_real) (*grad_real)[i] = 2 * d / nr;
  }
  for (std::size_t i = 0; i < fake.values.size(); ++i) {
    const double f = fake.values[i];
    tf += f * f;
    if (grad_fake) (*grad_fake)[i] = 2 * f / nf;
  }
  return tr / nr + tf / nf;
}

struct LossReport {
  double l_sup = 0.0;
  double l_adv = 0.0;
  double l_short = 0.0;
  double l_long = 0.0;
  double l_discr = 0.0;
  double l_total = 0.0;
};

inline double total_loss(const LossReport& r) {
  return r.l_sup + r.l_short + r.l_long + r.l_adv + r.l_discr;
}

/// All five terms for one sequence of predictions and its labels. The
/// adversarial terms are skipped (left at zero) when no discriminator
/// outputs are supplied.
template <typename Real>
LossReport loss_report(std::span<const BasicProbabilityStack<Real>> preds, std::span<const LayoutStack> truths,
                       const DiscriminatorOutputs* real = nullptr, const DiscriminatorOutputs* fake = nullptr,
                       PairwiseDivergence mode = PairwiseDivergence::SymmetricKl) {
  LossReport r;
  r.l_sup = l_sup<Real>(preds, truths);
  r.l_short = preds.size() >= 2 ? l_short<Real>(preds, mode) : 0.0;
  r.l_long = l_long<Real>(preds, mode);
  if (fake != nullptr) r.l_adv = l_adv(*fake);
  if (real != nullptr && fake != nullptr) r.l_discr = l_discr(*real, *fake);
  r.l_total = total_loss(r);
  return r;
}

}  // namespace forge::eval
