#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "forge/core/error.hpp"
#include "forge/eval/losses.hpp"

namespace forge::eval {

/// Scalar function of a flat parameter vector that also reports its
/// analytic gradient.
using DifferentiableFn = std::function<double(std::span<const double>, std::vector<double>*)>;

/// Max relative error between the analytic gradient and central finite
/// differences, over all coordinates of `x`.
inline double gradient_check(const DifferentiableFn& fn, std::vector<double> x, double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1e-2)) {
    throw Error(ErrorCode::InvalidConfig, "epsilon must lie in (0, 1e-2]");
  }
  std::vector<double> analytic;
  fn(x, &analytic);
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + epsilon;
    const double up = fn(x, nullptr);
    x[i] = keep - epsilon;
    const double down = fn(x, nullptr);
    x[i] = keep;
    const double numeric = (up - down) / (2 * epsilon);
    const double scale = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-8});
    worst = std::max(worst, std::abs(numeric - analytic[i]) / scale);
  }
  return worst;
}

enum class LossId { Sup, Adv, Discr, Short, Long };

/// Inputs for checking one of the loss kernels. Probabilities are double
/// so finite differences are not swamped by float rounding.
struct GradientCheckInputs {
  std::vector<BasicProbabilityStack<double>> preds;  // batch (Sup) or sequence (Short/Long)
  std::vector<LayoutStack> truths;                   // Sup only
  std::vector<double> real;                          // Discr only
  std::vector<double> fake;                          // Adv, Discr
  PairwiseDivergence pairwise = PairwiseDivergence::SymmetricKl;
};

namespace detail {

inline std::vector<double> flatten(const std::vector<BasicProbabilityStack<double>>& stacks) {
  std::vector<double> x;
  for (const auto& s : stacks) x.insert(x.end(), s.values().begin(), s.values().end());
  return x;
}

inline void unflatten(std::span<const double> x, std::vector<BasicProbabilityStack<double>>& stacks) {
  std::size_t k = 0;
  for (auto& s : stacks) {
    auto v = s.values();
    std::copy(x.begin() + k, x.begin() + k + v.size(), v.begin());
    k += v.size();
  }
}

}  // namespace detail

inline double gradient_check(LossId id, const GradientCheckInputs& in, double epsilon) {
  switch (id) {
    case LossId::Sup:
    case LossId::Short:
    case LossId::Long: {
      auto work = in.preds;
      DifferentiableFn fn = [&](std::span<const double> x, std::vector<double>* g) {
        detail::unflatten(x, work);
        Gradient grad;
        Gradient* gp = g ? &grad : nullptr;
        std::span<const BasicProbabilityStack<double>> stacks(work);
        double v = 0;
        if (id == LossId::Sup) v = l_sup<double>(stacks, in.truths, gp);
        else if (id == LossId::Short) v = l_short<double>(stacks, in.pairwise, gp);
        else v = l_long<double>(stacks, in.pairwise, gp);
        if (g) {
          g->clear();
          for (const auto& part : grad) g->insert(g->end(), part.begin(), part.end());
        }
        return v;
      };
      return gradient_check(fn, detail::flatten(in.preds), epsilon);
    }
    case LossId::Adv: {
      DifferentiableFn fn = [](std::span<const double> x, std::vector<double>* g) {
        return l_adv({Source::Fake, {x.begin(), x.end()}}, g);
      };
      return gradient_check(fn, in.fake, epsilon);
    }
    case LossId::Discr: {
      const std::size_t nr = in.real.size();
      DifferentiableFn fn = [nr](std::span<const double> x, std::vector<double>* g) {
        DiscriminatorOutputs real{Source::Real, {x.begin(), x.begin() + nr}};
        DiscriminatorOutputs fake{Source::Fake, {x.begin() + nr, x.end()}};
        std::vector<double> gr, gf;
        const double v = l_discr(real, fake, g ? &gr : nullptr, g ? &gf : nullptr);
        if (g) {
          *g = gr;
          g->insert(g->end(), gf.begin(), gf.end());
        }
        return v;
      };
      std::vector<double> x = in.real;
      x.insert(x.end(), in.fake.begin(), in.fake.end());
      return gradient_check(fn, x, epsilon);
    }
  }
  return 0.0;
}

}  // namespace forge::eval
