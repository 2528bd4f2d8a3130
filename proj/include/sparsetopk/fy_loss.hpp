#pragma once

#include <cstddef>
#include <span>

#include "sparsetopk/relaxed_ops.hpp"

namespace sparsetopk {

/// Top-k Fenchel-Young loss with phi fixed to the identity.
struct LossConfig {
  std::size_t k = 1;
  Regularizer reg{2.0, 1.0};
};

struct LossResult {
  double value = 0.0;
  Vector gradient;
};

/// l(x, t) = f_{id,R}(x, 1_k) - <x, t>, gradient soft_topkmask(x) - t.
/// The target is used as given (one-hot or not); no normalization.
LossResult fy_topk_loss(std::span<const double> logits, std::span<const double> target, const LossConfig& cfg,
                        const SolverOptions& solver = {});

}  // namespace sparsetopk
