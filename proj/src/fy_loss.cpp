#include "sparsetopk/fy_loss.hpp"

namespace sparsetopk {

LossResult fy_topk_loss(std::span<const double> logits, std::span<const double> target, const LossConfig& cfg,
                        const SolverOptions& solver) {
  if (logits.size() != target.size()) throw InvalidArgument("fy_topk_loss: |logits| and |target| differ");
  require_finite(target, "fy_topk_loss.target");
  const RelaxedOutput out = relaxed_apply(logits, OperatorSpec{Phi::identity, cfg.reg, TopK{cfg.k}}, solver);

  LossResult res;
  res.value = f_value(logits, out);
  res.gradient.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    res.value -= logits[i] * target[i];
    res.gradient[i] = out.y[i] - target[i];
  }
  return res;
}

}  // namespace sparsetopk
