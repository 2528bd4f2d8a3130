#include "sparsetopk/autodiff.hpp"

#include <cmath>

namespace sparsetopk {

JacobianPlan::JacobianPlan(const RelaxedOutput& out)
    : blocks_(out.solution.blocks), sigma_(out.sigma), hard_(out.hard) {
  const std::size_t n = out.y.size();
  diag_.assign(n, 0.0);
  sign_.assign(n, 1.0);
  row_weight_.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (out.signs[i] < 0.0) sign_[i] = -1.0;
  }

  if (hard_) {
    // Piecewise-constant in x except for half_square, where y_i = w_rank x_i.
    if (out.phi == Phi::half_square) {
      for (std::size_t j = 0; j < n; ++j) diag_[sigma_[j]] = out.w_sorted[j];
    }
    blocks_.clear();
    return;
  }

  const Regularizer& reg = out.reg;
  for (std::size_t i = 0; i < n; ++i) diag_[i] = reg.conj_hess(out.residual[i]);

  const double lambda_q1 = reg.is_quadratic() ? reg.lambda() : std::pow(reg.lambda(), reg.q() - 1.0);
  for (const Block& b : blocks_) {
    if (b.clamped) continue;
    const double m = static_cast<double>(b.size());
    double total = 0.0;
    double sum_w = 0.0;
    for (std::size_t j = b.begin; j < b.end; ++j) {
      row_weight_[j] = reg.pow_q2(b.gamma - out.s[j]);
      total += row_weight_[j];
      sum_w += out.w_sorted[j];
    }
    double denom = total;
    if (out.phi == Phi::half_square) {
      for (std::size_t j = b.begin; j < b.end; ++j) row_weight_[j] *= reg.q() - 1.0;
      denom = (reg.q() - 1.0) * total + lambda_q1 * sum_w;
    }
    for (std::size_t j = b.begin; j < b.end; ++j) {
      row_weight_[j] = denom > 0.0 ? row_weight_[j] / denom : 1.0 / m;
    }
  }
}

Vector JacobianPlan::block_row(std::size_t b) const {
  const Block& blk = blocks_.at(b);
  return Vector(row_weight_.begin() + static_cast<std::ptrdiff_t>(blk.begin),
                row_weight_.begin() + static_cast<std::ptrdiff_t>(blk.end));
}

Vector JacobianPlan::jvp(std::span<const double> tangent) const {
  if (tangent.size() != size()) throw InvalidArgument("jvp: tangent has the wrong length");
  Vector du(size(), 0.0);
  for (const Block& b : blocks_) {
    if (b.clamped) continue;
    double acc = 0.0;
    for (std::size_t j = b.begin; j < b.end; ++j) {
      const std::size_t i = sigma_[j];
      acc += row_weight_[j] * sign_[i] * tangent[i];
    }
    for (std::size_t j = b.begin; j < b.end; ++j) du[sigma_[j]] = sign_[sigma_[j]] * acc;
  }
  Vector out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = diag_[i] * (tangent[i] - du[i]);
  return out;
}

Vector JacobianPlan::vjp(std::span<const double> cotangent) const {
  if (cotangent.size() != size()) throw InvalidArgument("vjp: cotangent has the wrong length");
  Vector a(size());
  for (std::size_t i = 0; i < size(); ++i) a[i] = diag_[i] * cotangent[i];
  Vector out = a;
  for (const Block& b : blocks_) {
    if (b.clamped) continue;
    double acc = 0.0;
    for (std::size_t j = b.begin; j < b.end; ++j) acc += sign_[sigma_[j]] * a[sigma_[j]];
    for (std::size_t j = b.begin; j < b.end; ++j) {
      const std::size_t i = sigma_[j];
      out[i] -= sign_[i] * row_weight_[j] * acc;
    }
  }
  return out;
}

Vector block_jacobian_row(const JacobianPlan& plan, std::size_t block) { return plan.block_row(block); }

namespace {

void check_shapes(std::span<const double> x, const RelaxedOutput& out, std::span<const double> g) {
  if (x.size() != out.y.size() || g.size() != x.size()) {
    throw InvalidArgument("Jacobian product: mismatched shapes");
  }
}

}  // namespace

Vector vjp(std::span<const double> x, const OperatorSpec&, const RelaxedOutput& out,
           std::span<const double> cotangent) {
  check_shapes(x, out, cotangent);
  return JacobianPlan(out).vjp(cotangent);
}

Vector jvp(std::span<const double> x, const OperatorSpec&, const RelaxedOutput& out,
           std::span<const double> tangent) {
  check_shapes(x, out, tangent);
  return JacobianPlan(out).jvp(tangent);
}

}  // namespace sparsetopk
