#pragma once

#include <cstddef>
#include <span>

#include "sparsetopk/relaxed_ops.hpp"

// Closed-form Jacobian products of y = nabla R*(x - u*).
//
// Each isotonic block B contributes a rank-one piece d gamma_B / d s_i with
//   identity:    |gamma - s_i|^(q-2) / sum_j |gamma - s_j|^(q-2)
//   half_square: (q-1)|gamma - s_i|^(q-2) / (sum_j (q-1)|gamma - s_j|^(q-2) + lambda^(q-1) w_j)
// (the lambda^(q-1) factor comes from R = (lambda/p)||.||_p^p). Clamped blocks
// contribute nothing. Then dy = D (dx - du) with D_ii = (r*)''(x_i - u_i).
namespace sparsetopk {

class JacobianPlan {
 public:
  explicit JacobianPlan(const RelaxedOutput& out);

  std::size_t size() const noexcept { return diag_.size(); }
  std::size_t block_count() const noexcept { return blocks_.size(); }
  const Block& block(std::size_t b) const { return blocks_.at(b); }

  /// d gamma_B / d s_i for i in block b (sorted coordinates).
  Vector block_row(std::size_t b) const;

  Vector jvp(std::span<const double> tangent) const;
  Vector vjp(std::span<const double> cotangent) const;

 private:
  std::vector<Block> blocks_;
  Vector row_weight_;  // sorted coordinates
  Vector diag_;        // original coordinates
  Vector sign_;        // original coordinates; sign(0) taken as +1
  Permutation sigma_;
  bool hard_ = false;
};

/// Row of the block Jacobian for block index `block`.
Vector block_jacobian_row(const JacobianPlan& plan, std::size_t block);

/// d<cotangent, y>/dx for y = relaxed_apply(x, spec).y.
Vector vjp(std::span<const double> x, const OperatorSpec& spec, const RelaxedOutput& out,
           std::span<const double> cotangent);
/// Directional derivative of y along `tangent`.
Vector jvp(std::span<const double> x, const OperatorSpec& spec, const RelaxedOutput& out,
           std::span<const double> tangent);

}  // namespace sparsetopk
