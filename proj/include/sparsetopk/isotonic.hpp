#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sparsetopk/regularizer.hpp"
#include "sparsetopk/types.hpp"

// Separable isotonic optimization
//
//   min_{v_0 >= v_1 >= ... >= v_{n-1}}  sum_i h_i(v_i),
//   h_i(v) = r*(s_i - v) + w_i phi(v),
//
// solved by pool-adjacent-violators (exact), Dykstra's alternating pairwise
// projections (p = 2 only) and block coordinate ascent on the dual.
//
// Phi::absolute is solved in the identity form w_i * v: the callers only use it
// on the non-negative cone, where |v| = v, and truncate afterwards.
namespace sparsetopk {

struct IsotonicProblem {
  Vector s;  // non-increasing in the reduction; any order is solved correctly
  Vector w;  // >= 0 unless phi is identity
  Phi phi = Phi::identity;
  Regularizer reg{2.0, 1.0};

  /// Checks sizes, finiteness and the sign of w.
  void validate() const;
};

struct Block {
  std::size_t begin = 0;  // [begin, end) in sorted coordinates
  std::size_t end = 0;
  double gamma = 0.0;
  bool clamped = false;  // set by truncate_nonnegative

  std::size_t size() const noexcept { return end - begin; }
};

struct IsotonicSolution {
  Vector v;
  std::vector<Block> blocks;
  bool converged = true;
  std::size_t iterations = 0;
};

/// PAV merges adjacent blocks while gamma_left <= gamma_right + kMergeTolerance.
inline constexpr double kMergeTolerance = 1e-12;

/// h_i(v) for one coordinate.
double isotonic_term(const IsotonicProblem& prob, std::size_t i, double v);
/// sum_i h_i(v_i). Uses |v| for Phi::absolute.
double isotonic_objective(const IsotonicProblem& prob, std::span<const double> v);

/// argmin_gamma sum_{i in B} h_i(gamma) for the block (block_s, block_w).
double pool_subproblem(std::span<const double> block_s, std::span<const double> block_w, Phi phi,
                       const Regularizer& reg);

IsotonicSolution pav_solve(const IsotonicProblem& prob);

/// Dykstra's algorithm on C1 = {v_0 >= v_1, v_2 >= v_3, ...} and
/// C2 = {v_1 >= v_2, v_3 >= v_4, ...}, in the weighted Euclidean form the
/// quadratic case reduces to. Requires p = 2. iterations = 0 returns the
/// unconstrained per-coordinate minimizer.
Vector dykstra_solve(const IsotonicProblem& prob, std::size_t iterations);

struct DualBcaOptions {
  double tol = 1e-10;
  std::size_t max_sweeps = 1'000'000;
};

/// Alternating odd/even coordinate ascent on the dual multipliers of the
/// n - 1 ordering constraints. `converged` is false when max_sweeps ran out.
IsotonicSolution dual_bca_solve(const IsotonicProblem& prob, DualBcaOptions opt = {});

/// Groups consecutive coordinates whose values differ by less than tol into
/// blocks; gamma is the block mean, written back into v.
IsotonicSolution recover_blocks(Vector v, double tol);

/// Clamps blocks with negative value to 0 and merges them into one trailing
/// clamped block (the non-negative monotone cone).
void truncate_nonnegative(IsotonicSolution& sol);

}  // namespace sparsetopk
