#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <variant>

#include "sparsetopk/isotonic.hpp"
#include "sparsetopk/regularizer.hpp"
#include "sparsetopk/types.hpp"

namespace sparsetopk {

/// w = 1_k
struct TopK {
  std::size_t k = 1;
};

struct OperatorSpec {
  Phi phi = Phi::identity;
  Regularizer reg{2.0, 1.0};
  std::variant<TopK, Vector> weights = TopK{};

  /// Materializes w for input length n and checks it (k range, finiteness,
  /// w >= 0 when phi is not the identity). Not sorted.
  Vector resolve_weights(std::size_t n) const;
};

enum class Solver { pav, dykstra, dual_bca };

Solver parse_solver(std::string_view name);
std::string_view to_string(Solver solver);

struct SolverOptions {
  Solver kind = Solver::pav;
  std::size_t dykstra_iterations = 100;
  DualBcaOptions dual{};
};

/// Below this strength the hard operator is returned.
inline constexpr double kHardLambdaThreshold = 1e-12;

/// Everything produced by one forward solve; enough to evaluate f and to
/// form Jacobian products without solving again.
struct RelaxedOutput {
  Vector y;
  Vector u;
  Vector residual;            // x - u
  IsotonicSolution solution;  // in sorted coordinates
  Vector s;                   // sorted x (or sorted |x|)
  Vector w_sorted;
  Permutation sigma;          // s[j] = x[sigma[j]] (or |x|)
  Vector signs;               // sign(x) for even phi, all ones otherwise
  Phi phi = Phi::identity;
  Regularizer reg{2.0, 1.0};
  bool hard = false;          // lambda below kHardLambdaThreshold
};

/// y = nabla R*(x - u*) with u* from the isotonic reduction:
/// identity phi sorts x; even phi sorts |x|, truncates at 0 and restores signs.
RelaxedOutput relaxed_apply(std::span<const double> x, const OperatorSpec& spec,
                            const SolverOptions& solver = {});

Vector soft_topkmask(std::span<const double> x, std::size_t k, const Regularizer& reg,
                     const SolverOptions& solver = {});
Vector soft_topkmag(std::span<const double> x, std::size_t k, const Regularizer& reg,
                    const SolverOptions& solver = {});
Vector soft_signed_topkmask(std::span<const double> x, std::size_t k, const Regularizer& reg,
                            const SolverOptions& solver = {});

/// Relaxed sort(x), descending.
Vector soft_sort(std::span<const double> x, const Regularizer& reg, const SolverOptions& solver = {});
/// Relaxed ranks in the 1-based convention (largest entry near 1, smallest near n).
Vector soft_rank(std::span<const double> x, const Regularizer& reg, const SolverOptions& solver = {});

/// f_{phi,R}(x, w) = min_u R*(x - u) + f_phi(u, w), evaluated at u*.
double f_value(std::span<const double> x, const OperatorSpec& spec, const SolverOptions& solver = {});
/// Same as f_value but reuses an existing forward pass.
double f_value(std::span<const double> x, const RelaxedOutput& out);

}  // namespace sparsetopk
