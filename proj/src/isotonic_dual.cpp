#include <algorithm>
#include <cmath>

#include "sparsetopk/isotonic.hpp"
#include "sparsetopk/root_finding.hpp"

namespace sparsetopk {

namespace {

// Dual of the ordering constraints: alpha_j >= 0 multiplies v_j >= v_{j+1}, and
// v_i = (h_i^*)'(alpha_i - alpha_{i-1}) with alpha_{-1} = alpha_{n-1} = 0.
class DualState {
 public:
  explicit DualState(const IsotonicProblem& prob) : prob_(prob) {}

  /// (h_i^*)'(b) = argmax_v b v - h_i(v), i.e. the v with h_i'(v) = b.
  double primal(std::size_t i, double b) const {
    const double s = prob_.s[i];
    const double w = prob_.w[i];
    const Regularizer& reg = prob_.reg;
    if (prob_.phi != Phi::half_square) return s + reg.primal_grad(b - w);
    if (reg.is_quadratic()) return (reg.lambda() * b + s) / (1.0 + reg.lambda() * w);
    // lambda^(1-q) sign(v-s)|v-s|^(q-1) + w v = b, bracketed between s and
    // s + r'(b - w s).
    const double edge = s + reg.primal_grad(b - w * s);
    auto fdf = [&](double v) {
      return std::pair{reg.conj_grad(v - s) + w * v - b, reg.conj_hess(v - s) + w};
    };
    return solve_increasing(fdf, std::min(s, edge), std::max(s, edge), s);
  }

  /// dv/db = 1 / h_i''(v)
  double primal_slope(std::size_t i, double v) const {
    double curvature = prob_.reg.conj_hess(v - prob_.s[i]);
    if (prob_.phi == Phi::half_square) curvature += prob_.w[i];
    return 1.0 / curvature;
  }

  /// Maximizes the dual over alpha_j with its neighbours held fixed.
  double update(std::size_t j, double left, double right) const {
    auto fdf = [&](double a) {
      const double vj = primal(j, a - left);
      const double vk = primal(j + 1, right - a);
      return std::pair{vj - vk, primal_slope(j, vj) + primal_slope(j + 1, vk)};
    };
    if (fdf(0.0).first >= 0.0) return 0.0;
    double hi = std::max(1.0, std::abs(left) + std::abs(right));
    while (fdf(hi).first < 0.0) {
      hi *= 2.0;
      if (!std::isfinite(hi)) throw NumericError("dual_bca_solve: cannot bracket multiplier", 0.0, hi);
    }
    return solve_increasing(fdf, 0.0, hi, 0.5 * hi, RootOptions{1e-15, 200});
  }

 private:
  const IsotonicProblem& prob_;
};

}  // namespace

IsotonicSolution dual_bca_solve(const IsotonicProblem& prob, DualBcaOptions opt) {
  prob.validate();
  if (prob.phi == Phi::half_square) {
    for (double w : prob.w) {
      if (w < 0.0) throw InvalidArgument("dual_bca_solve: w must be >= 0 for half_square");
    }
  }
  const std::size_t n = prob.s.size();
  const DualState dual(prob);
  Vector alpha(n > 0 ? n - 1 : 0, 0.0);
  auto alpha_at = [&](std::ptrdiff_t j) {
    return (j < 0 || j >= static_cast<std::ptrdiff_t>(alpha.size())) ? 0.0 : alpha[j];
  };
  auto primal_from_dual = [&](Vector& v) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto si = static_cast<std::ptrdiff_t>(i);
      v[i] = dual.primal(i, alpha_at(si) - alpha_at(si - 1));
    }
  };

  Vector v(n);
  Vector prev(n);
  primal_from_dual(v);
  bool converged = n == 1;
  std::size_t sweep = 0;
  while (!converged && sweep < opt.max_sweeps) {
    ++sweep;
    for (std::size_t parity = 0; parity < 2; ++parity) {
      for (std::size_t j = parity; j < alpha.size(); j += 2) {
        const auto sj = static_cast<std::ptrdiff_t>(j);
        alpha[j] = dual.update(j, alpha_at(sj - 1), alpha_at(sj + 1));
      }
    }
    prev.swap(v);
    primal_from_dual(v);
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) change = std::max(change, std::abs(v[i] - prev[i]));
    converged = change < opt.tol;
  }

  IsotonicSolution sol = recover_blocks(std::move(v), std::max(opt.tol, 1e-9));
  sol.converged = converged;
  sol.iterations = sweep;
  return sol;
}

}  // namespace sparsetopk
