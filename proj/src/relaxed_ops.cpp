#include "sparsetopk/relaxed_ops.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "sparsetopk/hard_ops.hpp"

namespace sparsetopk {

Vector OperatorSpec::resolve_weights(std::size_t n) const {
  if (const auto* top = std::get_if<TopK>(&weights)) {
    if (top->k < 1 || top->k > n) {
      throw InvalidArgument("OperatorSpec: k must satisfy 1 <= k <= n (k=" + std::to_string(top->k) +
                            ", n=" + std::to_string(n) + ")");
    }
    return ones_k(n, top->k);
  }
  const Vector& w = std::get<Vector>(weights);
  if (w.size() != n) throw InvalidArgument("OperatorSpec: |w| must equal |x|");
  require_finite(w, "OperatorSpec.w");
  if (phi != Phi::identity && std::any_of(w.begin(), w.end(), [](double v) { return v < 0.0; })) {
    throw InvalidArgument("OperatorSpec: w must be >= 0 unless phi is identity");
  }
  return w;
}

Solver parse_solver(std::string_view name) {
  if (name == "pav") return Solver::pav;
  if (name == "dykstra") return Solver::dykstra;
  if (name == "dual_bca") return Solver::dual_bca;
  throw InvalidArgument("unknown solver '" + std::string(name) + "' (pav|dykstra|dual_bca)");
}

std::string_view to_string(Solver solver) {
  switch (solver) {
    case Solver::pav:
      return "pav";
    case Solver::dykstra:
      return "dykstra";
    case Solver::dual_bca:
      return "dual_bca";
  }
  return "?";
}

namespace {

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

IsotonicSolution solve(const IsotonicProblem& prob, const SolverOptions& opt) {
  switch (opt.kind) {
    case Solver::pav:
      return pav_solve(prob);
    case Solver::dykstra: {
      IsotonicSolution sol = recover_blocks(dykstra_solve(prob, opt.dykstra_iterations), 1e-9);
      sol.iterations = opt.dykstra_iterations;
      return sol;
    }
    case Solver::dual_bca:
      return dual_bca_solve(prob, opt.dual);
  }
  throw InvalidArgument("unknown solver");
}

// y = phi'(x) o w_{rank(phi(x))}: the unregularized operator.
void fill_hard(std::span<const double> x, RelaxedOutput& out) {
  const std::size_t n = x.size();
  out.y.assign(n, 0.0);
  out.u.assign(x.begin(), x.end());
  out.residual.assign(n, 0.0);
  out.solution.v = out.s;
  out.solution.blocks.clear();
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t i = out.sigma[j];
    const double wj = out.w_sorted[j];
    switch (out.phi) {
      case Phi::identity:
        out.y[i] = wj;
        break;
      case Phi::half_square:
        out.y[i] = wj * x[i];
        break;
      case Phi::absolute:
        out.y[i] = wj * out.signs[i];
        break;
    }
  }
}

}  // namespace

RelaxedOutput relaxed_apply(std::span<const double> x, const OperatorSpec& spec, const SolverOptions& solver) {
  if (x.empty()) throw InvalidArgument("relaxed_apply: empty input");
  require_finite(x, "relaxed_apply");
  const std::size_t n = x.size();

  RelaxedOutput out;
  out.phi = spec.phi;
  out.reg = spec.reg;
  out.w_sorted = spec.resolve_weights(n);
  if (!std::is_sorted(out.w_sorted.begin(), out.w_sorted.end(), std::greater<>())) {
    std::sort(out.w_sorted.begin(), out.w_sorted.end(), std::greater<>());
  }

  const bool even = spec.phi != Phi::identity;
  out.signs.assign(n, 1.0);
  if (even) {
    out.sigma = argsort_magnitude(x);
    out.s.resize(n);
    for (std::size_t j = 0; j < n; ++j) out.s[j] = std::abs(x[out.sigma[j]]);
    for (std::size_t i = 0; i < n; ++i) out.signs[i] = sign_of(x[i]);
  } else {
    out.sigma = argsort(x);
    out.s = out.sigma.gather(x);
  }

  if (spec.reg.lambda() < kHardLambdaThreshold) {
    out.hard = true;
    fill_hard(x, out);
    return out;
  }

  if (solver.kind == Solver::dykstra && !spec.reg.is_quadratic()) {
    throw UnsupportedConfiguration("relaxed_apply: dykstra requires p = 2; use pav or dual_bca");
  }

  IsotonicProblem prob{out.s, out.w_sorted, spec.phi, spec.reg};
  out.solution = solve(prob, solver);
  if (even) truncate_nonnegative(out.solution);

  // Residual s - v in sorted coordinates. Singleton blocks use the closed form,
  // which avoids the cancellation in s - v when lambda is small.
  Vector t(n);
  for (std::size_t j = 0; j < n; ++j) t[j] = out.s[j] - out.solution.v[j];
  for (const Block& b : out.solution.blocks) {
    if (b.size() != 1 || b.clamped) continue;
    const std::size_t j = b.begin;
    const double wj = out.w_sorted[j];
    if (spec.phi != Phi::half_square) {
      t[j] = spec.reg.primal_grad(wj);
    } else if (spec.reg.is_quadratic()) {
      const double lw = spec.reg.lambda() * wj;
      t[j] = out.s[j] * lw / (1.0 + lw);
    }
  }

  out.u.resize(n);
  out.y.resize(n);
  out.residual.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t i = out.sigma[j];
    out.u[i] = out.signs[i] * out.solution.v[j];
    out.residual[i] = out.signs[i] * t[j];
    out.y[i] = spec.reg.conj_grad(out.residual[i]);
  }
  return out;
}

Vector soft_topkmask(std::span<const double> x, std::size_t k, const Regularizer& reg,
                     const SolverOptions& solver) {
  return relaxed_apply(x, OperatorSpec{Phi::identity, reg, TopK{k}}, solver).y;
}

Vector soft_topkmag(std::span<const double> x, std::size_t k, const Regularizer& reg,
                    const SolverOptions& solver) {
  return relaxed_apply(x, OperatorSpec{Phi::half_square, reg, TopK{k}}, solver).y;
}

Vector soft_signed_topkmask(std::span<const double> x, std::size_t k, const Regularizer& reg,
                            const SolverOptions& solver) {
  return relaxed_apply(x, OperatorSpec{Phi::absolute, reg, TopK{k}}, solver).y;
}

namespace {

// rho = (n, n-1, ..., 1)
Vector reversing(std::size_t n) {
  Vector rho(n);
  for (std::size_t i = 0; i < n; ++i) rho[i] = static_cast<double>(n - i);
  return rho;
}

}  // namespace

Vector soft_sort(std::span<const double> x, const Regularizer& reg, const SolverOptions& solver) {
  if (x.empty()) throw InvalidArgument("soft_sort: empty input");
  const Vector rho = reversing(x.size());
  return relaxed_apply(rho, OperatorSpec{Phi::identity, reg, Vector(x.begin(), x.end())}, solver).y;
}

Vector soft_rank(std::span<const double> x, const Regularizer& reg, const SolverOptions& solver) {
  if (x.empty()) throw InvalidArgument("soft_rank: empty input");
  Vector neg(x.begin(), x.end());
  for (double& v : neg) v = -v;
  return relaxed_apply(neg, OperatorSpec{Phi::identity, reg, reversing(x.size())}, solver).y;
}

double f_value(std::span<const double> x, const RelaxedOutput& out) {
  if (x.size() != out.u.size()) throw InvalidArgument("f_value: |x| does not match the forward pass");
  // f_phi(u, w) = sum_j w_[j] phi(v_j): v is sorted and, for even phi,
  // non-negative, so phi(v) keeps the order.
  double linear = 0.0;
  for (std::size_t j = 0; j < out.s.size(); ++j) {
    linear += out.w_sorted[j] * phi_value(out.phi, out.solution.v[j]);
  }
  if (out.hard) return linear;
  double conj = 0.0;
  for (double r : out.residual) conj += out.reg.conj(r);
  return conj + linear;
}

double f_value(std::span<const double> x, const OperatorSpec& spec, const SolverOptions& solver) {
  return f_value(x, relaxed_apply(x, spec, solver));
}

}  // namespace sparsetopk
