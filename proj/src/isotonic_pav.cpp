#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sparsetopk/isotonic.hpp"
#include "sparsetopk/root_finding.hpp"

namespace sparsetopk {

namespace {

// Phi::absolute shares the identity stationarity equation.
bool linear_term(Phi phi) { return phi != Phi::half_square; }

// Sufficient statistics of a block. Central moments merge in O(1)
// (Chan et al. pairwise update), which makes PAV linear for p = 2 and p = 4/3.
struct BlockStats {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;  // sum (s - mean)^2
  double m3 = 0.0;  // sum (s - mean)^3
  double sum_w = 0.0;
  double s_min = 0.0;
  double s_max = 0.0;

  static BlockStats single(double s, double w) { return {1.0, s, 0.0, 0.0, w, s, s}; }

  void merge(const BlockStats& o) {
    const double n = count + o.count;
    const double delta = o.mean - mean;
    const double d_n = delta / n;
    const double m3_new = m3 + o.m3 + delta * d_n * d_n * count * o.count * (count - o.count) +
                          3.0 * d_n * (count * o.m2 - o.count * m2);
    m2 = m2 + o.m2 + delta * d_n * count * o.count;
    m3 = m3_new;
    mean += d_n * o.count;
    count = n;
    sum_w += o.sum_w;
    s_min = std::min(s_min, o.s_min);
    s_max = std::max(s_max, o.s_max);
  }
};

// Bracket for the block root: identity form in [s_min - lambda c, s_max - lambda c]
// with c = sign(W/m)|W/m|^(p-1); half_square between 0 and the s range.
std::pair<double, double> root_bracket(double s_min, double s_max, double count, double sum_w, Phi phi,
                                       const Regularizer& reg) {
  if (linear_term(phi)) {
    const double shift = reg.primal_grad(sum_w / count);
    return {s_min - shift, s_max - shift};
  }
  return {std::min(0.0, s_min), std::max(0.0, s_max)};
}

double pool_from_stats(const BlockStats& b, Phi phi, const Regularizer& reg) {
  const double lambda = reg.lambda();
  if (linear_term(phi)) {
    if (b.count == 1.0) return b.mean - reg.primal_grad(b.sum_w);
    if (reg.is_quadratic()) return b.mean - lambda * b.sum_w / b.count;
  } else if (reg.is_quadratic()) {
    return b.count * b.mean / (b.count + lambda * b.sum_w);
  }
  if (!reg.is_quartic()) {
    throw InvalidArgument("pool_from_stats: moment form only covers p = 2 and p = 4/3");
  }
  // q = 4: lambda^-3 sum (gamma - s_i)^3 + (W or gamma W) = 0, written in
  // t = gamma - mean: sum (t - d_i)^3 = m t^3 + 3 t M2 - M3.
  const double scale = 1.0 / (lambda * lambda * lambda);
  const bool lin = linear_term(phi);
  auto fdf = [&](double t) {
    const double cubic = b.count * t * t * t + 3.0 * t * b.m2 - b.m3;
    const double dcubic = 3.0 * b.count * t * t + 3.0 * b.m2;
    if (lin) return std::pair{scale * cubic + b.sum_w, scale * dcubic};
    return std::pair{scale * cubic + (b.mean + t) * b.sum_w, scale * dcubic + b.sum_w};
  };
  const auto [lo, hi] = root_bracket(b.s_min, b.s_max, b.count, b.sum_w, phi, reg);
  return b.mean + solve_increasing(fdf, lo - b.mean, hi - b.mean, 0.0);
}

double pool_general(std::span<const double> s, std::span<const double> w, Phi phi,
                    const Regularizer& reg) {
  double sum_w = 0.0;
  double mean = 0.0;
  double s_min = std::numeric_limits<double>::infinity();
  double s_max = -s_min;
  for (std::size_t i = 0; i < s.size(); ++i) {
    sum_w += w[i];
    mean += s[i];
    s_min = std::min(s_min, s[i]);
    s_max = std::max(s_max, s[i]);
  }
  mean /= static_cast<double>(s.size());
  const bool lin = linear_term(phi);
  auto fdf = [&](double g) {
    double f = 0.0;
    double df = 0.0;
    for (double si : s) {
      f += reg.pow_q1(g - si);
      df += reg.pow_q2(g - si);
    }
    const double scale = reg.conj_scale();
    f *= scale;
    df *= scale * (reg.q() - 1.0);
    if (lin) return std::pair{f + sum_w, df};
    return std::pair{f + g * sum_w, df + sum_w};
  };
  const auto [lo, hi] = root_bracket(s_min, s_max, static_cast<double>(s.size()), sum_w, phi, reg);
  return solve_increasing(fdf, lo, hi, mean);
}

void validate_block(std::span<const double> s, std::span<const double> w, Phi phi) {
  if (s.empty()) throw InvalidArgument("pool_subproblem: empty block");
  if (s.size() != w.size()) throw InvalidArgument("pool_subproblem: |s| and |w| differ");
  require_finite(s, "pool_subproblem");
  require_finite(w, "pool_subproblem");
  if (phi != Phi::identity) {
    for (double wi : w) {
      if (wi < 0.0) throw InvalidArgument("pool_subproblem: w must be >= 0 for this phi");
    }
  }
}

}  // namespace

void IsotonicProblem::validate() const {
  if (s.empty()) throw InvalidArgument("IsotonicProblem: empty");
  if (s.size() != w.size()) throw InvalidArgument("IsotonicProblem: |s| and |w| differ");
  require_finite(s, "IsotonicProblem.s");
  require_finite(w, "IsotonicProblem.w");
  if (phi != Phi::identity && std::any_of(w.begin(), w.end(), [](double v) { return v < 0.0; })) {
    throw InvalidArgument("IsotonicProblem: w must be >= 0 unless phi is identity");
  }
}

double isotonic_term(const IsotonicProblem& prob, std::size_t i, double v) {
  return prob.reg.conj(prob.s[i] - v) + prob.w[i] * phi_value(prob.phi, v);
}

double isotonic_objective(const IsotonicProblem& prob, std::span<const double> v) {
  if (v.size() != prob.s.size()) throw InvalidArgument("isotonic_objective: size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) total += isotonic_term(prob, i, v[i]);
  return total;
}

double pool_subproblem(std::span<const double> block_s, std::span<const double> block_w, Phi phi,
                       const Regularizer& reg) {
  validate_block(block_s, block_w, phi);
  if (reg.is_quadratic() || reg.is_quartic()) {
    BlockStats b = BlockStats::single(block_s[0], block_w[0]);
    for (std::size_t i = 1; i < block_s.size(); ++i) b.merge(BlockStats::single(block_s[i], block_w[i]));
    return pool_from_stats(b, phi, reg);
  }
  if (block_s.size() == 1 && linear_term(phi)) return block_s[0] - reg.primal_grad(block_w[0]);
  return pool_general(block_s, block_w, phi, reg);
}

IsotonicSolution pav_solve(const IsotonicProblem& prob) {
  prob.validate();
  const std::size_t n = prob.s.size();
  const bool moments = prob.reg.is_quadratic() || prob.reg.is_quartic();

  std::vector<Block> stack;
  std::vector<BlockStats> stats;
  stack.reserve(n);
  if (moments) stats.reserve(n);

  auto solve_block = [&](const Block& b, const BlockStats* st) {
    if (st != nullptr) return pool_from_stats(*st, prob.phi, prob.reg);
    const std::span<const double> s(prob.s.data() + b.begin, b.size());
    const std::span<const double> w(prob.w.data() + b.begin, b.size());
    if (b.size() == 1 && linear_term(prob.phi)) return s[0] - prob.reg.primal_grad(w[0]);
    return pool_general(s, w, prob.phi, prob.reg);
  };

  for (std::size_t i = 0; i < n; ++i) {
    Block blk{i, i + 1, 0.0, false};
    if (moments) {
      stats.push_back(BlockStats::single(prob.s[i], prob.w[i]));
      blk.gamma = solve_block(blk, &stats.back());
    } else {
      blk.gamma = solve_block(blk, nullptr);
    }
    stack.push_back(blk);
    while (stack.size() >= 2 &&
           stack[stack.size() - 2].gamma <= stack.back().gamma + kMergeTolerance) {
      Block right = stack.back();
      stack.pop_back();
      Block& left = stack.back();
      left.end = right.end;
      if (moments) {
        const BlockStats right_stats = stats.back();
        stats.pop_back();
        stats.back().merge(right_stats);
        left.gamma = solve_block(left, &stats.back());
      } else {
        left.gamma = solve_block(left, nullptr);
      }
    }
  }

  IsotonicSolution sol;
  sol.v.resize(n);
  for (const Block& b : stack) std::fill(sol.v.begin() + b.begin, sol.v.begin() + b.end, b.gamma);
  sol.blocks = std::move(stack);
  sol.iterations = 1;
  return sol;
}

IsotonicSolution recover_blocks(Vector v, double tol) {
  IsotonicSolution sol;
  const std::size_t n = v.size();
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i == n || std::abs(v[i] - v[i - 1]) >= tol) {
      double mean = 0.0;
      for (std::size_t j = begin; j < i; ++j) mean += v[j];
      mean /= static_cast<double>(i - begin);
      if (i - begin > 1) std::fill(v.begin() + begin, v.begin() + i, mean);
      sol.blocks.push_back({begin, i, mean, false});
      begin = i;
    }
  }
  sol.v = std::move(v);
  return sol;
}

void truncate_nonnegative(IsotonicSolution& sol) {
  auto first_negative = std::find_if(sol.blocks.begin(), sol.blocks.end(),
                                     [](const Block& b) { return b.gamma < 0.0; });
  if (first_negative == sol.blocks.end()) return;
  Block clamped{first_negative->begin, sol.blocks.back().end, 0.0, true};
  sol.blocks.erase(first_negative, sol.blocks.end());
  std::fill(sol.v.begin() + clamped.begin, sol.v.end(), 0.0);
  sol.blocks.push_back(clamped);
}

}  // namespace sparsetopk
