#include <algorithm>

#include "sparsetopk/isotonic.hpp"

namespace sparsetopk {

namespace {

// Weighted projection of the pairs (i, i+1), i = first, first + 2, ... onto
// {z_i >= z_{i+1}}. Pairs are disjoint, so each pass is data-parallel.
void project_pairs(const Vector& in, const Vector& weight, std::size_t first, Vector& out) {
  out = in;
  const std::size_t n = in.size();
  for (std::size_t i = first; i + 1 < n; i += 2) {
    if (in[i] < in[i + 1]) {
      const double avg = (weight[i] * in[i] + weight[i + 1] * in[i + 1]) / (weight[i] + weight[i + 1]);
      out[i] = avg;
      out[i + 1] = avg;
    }
  }
}

}  // namespace

Vector dykstra_solve(const IsotonicProblem& prob, std::size_t iterations) {
  prob.validate();
  if (!prob.reg.is_quadratic()) {
    throw UnsupportedConfiguration("dykstra_solve requires p = 2; use dual_bca_solve for other p");
  }
  const std::size_t n = prob.s.size();
  const double lambda = prob.reg.lambda();

  // With p = 2, sum_i h_i(v_i) = sum_i c_i/2 (v_i - a_i)^2 + const, so the
  // isotonic problem is a weighted projection of a onto C1 ∩ C2.
  Vector target(n);
  Vector weight(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (prob.phi == Phi::half_square) {
      const double c = 1.0 + lambda * prob.w[i];
      target[i] = prob.s[i] / c;
      weight[i] = c / lambda;
    } else {
      target[i] = prob.s[i] - lambda * prob.w[i];
      weight[i] = 1.0;
    }
  }

  Vector v = target;
  Vector p(n, 0.0);
  Vector q(n, 0.0);
  Vector y(n);
  Vector buf(n);
  for (std::size_t it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) buf[i] = v[i] + p[i];
    project_pairs(buf, weight, 0, y);
    for (std::size_t i = 0; i < n; ++i) p[i] = buf[i] - y[i];

    for (std::size_t i = 0; i < n; ++i) buf[i] = y[i] + q[i];
    project_pairs(buf, weight, 1, v);
    for (std::size_t i = 0; i < n; ++i) q[i] = buf[i] - v[i];
  }
  return v;
}

}  // namespace sparsetopk
