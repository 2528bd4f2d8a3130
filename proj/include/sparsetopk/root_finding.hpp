#pragma once

#include <cmath>
#include <utility>

#include "sparsetopk/types.hpp"

namespace sparsetopk {

struct RootOptions {
  double tol = 1e-15;  // relative Newton-step / bracket-width tolerance, a few ulps
  int max_iter = 200;
};

/// Root of a nondecreasing function on a bracket [lo, hi] with f(lo) <= 0 <= f(hi).
///
/// `fdf(x)` returns {f(x), f'(x)}. Newton steps are taken from `x0` and replaced
/// by bisection whenever they leave the current bracket or the derivative is
/// unusable (zero, infinite, NaN). Throws NumericError carrying the last bracket
/// if `max_iter` is exhausted.
template <class FDF>
double solve_increasing(FDF&& fdf, double lo, double hi, double x0, RootOptions opt = {}) {
  if (lo > hi) std::swap(lo, hi);
  double x = (x0 >= lo && x0 <= hi) ? x0 : 0.5 * (lo + hi);
  for (int it = 0; it < opt.max_iter; ++it) {
    const auto [f, df] = fdf(x);
    if (f == 0.0) return x;
    if (f < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double scale = 1.0 + std::abs(x);
    if (hi - lo <= opt.tol * scale) return 0.5 * (lo + hi);
    double next = x - f / df;
    if (!(df > 0.0) || !std::isfinite(next) || next <= lo || next >= hi) {
      next = 0.5 * (lo + hi);
    }
    const double step = next - x;
    x = next;
    if (std::abs(step) <= opt.tol * scale) {
      // quadratic convergence: the remaining error is far below tol
      return x;
    }
  }
  throw NumericError("root search did not converge", lo, hi);
}

}  // namespace sparsetopk
