#include <algorithm>
#include <random>

#include "helpers.hpp"
#include "sparsetopk/hard_ops.hpp"
#include "sparsetopk/isotonic.hpp"
#include "sparsetopk/root_finding.hpp"
#include "sparsetopk/testkit/oracles.hpp"

using namespace sparsetopk;
using sparsetopk::test::check_close;

namespace {

IsotonicProblem random_problem(std::mt19937_64& rng, std::size_t n, Phi phi, double p) {
  std::uniform_real_distribution<double> lam(0.05, 2.0);
  std::uniform_int_distribution<std::size_t> kdist(1, n);
  Vector s = test::normal_vector(rng, n, 2.0);
  if (phi != Phi::identity) s = test::abs_of(s);
  std::sort(s.begin(), s.end(), std::greater<>());
  Vector w;
  if (rng() % 2) {
    w = ones_k(n, kdist(rng));
  } else {
    w = test::abs_of(test::normal_vector(rng, n));
    std::sort(w.begin(), w.end(), std::greater<>());
  }
  return {s, w, phi, Regularizer(p, lam(rng))};
}

bool non_increasing(std::span<const double> v, double tol) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[i - 1] + tol) return false;
  }
  return true;
}

// d/dgamma sum_{i in B} h_i(gamma), identity or half_square.
double block_derivative(const IsotonicProblem& prob, const Block& b) {
  double d = 0.0;
  for (std::size_t i = b.begin; i < b.end; ++i) {
    const double dphi = prob.phi == Phi::half_square ? b.gamma : 1.0;
    d += -prob.reg.conj_grad(prob.s[i] - b.gamma) + prob.w[i] * dphi;
  }
  return d;
}

// The derivative changes sign across gamma within a relative 1e-10 window.
bool brackets_root(const IsotonicProblem& prob, const Block& b) {
  const double delta = 1e-10 * (1.0 + std::abs(b.gamma));
  const Block lo{b.begin, b.end, b.gamma - delta, false};
  const Block hi{b.begin, b.end, b.gamma + delta, false};
  return block_derivative(prob, lo) <= 0.0 && block_derivative(prob, hi) >= 0.0;
}

}  // namespace

TEST_CASE("Regularizer validation and kernels") {
  CHECK_THROWS_AS(Regularizer(1.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(Regularizer(2.5, 1.0), InvalidArgument);
  CHECK_THROWS_AS(Regularizer(2.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(Regularizer(2.0, -1.0), InvalidArgument);
  CHECK_THROWS_AS(Regularizer(2.0, NAN), InvalidArgument);

  const Regularizer quad(2.0, 0.5);
  CHECK(quad.is_quadratic());
  CHECK(quad.conj(3.0) == doctest::Approx(9.0 / (2.0 * 0.5)));
  CHECK(quad.conj_grad(3.0) == doctest::Approx(6.0));

  const Regularizer quart(4.0 / 3.0, 2.0);
  CHECK(quart.is_quartic());
  CHECK(quart.q() == 4.0);
  // r*(t) = lambda^(1-q) |t|^q / q
  CHECK(quart.conj(-1.5) == doctest::Approx(std::pow(2.0, -3.0) * std::pow(1.5, 4.0) / 4.0));
  CHECK(quart.conj_grad(-1.5) == doctest::Approx(-std::pow(2.0, -3.0) * std::pow(1.5, 3.0)));
  CHECK(quart.conj_hess(-1.5) == doctest::Approx(std::pow(2.0, -3.0) * 3.0 * 1.5 * 1.5));

  // conj_grad and primal_grad are inverse maps
  for (double p : {2.0, 4.0 / 3.0, 1.5, 1.1}) {
    const Regularizer r(p, 0.7);
    for (double t : {-2.0, -0.3, 0.0, 0.4, 5.0}) CHECK(r.primal_grad(r.conj_grad(t)) == doctest::Approx(t));
  }
}

TEST_CASE("phi parsing") {
  CHECK(parse_phi("identity") == Phi::identity);
  CHECK(parse_phi("half_square") == Phi::half_square);
  CHECK(parse_phi("absolute") == Phi::absolute);
  CHECK_THROWS_AS(parse_phi("cube"), InvalidArgument);
  CHECK(to_string(Phi::half_square) == "half_square");
  CHECK(phi_value(Phi::absolute, -2.0) == 2.0);
  CHECK(phi_value(Phi::half_square, -2.0) == 2.0);
}

TEST_CASE("pool_subproblem examples") {
  const Regularizer r(2.0, 1.0);
  CHECK(pool_subproblem(Vector{3, 1}, Vector{1, 1}, Phi::half_square, r) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(pool_subproblem(Vector{3, 1}, Vector{1, 0}, Phi::identity, r) == doctest::Approx(1.5).epsilon(1e-14));
  for (Phi phi : {Phi::identity, Phi::half_square, Phi::absolute}) {
    for (double p : {2.0, 4.0 / 3.0, 1.7}) {
      CHECK(pool_subproblem(Vector{2.25}, Vector{0}, phi, Regularizer(p, 0.3)) ==
            doctest::Approx(2.25).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(pool_subproblem(Vector{}, Vector{}, Phi::identity, r), InvalidArgument);
  CHECK_THROWS_AS(pool_subproblem(Vector{1}, Vector{1, 2}, Phi::identity, r), InvalidArgument);
  CHECK_THROWS_AS(pool_subproblem(Vector{1}, Vector{-1}, Phi::half_square, r), InvalidArgument);
}

TEST_CASE("pool_subproblem matches the scalar oracle for every p") {
  std::mt19937_64 rng(4);
  for (Phi phi : {Phi::identity, Phi::half_square}) {
    for (double p : {2.0, 4.0 / 3.0, 1.5, 1.2}) {
      for (int t = 0; t < 40; ++t) {
        const std::size_t m = 1 + rng() % 6;
        IsotonicProblem prob = random_problem(rng, m, phi, p);
        // a single block: the oracle restricted to the all-pooled partition
        const double gamma = pool_subproblem(prob.s, prob.w, phi, prob.reg);
        CAPTURE(p);
        CHECK(brackets_root(prob, Block{0, m, gamma, false}));
      }
    }
  }
}

TEST_CASE("pav_solve examples") {
  IsotonicProblem sep{{3, 1, 0, -1}, {1, 1, 0, 0}, Phi::identity, Regularizer(2.0, 0.1)};
  IsotonicSolution sol = pav_solve(sep);
  check_close(sol.v, Vector{2.9, 0.9, 0, -1}, 1e-15);
  CHECK(sol.blocks.size() == 4);

  // s_i / (1 + lambda w_i) = (1.5, 1, 1): the values are as stated; with the
  // non-strict merge rule the tied pair forms one block of value 1.
  IsotonicProblem tie{{3, 2, 1}, {1, 1, 0}, Phi::half_square, Regularizer(2.0, 1.0)};
  sol = pav_solve(tie);
  check_close(sol.v, Vector{1.5, 1, 1}, 1e-15);
  REQUIRE(sol.blocks.size() == 2);
  CHECK(sol.blocks[0].size() == 1);
  CHECK(sol.blocks[1].gamma == doctest::Approx(1.0));

  for (double c : {-2.0, 0.0, 0.5}) {
    IsotonicProblem flat{Vector(5, 1.0), Vector(5, c), Phi::identity, Regularizer(2.0, 0.4)};
    sol = pav_solve(flat);
    for (double v : sol.v) CHECK(v == doctest::Approx(1.0 - 0.4 * c));
  }
}

TEST_CASE("pav_solve matches the exhaustive oracle") {
  std::mt19937_64 rng(7);
  for (Phi phi : {Phi::identity, Phi::half_square}) {
    for (double p : {2.0, 4.0 / 3.0, 1.5}) {
      for (int t = 0; t < 40; ++t) {
        const std::size_t n = 1 + rng() % 9;
        const IsotonicProblem prob = random_problem(rng, n, phi, p);
        const IsotonicSolution got = pav_solve(prob);
        const IsotonicSolution want = testkit::brute_isotonic(prob);
        CAPTURE(p);
        CAPTURE(n);
        CHECK(std::abs(isotonic_objective(prob, got.v) - testkit::brute_objective(prob, want.v)) <= 1e-8);
        CHECK(test::max_abs_diff(got.v, want.v) <= 1e-6);
      }
    }
  }
}

TEST_CASE("absolute phi: identity form plus truncation is the non-negative cone optimum") {
  std::mt19937_64 rng(8);
  for (double p : {2.0, 4.0 / 3.0}) {
    for (int t = 0; t < 60; ++t) {
      const std::size_t n = 1 + rng() % 9;
      const IsotonicProblem prob = random_problem(rng, n, Phi::absolute, p);
      IsotonicSolution got = pav_solve(prob);
      truncate_nonnegative(got);
      const IsotonicSolution want = testkit::brute_isotonic(prob, true);
      CHECK(test::max_abs_diff(got.v, want.v) <= 1e-6);
      for (double v : got.v) CHECK(v >= 0.0);
    }
  }
}

TEST_CASE("half_square: truncation agrees with the non-negative cone optimum") {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 60; ++t) {
    const std::size_t n = 1 + rng() % 9;
    const IsotonicProblem prob = random_problem(rng, n, Phi::half_square, 4.0 / 3.0);
    IsotonicSolution got = pav_solve(prob);
    truncate_nonnegative(got);
    check_close(got.v, testkit::brute_isotonic(prob, true).v, 1e-6);
  }
}

TEST_CASE("PAV solution invariants") {
  std::mt19937_64 rng(13);
  for (Phi phi : {Phi::identity, Phi::half_square}) {
    for (double p : {2.0, 4.0 / 3.0, 1.5}) {
      for (int t = 0; t < 30; ++t) {
        const IsotonicProblem prob = random_problem(rng, 50, phi, p);
        const IsotonicSolution sol = pav_solve(prob);
        CHECK(non_increasing(sol.v, 0.0));
        std::size_t cursor = 0;
        for (std::size_t b = 0; b < sol.blocks.size(); ++b) {
          const Block& blk = sol.blocks[b];
          CHECK(blk.begin == cursor);
          cursor = blk.end;
          for (std::size_t i = blk.begin; i < blk.end; ++i) CHECK(sol.v[i] == blk.gamma);
          if (b > 0) CHECK(sol.blocks[b - 1].gamma > blk.gamma - kMergeTolerance);
          const double scale = 1.0 + std::abs(blk.gamma) + prob.w[blk.begin];
          CHECK(std::abs(block_derivative(prob, blk)) <= 1e-8 * scale * static_cast<double>(blk.size()));
        }
        CHECK(cursor == prob.s.size());
      }
    }
  }
}

TEST_CASE("translation covariance for identity, p = 2") {
  std::mt19937_64 rng(14);
  for (int t = 0; t < 30; ++t) {
    IsotonicProblem prob = random_problem(rng, 20, Phi::identity, 2.0);
    const IsotonicSolution base = pav_solve(prob);
    for (double& s : prob.s) s += 3.25;
    const IsotonicSolution moved = pav_solve(prob);
    for (std::size_t i = 0; i < base.v.size(); ++i) CHECK(moved.v[i] == doctest::Approx(base.v[i] + 3.25));
  }
}

TEST_CASE("validate rejects malformed problems") {
  const Regularizer r(2.0, 1.0);
  CHECK_THROWS_AS(pav_solve(IsotonicProblem{{}, {}, Phi::identity, r}), InvalidArgument);
  CHECK_THROWS_AS(pav_solve(IsotonicProblem{{1, 0}, {1}, Phi::identity, r}), InvalidArgument);
  CHECK_THROWS_AS(pav_solve(IsotonicProblem{{1, NAN}, {1, 0}, Phi::identity, r}), InvalidArgument);
  CHECK_THROWS_AS(pav_solve(IsotonicProblem{{1, 0}, {1, -1}, Phi::half_square, r}), InvalidArgument);
  // negative weights are fine for the identity
  CHECK_NOTHROW(pav_solve(IsotonicProblem{{1, 0}, {1, -1}, Phi::identity, r}));
}

TEST_CASE("safeguarded root finding") {
  auto cube = [](double x) { return std::pair{x * x * x - 2.0, 3.0 * x * x}; };
  CHECK(solve_increasing(cube, 0.0, 10.0, 5.0) == doctest::Approx(std::cbrt(2.0)).epsilon(1e-12));
  // a starting point with zero slope falls back to bisection
  CHECK(solve_increasing(cube, -1.0, 10.0, 0.0) == doctest::Approx(std::cbrt(2.0)).epsilon(1e-12));
  try {
    solve_increasing(cube, 0.0, 1e6, 1e6, RootOptions{1e-15, 2});
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(e.bracket_lo() <= std::cbrt(2.0));
    CHECK(e.bracket_hi() >= std::cbrt(2.0));
  }
}

TEST_CASE("dykstra_solve") {
  // one violated pair is averaged
  IsotonicProblem pair{{1, 2}, {0, 0}, Phi::identity, Regularizer(2.0, 1.0)};
  check_close(dykstra_solve(pair, 1), Vector{1.5, 1.5}, 1e-15);

  IsotonicProblem sep{{3, 1, 0, -1}, {1, 1, 0, 0}, Phi::identity, Regularizer(2.0, 0.1)};
  check_close(dykstra_solve(sep, 100), Vector{2.9, 0.9, 0, -1}, 1e-12);
  // already feasible: fixed after one iteration
  check_close(dykstra_solve(sep, 1), Vector{2.9, 0.9, 0, -1}, 1e-12);
  // zero iterations returns the unconstrained minimizer
  check_close(dykstra_solve(pair, 0), Vector{1, 2}, 0.0);

  IsotonicProblem quart{{3, 1}, {1, 0}, Phi::identity, Regularizer(4.0 / 3.0, 1.0)};
  CHECK_THROWS_AS(dykstra_solve(quart, 10), UnsupportedConfiguration);

  std::mt19937_64 rng(15);
  for (Phi phi : {Phi::identity, Phi::half_square}) {
    for (int t = 0; t < 30; ++t) {
      const IsotonicProblem prob = random_problem(rng, 8, phi, 2.0);
      check_close(dykstra_solve(prob, 5000), pav_solve(prob).v, 1e-8);
    }
  }
}

TEST_CASE("dual_bca_solve") {
  IsotonicProblem pair{{0, 1}, {0, 0}, Phi::identity, Regularizer(2.0, 1.0)};
  IsotonicSolution sol = dual_bca_solve(pair);
  check_close(sol.v, Vector{0.5, 0.5}, 1e-9);
  CHECK(sol.converged);
  CHECK(sol.blocks.size() == 1);

  IsotonicProblem sep{{3, 1, 0, -1}, {1, 1, 0, 0}, Phi::identity, Regularizer(4.0 / 3.0, 0.5)};
  check_close(dual_bca_solve(sep).v, pav_solve(sep).v, 1e-5);

  // inactive constraints: unconstrained solution
  IsotonicProblem free{{3, 1, 0, -1}, {1, 1, 0, 0}, Phi::identity, Regularizer(2.0, 0.1)};
  check_close(dual_bca_solve(free).v, Vector{2.9, 0.9, 0, -1}, 1e-12);

  std::mt19937_64 rng(16);
  for (Phi phi : {Phi::identity, Phi::half_square}) {
    for (double p : {2.0, 4.0 / 3.0, 1.5}) {
      for (int t = 0; t < 20; ++t) {
        const IsotonicProblem prob = random_problem(rng, 12, phi, p);
        sol = dual_bca_solve(prob, {1e-12});
        CHECK(sol.converged);
        CHECK(non_increasing(sol.v, 1e-9));
        check_close(sol.v, pav_solve(prob).v, 1e-6);
      }
    }
  }
}

TEST_CASE("dual_bca_solve reports exhaustion") {
  Vector s(40);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<double>(i);  // fully reversed
  IsotonicProblem prob{s, Vector(40, 0.0), Phi::identity, Regularizer(2.0, 1.0)};
  const IsotonicSolution sol = dual_bca_solve(prob, {1e-12, 3});
  CHECK_FALSE(sol.converged);
  CHECK(sol.iterations == 3);
}

TEST_CASE("recover_blocks and truncate_nonnegative") {
  IsotonicSolution sol = recover_blocks(Vector{2.0, 1.0 + 1e-12, 1.0, -0.5, -0.5 - 1e-13, -2.0}, 1e-9);
  REQUIRE(sol.blocks.size() == 4);
  CHECK(sol.blocks[1].size() == 2);
  CHECK(sol.v[1] == sol.v[2]);

  truncate_nonnegative(sol);
  REQUIRE(sol.blocks.size() == 3);
  CHECK(sol.blocks.back().clamped);
  CHECK(sol.blocks.back().begin == 3);
  CHECK(sol.blocks.back().size() == 3);
  check_close(std::span<const double>(sol.v).subspan(3), Vector{0, 0, 0}, 0.0);

  IsotonicSolution pos = recover_blocks(Vector{3.0, 1.0}, 1e-9);
  truncate_nonnegative(pos);
  CHECK(pos.blocks.size() == 2);
  CHECK_FALSE(pos.blocks.back().clamped);
}
