#pragma once

#include <span>

#include "sparsetopk/types.hpp"

// Exact sorting-family operators and the permutahedron linear maximization
// oracle. Sorting is always descending; ties keep ascending original index.
namespace sparsetopk {

Permutation argsort(std::span<const double> x);
/// Sorts by |x| descending, same tie rule.
Permutation argsort_magnitude(std::span<const double> x);
Vector sort_desc(std::span<const double> x);
/// 0-based: the largest entry has rank 0.
Permutation rank(std::span<const double> x);

Vector topkmask(std::span<const double> x, std::size_t k);
Vector topk(std::span<const double> x, std::size_t k);
/// Keeps the k entries of largest |x|, with their signs.
Vector topkmag(std::span<const double> x, std::size_t k);

/// 1_k: k leading ones followed by n - k zeros.
Vector ones_k(std::size_t n, std::size_t k);

struct LmoResult {
  double value = 0.0;
  Vector argmax;
};

/// max over the permutahedron P(w) of <x, y>. w need not be sorted.
LmoResult lmo(std::span<const double> x, std::span<const double> w);

}  // namespace sparsetopk
