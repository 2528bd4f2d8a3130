#include "sparsetopk/hard_ops.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <utility>

namespace sparsetopk {

Permutation::Permutation(std::vector<std::size_t> indices) : idx_(std::move(indices)) {
  std::vector<char> seen(idx_.size(), 0);
  for (std::size_t i : idx_) {
    if (i >= idx_.size() || seen[i]) throw InvalidArgument("Permutation: not a bijection");
    seen[i] = 1;
  }
}

Permutation Permutation::identity(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return Permutation(std::move(idx));
}

Permutation Permutation::inverse() const {
  std::vector<std::size_t> inv(idx_.size());
  for (std::size_t j = 0; j < idx_.size(); ++j) inv[idx_[j]] = j;
  Permutation out;
  out.idx_ = std::move(inv);
  return out;
}

Vector Permutation::gather(std::span<const double> values) const {
  if (values.size() != idx_.size()) throw InvalidArgument("Permutation::gather: size mismatch");
  Vector out(idx_.size());
  for (std::size_t j = 0; j < idx_.size(); ++j) out[j] = values[idx_[j]];
  return out;
}

Vector Permutation::scatter(std::span<const double> values) const {
  if (values.size() != idx_.size()) throw InvalidArgument("Permutation::scatter: size mismatch");
  Vector out(idx_.size());
  for (std::size_t j = 0; j < idx_.size(); ++j) out[idx_[j]] = values[j];
  return out;
}

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidArgument(std::string(what) + ": entries must be finite");
  }
}

namespace {

void require_nonempty(std::span<const double> x, const char* op) {
  if (x.empty()) throw InvalidArgument(std::string(op) + ": empty input");
  require_finite(x, op);
}

void require_k(std::size_t n, std::size_t k, const char* op) {
  if (k < 1 || k > n) {
    throw InvalidArgument(std::string(op) + ": k must satisfy 1 <= k <= n (k=" + std::to_string(k) +
                          ", n=" + std::to_string(n) + ")");
  }
}

// Sorts (key, index) pairs so the comparisons touch contiguous memory; the
// index tie-break reproduces a stable descending sort.
template <class Key>
Permutation descending_order(std::span<const double> x, Key key) {
  std::vector<std::pair<double, std::size_t>> items(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) items[i] = {key(x[i]), i};
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    return a.first > b.first || (a.first == b.first && a.second < b.second);
  });
  std::vector<std::size_t> idx(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) idx[j] = items[j].second;
  return Permutation(std::move(idx));
}

}  // namespace

Permutation argsort(std::span<const double> x) {
  require_nonempty(x, "argsort");
  return descending_order(x, [](double v) { return v; });
}

Permutation argsort_magnitude(std::span<const double> x) {
  require_nonempty(x, "argsort_magnitude");
  return descending_order(x, [](double v) { return std::abs(v); });
}

Vector sort_desc(std::span<const double> x) { return argsort(x).gather(x); }

Permutation rank(std::span<const double> x) { return argsort(x).inverse(); }

Vector ones_k(std::size_t n, std::size_t k) {
  Vector w(n, 0.0);
  std::fill_n(w.begin(), std::min(n, k), 1.0);
  return w;
}

Vector topkmask(std::span<const double> x, std::size_t k) {
  require_nonempty(x, "topkmask");
  require_k(x.size(), k, "topkmask");
  const Permutation sigma = argsort(x);
  Vector mask(x.size(), 0.0);
  for (std::size_t j = 0; j < k; ++j) mask[sigma[j]] = 1.0;
  return mask;
}

Vector topk(std::span<const double> x, std::size_t k) {
  const Vector mask = topkmask(x, k);
  Vector out(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (mask[i] != 0.0) out[i] = x[i];
  }
  return out;
}

Vector topkmag(std::span<const double> x, std::size_t k) {
  require_nonempty(x, "topkmag");
  require_k(x.size(), k, "topkmag");
  const Permutation sigma = argsort_magnitude(x);
  Vector out(x.size(), 0.0);
  for (std::size_t j = 0; j < k; ++j) out[sigma[j]] = x[sigma[j]];
  return out;
}

LmoResult lmo(std::span<const double> x, std::span<const double> w) {
  require_nonempty(x, "lmo");
  if (w.size() != x.size()) throw InvalidArgument("lmo: |x| and |w| differ");
  require_finite(w, "lmo");
  Vector ws(w.begin(), w.end());
  std::sort(ws.begin(), ws.end(), std::greater<>());
  const Permutation sigma = argsort(x);
  LmoResult res;
  res.argmax.assign(x.size(), 0.0);
  for (std::size_t j = 0; j < x.size(); ++j) {
    res.value += ws[j] * x[sigma[j]];
    res.argmax[sigma[j]] = ws[j];
  }
  return res;
}

}  // namespace sparsetopk
