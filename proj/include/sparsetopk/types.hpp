#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sparsetopk {

using Vector = std::vector<double>;

/// Raised when an input violates a documented precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a solver is asked for a configuration it does not handle
/// (for example Dykstra with p != 2).
class UnsupportedConfiguration : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// A scalar root search that ran out of iterations. Carries the last bracket.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double lo, double hi)
      : std::runtime_error(what), lo_(lo), hi_(hi) {}
  double bracket_lo() const noexcept { return lo_; }
  double bracket_hi() const noexcept { return hi_; }

 private:
  double lo_;
  double hi_;
};

/// A permutation of {0, ..., n-1}. indices()[j] is the original position
/// that lands at sorted position j.
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::vector<std::size_t> indices);

  static Permutation identity(std::size_t n);

  std::size_t size() const noexcept { return idx_.size(); }
  std::size_t operator[](std::size_t j) const { return idx_[j]; }
  const std::vector<std::size_t>& indices() const noexcept { return idx_; }

  Permutation inverse() const;
  /// out[j] = values[indices[j]]
  Vector gather(std::span<const double> values) const;
  /// out[indices[j]] = values[j]
  Vector scatter(std::span<const double> values) const;

  bool operator==(const Permutation&) const = default;

 private:
  std::vector<std::size_t> idx_;
};

/// Throws InvalidArgument unless every entry is finite. `what` names the input.
void require_finite(std::span<const double> values, const char* what);

}  // namespace sparsetopk
