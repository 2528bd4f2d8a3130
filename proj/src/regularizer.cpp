#include "sparsetopk/regularizer.hpp"

#include <cmath>
#include <string>

#include "sparsetopk/types.hpp"

namespace sparsetopk {

Phi parse_phi(std::string_view name) {
  if (name == "identity") return Phi::identity;
  if (name == "half_square") return Phi::half_square;
  if (name == "absolute") return Phi::absolute;
  throw InvalidArgument("unknown phi '" + std::string(name) + "' (identity|half_square|absolute)");
}

std::string_view to_string(Phi phi) {
  switch (phi) {
    case Phi::identity:
      return "identity";
    case Phi::half_square:
      return "half_square";
    case Phi::absolute:
      return "absolute";
  }
  return "?";
}

double phi_value(Phi phi, double x) {
  switch (phi) {
    case Phi::identity:
      return x;
    case Phi::half_square:
      return 0.5 * x * x;
    case Phi::absolute:
      return std::abs(x);
  }
  return x;
}

Regularizer::Regularizer(double p, double lambda) : p_(p), lambda_(lambda) {
  if (!std::isfinite(p) || !(p > 1.0) || p > 2.0) {
    throw InvalidArgument("Regularizer: p must lie in (1, 2], got " + std::to_string(p));
  }
  if (!std::isfinite(lambda) || !(lambda > 0.0)) {
    throw InvalidArgument("Regularizer: lambda must be positive and finite");
  }
  if (p == 2.0) {
    kind_ = Kind::quadratic;
    q_ = 2.0;
    scale_ = 1.0 / lambda;
  } else if (std::abs(p - 4.0 / 3.0) < 1e-12) {
    kind_ = Kind::quartic;
    p_ = 4.0 / 3.0;
    q_ = 4.0;
    scale_ = 1.0 / (lambda * lambda * lambda);
  } else {
    kind_ = Kind::general;
    q_ = p / (p - 1.0);
    scale_ = std::pow(lambda, 1.0 - q_);
  }
}

double Regularizer::pow_q1(double t) const noexcept {
  switch (kind_) {
    case Kind::quadratic:
      return t;
    case Kind::quartic:
      return t * t * t;
    case Kind::general:
      break;
  }
  return std::copysign(std::pow(std::abs(t), q_ - 1.0), t);
}

double Regularizer::pow_q2(double t) const noexcept {
  switch (kind_) {
    case Kind::quadratic:
      return 1.0;
    case Kind::quartic:
      return t * t;
    case Kind::general:
      break;
  }
  return std::pow(std::abs(t), q_ - 2.0);
}

double Regularizer::conj(double t) const noexcept {
  switch (kind_) {
    case Kind::quadratic:
      return 0.5 * scale_ * t * t;
    case Kind::quartic: {
      const double t2 = t * t;
      return 0.25 * scale_ * t2 * t2;
    }
    case Kind::general:
      break;
  }
  return scale_ * std::pow(std::abs(t), q_) / q_;
}

double Regularizer::conj_grad(double t) const noexcept { return scale_ * pow_q1(t); }

double Regularizer::conj_hess(double t) const noexcept { return scale_ * (q_ - 1.0) * pow_q2(t); }

double Regularizer::primal_grad(double y) const noexcept {
  switch (kind_) {
    case Kind::quadratic:
      return lambda_ * y;
    case Kind::quartic:
      return lambda_ * std::cbrt(y);
    case Kind::general:
      break;
  }
  return lambda_ * std::copysign(std::pow(std::abs(y), p_ - 1.0), y);
}

}  // namespace sparsetopk
