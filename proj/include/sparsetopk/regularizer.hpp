#pragma once

#include <string_view>

namespace sparsetopk {

enum class Phi { identity, half_square, absolute };

Phi parse_phi(std::string_view name);
std::string_view to_string(Phi phi);

/// phi(x): x, x^2/2 or |x|.
double phi_value(Phi phi, double x);

/// R(y) = (lambda / p) * ||y||_p^p with 1 < p <= 2 and lambda > 0.
///
/// The solvers only ever touch the conjugate kernel
///   r*(t) = lambda^(1-q) |t|^q / q,   1/p + 1/q = 1,
/// and its first two derivatives. p = 2 and p = 4/3 (q = 4) are detected and
/// evaluated without pow().
class Regularizer {
 public:
  Regularizer(double p, double lambda);

  double p() const noexcept { return p_; }
  double q() const noexcept { return q_; }
  double lambda() const noexcept { return lambda_; }

  /// lambda^(1-q)
  double conj_scale() const noexcept { return scale_; }

  bool is_quadratic() const noexcept { return kind_ == Kind::quadratic; }
  bool is_quartic() const noexcept { return kind_ == Kind::quartic; }

  /// r*(t)
  double conj(double t) const noexcept;
  /// (r*)'(t) = lambda^(1-q) sign(t) |t|^(q-1); this is also nabla R*.
  double conj_grad(double t) const noexcept;
  /// (r*)''(t) = lambda^(1-q) (q-1) |t|^(q-2)
  double conj_hess(double t) const noexcept;
  /// r'(y) = lambda sign(y) |y|^(p-1), the inverse map of conj_grad.
  double primal_grad(double y) const noexcept;

  /// sign(t) |t|^(q-1), unscaled.
  double pow_q1(double t) const noexcept;
  /// |t|^(q-2), unscaled; 1 for q = 2.
  double pow_q2(double t) const noexcept;

 private:
  enum class Kind { quadratic, quartic, general };
  double p_;
  double q_;
  double lambda_;
  double scale_;  // lambda^(1-q)
  Kind kind_;
};

}  // namespace sparsetopk
