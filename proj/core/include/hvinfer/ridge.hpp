#pragma once

#include <limits>

#include "hvinfer/types.hpp"

namespace hvinfer {

/// Ridge smoother P = X (X'X + n*lambda2*I)^{-1} X' and its complement
/// Q = I - P, built from one thin SVD of X.
///
/// On a retained left singular direction with singular value s, P has
/// eigenvalue s^2 / (s^2 + n*lambda2); Q is the identity off col(X).
/// lambda2 = 0 uses the pseudo-inverse (P projects onto col(X)) and
/// lambda2 = +inf gives P = 0, Q = I. Singular values below 1e-10 * s_max
/// are treated as zero. The p x p matrix X'QX/n is cached so Q-weighted
/// lasso fits never touch an n x n matrix.
class RidgeProjectors {
 public:
  static constexpr double kInfinity = std::numeric_limits<double>::infinity();

  RidgeProjectors(const Matrix& x, double lambda2);

  double lambda2() const noexcept { return lambda2_; }
  bool infinite() const noexcept { return lambda2_ == kInfinity; }
  Index n() const noexcept { return u_.rows(); }
  Index p() const noexcept { return v_.rows(); }
  Index rank() const noexcept { return s_.size(); }

  const Matrix& p_mat() const noexcept { return p_mat_; }
  const Matrix& q_mat() const noexcept { return q_mat_; }
  /// Diagonal of n^{-1} X' Q^2 X.
  const Vector& m_diag() const noexcept { return m_diag_; }

  const Matrix& u() const noexcept { return u_; }
  const Vector& singular_values() const noexcept { return s_; }
  const Matrix& v() const noexcept { return v_; }
  /// Eigenvalue of P on each retained singular direction.
  const Vector& p_eigen() const noexcept { return p_eig_; }

  /// X'QX / n.
  const Matrix& weighted_gram() const noexcept { return gram_q_; }
  /// X'Qy / n.
  Vector weighted_corr(const Vector& y) const;
  /// (X'X + n*lambda2*I)^{-1} X' r (pseudo-inverse when lambda2 = 0).
  Vector ridge_solve(const Vector& r) const;

 private:
  double lambda2_;
  Matrix u_;
  Vector s_;
  Matrix v_;
  Vector p_eig_;
  Matrix p_mat_;
  Matrix q_mat_;
  Vector m_diag_;
  Matrix gram_q_;
};

}  // namespace hvinfer
