#include "hvinfer/ridge.hpp"

#include <cmath>

#include "hvinfer/error.hpp"

namespace hvinfer {

RidgeProjectors::RidgeProjectors(const Matrix& x, double lambda2) : lambda2_(lambda2) {
  if (!(lambda2 >= 0.0)) throw ConfigError("lambda2 must be nonnegative");
  if (!x.allFinite()) throw NumericalError("ridge projectors: X contains NaN/Inf");
  const Index n = x.rows();
  const double nd = static_cast<double>(n);

  Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  Index rank = 0;
  const double cutoff = sv.size() > 0 ? 1e-10 * sv[0] : 0.0;
  while (rank < sv.size() && sv[rank] > cutoff) ++rank;
  u_ = svd.matrixU().leftCols(rank);
  v_ = svd.matrixV().leftCols(rank);
  s_ = sv.head(rank);

  p_eig_.resize(rank);
  for (Index r = 0; r < rank; ++r) {
    const double s2 = s_[r] * s_[r];
    if (infinite())
      p_eig_[r] = 0.0;
    else if (lambda2 == 0.0)
      p_eig_[r] = 1.0;
    else
      p_eig_[r] = s2 / (s2 + nd * lambda2);
  }
  const Vector q_eig = Vector::Ones(rank) - p_eig_;

  p_mat_ = u_ * p_eig_.asDiagonal() * u_.transpose();
  q_mat_ = Matrix::Identity(n, n) - p_mat_;

  // X'QX/n = V diag(s^2 q) V' / n ;  X'Q^2X/n = V diag(s^2 q^2) V' / n.
  const Vector s2q = s_.cwiseProduct(s_).cwiseProduct(q_eig) / nd;
  gram_q_ = v_ * s2q.asDiagonal() * v_.transpose();
  const Vector s2q2 = s2q.cwiseProduct(q_eig);
  m_diag_ = v_.cwiseAbs2() * s2q2;
}

Vector RidgeProjectors::weighted_corr(const Vector& y) const {
  const Vector coeff = s_.cwiseProduct(Vector::Ones(rank()) - p_eig_).cwiseProduct(u_.transpose() * y);
  return v_ * coeff / static_cast<double>(n());
}

Vector RidgeProjectors::ridge_solve(const Vector& r) const {
  if (infinite()) return Vector::Zero(p());
  const double nl = static_cast<double>(n()) * lambda2_;
  Vector scale(rank());
  for (Index k = 0; k < rank(); ++k) scale[k] = s_[k] / (s_[k] * s_[k] + nl);
  return v_ * scale.cwiseProduct(u_.transpose() * r);
}

}  // namespace hvinfer
