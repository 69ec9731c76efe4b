#include "hvinfer/factors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hvinfer/error.hpp"

namespace hvinfer {

Index ResidualSvd::numerical_rank() const {
  if (d.size() == 0 || d[0] <= 0.0) return 0;
  const double cutoff = 1e-12 * d[0];
  Index r = 0;
  while (r < d.size() && d[r] > cutoff) ++r;
  return r;
}

ResidualSvd svd_scaled_residuals(const Matrix& residuals) {
  if (!residuals.allFinite()) throw NumericalError("residual matrix contains NaN/Inf");
  ResidualSvd out;
  out.n = residuals.rows();
  out.m = residuals.cols();
  const double scale = 1.0 / std::sqrt(static_cast<double>(out.n) * static_cast<double>(out.m));
  Eigen::BDCSVD<Matrix> svd(residuals * scale, Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.u = svd.matrixU();
  out.d = svd.singularValues();
  out.v = svd.matrixV();
  for (Index k = 0; k < out.v.cols(); ++k) {
    Index arg = 0;
    out.v.col(k).cwiseAbs().maxCoeff(&arg);
    if (out.v(arg, k) < 0.0) {
      out.v.col(k) *= -1.0;
      out.u.col(k) *= -1.0;
    }
  }
  return out;
}

int default_k_bar(Index n, Index m) { return static_cast<int>(std::min(n, m) / 2); }

int select_num_factors(const std::vector<double>& d, int k_bar) {
  if (k_bar < 1) throw ConfigError("k_bar must be at least 1");
  if (static_cast<int>(d.size()) < k_bar + 1)
    throw ConfigError("select_num_factors needs k_bar + 1 = " + std::to_string(k_bar + 1) +
                      " singular values, got " + std::to_string(d.size()));
  const double zero = 1e-12 * d[0];
  int best = 1;
  double best_ratio = -1.0;
  for (int j = 1; j <= k_bar; ++j) {
    const double next = d[static_cast<std::size_t>(j)];
    if (next <= zero) return j;
    const double ratio = d[static_cast<std::size_t>(j - 1)] / next;
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best = j;
    }
  }
  return best;
}

FactorEstimate estimate_loadings_factors(const ResidualSvd& svd, int k) {
  if (k < 0) throw ConfigError("number of factors must be nonnegative");
  const Index rank = svd.numerical_rank();
  if (k > rank)
    throw NumericalError("requested " + std::to_string(k) +
                         " factors but the residual matrix has numerical rank " +
                         std::to_string(rank));
  FactorEstimate fe;
  fe.k = k;
  fe.d_k = svd.d.head(k);
  fe.v_k = svd.v.leftCols(k);
  fe.b_hat = std::sqrt(static_cast<double>(svd.m)) * fe.d_k.asDiagonal() * fe.v_k.transpose();
  fe.w_hat = std::sqrt(static_cast<double>(svd.n)) * svd.u.leftCols(k);
  fe.p_b_perp = Matrix::Identity(svd.m, svd.m) - fe.v_k * fe.v_k.transpose();
  return fe;
}

double noise_variance(const Matrix& residuals, const FactorEstimate& fe, Index j) {
  if (j < 0 || j >= residuals.cols()) throw ConfigError("response index out of range");
  const Vector r = fe.k > 0 ? Vector(residuals.col(j) - fe.w_hat * fe.b_hat.col(j))
                            : Vector(residuals.col(j));
  return r.squaredNorm() / static_cast<double>(residuals.rows());
}

void fill_noise_variances(FactorEstimate& fe, const Matrix& residuals) {
  fe.sigma2_e.resize(residuals.cols());
  for (Index j = 0; j < residuals.cols(); ++j) fe.sigma2_e[j] = noise_variance(residuals, fe, j);
}

FactorEstimate estimate_factors(const Matrix& residuals, std::optional<int> k, int k_bar) {
  const ResidualSvd svd = svd_scaled_residuals(residuals);
  int chosen = 0;
  if (k) {
    chosen = *k;
  } else {
    const int bar = k_bar > 0 ? k_bar : std::max(1, default_k_bar(svd.n, svd.m));
    std::vector<double> d(svd.d.data(), svd.d.data() + svd.d.size());
    if (static_cast<int>(d.size()) < bar + 1) d.resize(static_cast<std::size_t>(bar + 1), 0.0);
    chosen = select_num_factors(d, bar);
  }
  FactorEstimate fe = estimate_loadings_factors(svd, chosen);
  fill_noise_variances(fe, residuals);
  return fe;
}

}  // namespace hvinfer
