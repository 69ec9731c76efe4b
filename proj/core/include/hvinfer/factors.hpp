#pragma once

#include <optional>
#include <vector>

#include "hvinfer/types.hpp"

namespace hvinfer {

/// Thin SVD of residuals / sqrt(n m). Singular values descending; each right
/// singular vector is signed so that its largest-magnitude entry is
/// nonnegative (left vectors flipped to match).
struct ResidualSvd {
  Matrix u;  ///< n x r
  Vector d;  ///< r
  Matrix v;  ///< m x r
  Index n = 0;
  Index m = 0;

  /// Number of singular values above 1e-12 * d_1.
  Index numerical_rank() const;
};

ResidualSvd svd_scaled_residuals(const Matrix& residuals);

/// floor(min(n, m) / 2).
int default_k_bar(Index n, Index m);

/// Eigenvalue-ratio rule: argmax_{j <= k_bar} d_j / d_{j+1}, smallest index
/// on ties. A vanishing successor (d_{j+1} <= 1e-12 d_1) counts as an
/// infinite ratio, so the smallest such j wins.
int select_num_factors(const std::vector<double>& singular_values, int k_bar);

/// Hidden-factor estimate with loadings B (K x m) and factors W (n x K):
/// B' = sqrt(m) V_K D_K, W = sqrt(n) U_K. K = 0 is allowed and yields an
/// identity complement projector.
struct FactorEstimate {
  int k = 0;
  Matrix b_hat;     ///< K x m
  Matrix w_hat;     ///< n x K
  Vector d_k;       ///< leading K singular values of residuals / sqrt(nm)
  Matrix v_k;       ///< m x K
  Matrix p_b_perp;  ///< I_m - V_K V_K'
  Vector sigma2_e;  ///< per-response noise variance; empty until filled

  Index n() const noexcept { return w_hat.rows(); }
  Index m() const noexcept { return p_b_perp.rows(); }
};

/// Loadings, factors and projector from the leading k triplets. Throws
/// NumericalError when k exceeds the numerical rank.
FactorEstimate estimate_loadings_factors(const ResidualSvd& svd, int k);

/// n^{-1} |eps_j - W B_j|^2 for response j.
double noise_variance(const Matrix& residuals, const FactorEstimate& fe, Index j);

/// Fills fe.sigma2_e for every response.
void fill_noise_variances(FactorEstimate& fe, const Matrix& residuals);

/// SVD, K selection (unless `k` is given), loadings and all noise variances.
/// `k_bar` <= 0 selects default_k_bar.
FactorEstimate estimate_factors(const Matrix& residuals, std::optional<int> k, int k_bar = 0);

}  // namespace hvinfer
