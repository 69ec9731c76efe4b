#pragma once

#include "hvinfer/types.hpp"

namespace hvinfer {

struct LassoOptions {
  int max_iter = 100000;  ///< cap on coordinate sweeps
  double tol = 1e-7;      ///< stop when max |change| < tol * (1 + |coef|_inf)
  Vector warm_start;      ///< empty for a cold start at zero
  Index exclude = -1;     ///< coordinate held at zero (node-wise fits); -1 for none
  /// When positive, replaces `tol`: stop once no coordinate move lowers the
  /// loss by more than this, i.e. max_k G_kk * change_k^2 < objective_tol
  /// (the glmnet rule, used for cross-validation paths).
  double objective_tol = 0.0;
};

struct LassoResult {
  Vector coef;
  bool converged = false;
  int sweeps = 0;
};

/// Coordinate descent on the quadratic form
///
///   coef' G coef - 2 c' coef + lambda * |coef|_1,
///
/// which is (1/n)|W^{1/2}(y - X coef)|^2 + lambda |coef|_1 up to a constant
/// when G = X'WX/n and c = X'Wy/n. The gradient c - G coef is cached and
/// updated per coordinate move. Coordinates whose diagonal entry of G
/// vanishes are pinned at zero.
LassoResult lasso_gram(const Matrix& gram, const Vector& corr, double lambda,
                       const LassoOptions& opts = {});

/// Plain lasso: minimizes (1/n)|y - X coef|^2 + lambda |coef|_1.
LassoResult lasso_cd(const Matrix& x, const Vector& y, double lambda,
                     const LassoOptions& opts = {});

/// Smallest lambda for which the plain lasso solution is identically zero,
/// i.e. 2 |X'y/n|_inf.
double lasso_lambda_max(const Matrix& x, const Vector& y);

/// Soft-threshold S(z, t) = sign(z) max(|z| - t, 0); |z| == t maps to 0.
inline double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

}  // namespace hvinfer
