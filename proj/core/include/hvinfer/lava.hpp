#pragma once

#include <vector>

#include "hvinfer/dataset.hpp"
#include "hvinfer/lasso.hpp"
#include "hvinfer/ridge.hpp"

namespace hvinfer {

/// Sparse-plus-dense fit of one response column:
///
///   min_{theta, delta} (1/n)|y - X(theta + delta)|^2 + lambda1 |theta|_1
///                      + lambda2 |delta|_2^2.
struct LavaColumnFit {
  Vector theta;   ///< sparse part
  Vector delta;   ///< dense (ridge) part
  Vector fitted;  ///< X theta + X delta
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  bool converged = true;
};

struct LavaTuning {
  double lambda1 = 0.0;
  double lambda2 = RidgeProjectors::kInfinity;
};

struct LavaFit {
  Matrix f_hat;      ///< p x m, column j = theta_j + delta_j
  Matrix residuals;  ///< n x m, Y - X f_hat
  std::vector<LavaColumnFit> column_fits;
};

/// Closed-form lava: theta solves the Q-weighted lasso
/// (1/n)(y - X theta)' Q (y - X theta) + lambda1 |theta|_1 and
/// delta = (X'X + n lambda2 I)^{-1} X'(y - X theta).
/// `proj` must have been built from `x`.
LavaColumnFit lava_fit_column(const Matrix& x, const Vector& y, double lambda1,
                              const RidgeProjectors& proj, const LassoOptions& opts = {});

/// Lava objective value at (theta, delta); the ridge term is dropped when
/// lambda2 is infinite (delta must then be zero).
double lava_objective(const Matrix& x, const Vector& y, const Vector& theta, const Vector& delta,
                      double lambda1, double lambda2);

/// Fits every response column. Projectors are built once per distinct
/// lambda2. Column failures are rethrown naming the column.
LavaFit lava_fit_all(const Dataset& data, const std::vector<LavaTuning>& tuning,
                     const LassoOptions& opts = {}, int threads = 1);

}  // namespace hvinfer
