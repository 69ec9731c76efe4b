#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "hvinfer/dataset.hpp"
#include "hvinfer/lasso.hpp"
#include "hvinfer/lava.hpp"
#include "hvinfer/ridge.hpp"

namespace hvinfer {

/// Deterministic shuffled K-fold partition of n samples.
struct CvPlan {
  int num_folds = 5;
  std::uint64_t seed = 0;
  std::vector<int> fold_assignment;  ///< length n, labels in [0, num_folds)

  std::vector<Index> train_rows(int fold) const;
  std::vector<Index> test_rows(int fold) const;
};

/// Balanced labels (sizes differ by at most one) permuted by a seeded
/// Fisher-Yates shuffle. Throws ConfigError when num_folds > n or < 2.
CvPlan kfold_indices(Index n, int num_folds, std::uint64_t seed);

/// c0 * sqrt(max_k M_kk(lambda2)) * (sqrt(m/n) + sqrt(2 log p / n)) with
/// M = X'Q^2X/n taken from the projectors.
double lambda1_pilot(const RidgeProjectors& proj, Index m, double c0);
double lambda1_pilot(const Matrix& x, double lambda2, Index m, double c0);

struct CvCurvePoint {
  double candidate = 0.0;
  double mean_error = 0.0;
  double se_error = 0.0;
  bool failed = false;
};

struct CvResult {
  double best = 0.0;
  std::size_t best_index = 0;
  std::vector<CvCurvePoint> curve;
};

/// Held-out mean squared errors for every grid candidate on one fold, in grid
/// order. NaN marks a failed candidate; a thrown exception fails the whole
/// fold.
using FoldObjective = std::function<std::vector<double>(
    int fold, const std::vector<Index>& train, const std::vector<Index>& test)>;

/// Picks the candidate with the smallest mean held-out error. Equal errors go
/// to the larger candidate (heavier penalty). Candidates failing on any fold
/// are excluded; if all fail, ConfigError lists the failures.
CvResult cv_select(const FoldObjective& objective, const std::vector<double>& grid,
                   const CvPlan& plan);

/// Decreasing log-spaced path from lambda_max down to ratio * lambda_max,
/// ratio 1e-3 when n > p and 1e-2 otherwise.
std::vector<double> lasso_lambda_grid(double lambda_max, Index n, Index p, int length = 25);

/// Path grid for the node-wise lasso of feature i, starting at the smallest
/// penalty that zeroes every coefficient, 2 max_{k != i} |Sigma_ki|.
std::vector<double> nodewise_lambda_grid(const Matrix& sigma_hat, Index i, Index n,
                                         int length = 25);

/// Per-fold train/test splits of a design with cached training Gram matrices
/// X_tr'X_tr / n_tr, shared by every lasso CV on that design.
class FoldDesigns {
 public:
  FoldDesigns(const Matrix& x, const CvPlan& plan);

  const CvPlan& plan() const noexcept { return plan_; }
  const Matrix& x_train(int f) const { return x_train_[static_cast<std::size_t>(f)]; }
  const Matrix& x_test(int f) const { return x_test_[static_cast<std::size_t>(f)]; }
  const Matrix& gram_train(int f) const { return gram_[static_cast<std::size_t>(f)]; }

 private:
  CvPlan plan_;
  std::vector<Matrix> x_train_;
  std::vector<Matrix> x_test_;
  std::vector<Matrix> gram_;
};

/// Rows of `v` selected by `rows`.
Vector take_rows(const Vector& v, const std::vector<Index>& rows);
Matrix take_rows(const Matrix& m, const std::vector<Index>& rows);

/// K-fold CV of the plain lasso of y on X over a path grid (warm-started
/// along the path).
CvResult cv_lasso(const FoldDesigns& folds, const Vector& y, const std::vector<double>& grid,
                  const LassoOptions& opts = {});

/// K-fold CV of the node-wise lasso of column i on the remaining columns.
CvResult cv_nodewise(const FoldDesigns& folds, Index i, const std::vector<double>& grid,
                     const LassoOptions& opts = {});

/// {0.01, 0.1, 1, 10, 100, inf} * s^2 / n with s the median positive singular
/// value of X. Finite candidates whose ridge smoother has tr(P^2) > n / 2 are
/// dropped: a near-interpolating fit leaves no residual to estimate factors from.
std::vector<double> default_lambda2_grid(const Matrix& x);

struct LavaCvOptions {
  std::vector<double> lambda2_grid;         ///< empty: default_lambda2_grid
  std::vector<double> lambda1_multipliers;  ///< empty: 15 log-spaced in [0.02, 2]
  double c0 = 1.0;
  LassoOptions lasso;
  int threads = 1;
};

struct LavaCvColumn {
  LavaTuning tuning;
  CvResult lambda2_cv;  ///< lambda2 grid, each at its pilot lambda1
  CvResult lambda1_cv;  ///< lambda1 grid at the selected lambda2
};

/// Two-stage per-column tuning: lambda2 by CV with lambda1 tied to the pilot
/// formula, then lambda1 by CV on a grid of pilot multiples at the chosen
/// lambda2. Fold projectors are shared across columns.
std::vector<LavaCvColumn> tune_lava_cv(const Dataset& data, const CvPlan& plan,
                                       const LavaCvOptions& opts = {});

/// Non-CV default: lambda2 = s^2/n (median singular value s), lambda1 =
/// pilot(lambda2) for every column.
std::vector<LavaTuning> default_lava_tuning(const Dataset& data, double c0 = 1.0);

}  // namespace hvinfer
