#include "hvinfer/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "hvinfer/error.hpp"
#include "hvinfer/parallel.hpp"
#include "hvinfer/random.hpp"

namespace hvinfer {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_squared(const Vector& r) { return r.squaredNorm() / static_cast<double>(r.size()); }

// Path fits inside CV stop on the glmnet rule: no coordinate move may lower
// the loss by more than 1e-7 times the null loss of the training response.
LassoOptions path_options(const LassoOptions& base, double null_loss) {
  LassoOptions opts = base;
  if (opts.objective_tol <= 0.0) opts.objective_tol = 1e-7 * std::max(null_loss, 1e-300);
  return opts;
}

// Warm-started path of Gram-form lasso fits; returns held-out MSE per grid
// value. `target_test` is compared with x_test * coef.
std::vector<double> path_errors(const Matrix& gram, const Vector& corr, const Matrix& x_test,
                                const Vector& target_test, const std::vector<double>& grid,
                                LassoOptions opts) {
  std::vector<double> errors(grid.size(), kNaN);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const LassoResult fit = lasso_gram(gram, corr, grid[g], opts);
    errors[g] = mean_squared(target_test - x_test * fit.coef);
    opts.warm_start = fit.coef;
  }
  return errors;
}

}  // namespace

std::vector<Index> CvPlan::train_rows(int fold) const {
  std::vector<Index> rows;
  for (std::size_t i = 0; i < fold_assignment.size(); ++i)
    if (fold_assignment[i] != fold) rows.push_back(static_cast<Index>(i));
  return rows;
}

std::vector<Index> CvPlan::test_rows(int fold) const {
  std::vector<Index> rows;
  for (std::size_t i = 0; i < fold_assignment.size(); ++i)
    if (fold_assignment[i] == fold) rows.push_back(static_cast<Index>(i));
  return rows;
}

CvPlan kfold_indices(Index n, int num_folds, std::uint64_t seed) {
  if (num_folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
  if (num_folds > n)
    throw ConfigError("cannot split " + std::to_string(n) + " samples into " +
                      std::to_string(num_folds) + " folds");
  CvPlan plan;
  plan.num_folds = num_folds;
  plan.seed = seed;
  plan.fold_assignment.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    plan.fold_assignment[static_cast<std::size_t>(i)] = static_cast<int>(i % num_folds);
  CounterRng rng(derive_seed(seed, 0x6b666f6c64ULL));
  for (std::size_t i = plan.fold_assignment.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(plan.fold_assignment[i - 1], plan.fold_assignment[j]);
  }
  return plan;
}

double lambda1_pilot(const RidgeProjectors& proj, Index m, double c0) {
  const double n = static_cast<double>(proj.n());
  const double p = static_cast<double>(proj.p());
  const double max_m = proj.m_diag().size() ? proj.m_diag().maxCoeff() : 0.0;
  return c0 * std::sqrt(std::max(0.0, max_m)) *
         (std::sqrt(static_cast<double>(m) / n) + std::sqrt(2.0 * std::log(p) / n));
}

double lambda1_pilot(const Matrix& x, double lambda2, Index m, double c0) {
  return lambda1_pilot(RidgeProjectors(x, lambda2), m, c0);
}

CvResult cv_select(const FoldObjective& objective, const std::vector<double>& grid,
                   const CvPlan& plan) {
  if (grid.empty()) throw ConfigError("cross-validation grid is empty");
  const std::size_t g = grid.size();
  const int k = plan.num_folds;
  std::vector<std::vector<double>> errors(static_cast<std::size_t>(k));
  std::vector<std::string> fold_failures;
  for (int f = 0; f < k; ++f) {
    auto& row = errors[static_cast<std::size_t>(f)];
    try {
      row = objective(f, plan.train_rows(f), plan.test_rows(f));
      if (row.size() != g) throw ConfigError("objective returned a wrong-length error vector");
    } catch (const std::exception& e) {
      row.assign(g, kNaN);
      fold_failures.push_back("fold " + std::to_string(f + 1) + ": " + e.what());
    }
  }

  CvResult result;
  result.curve.resize(g);
  bool found = false;
  for (std::size_t c = 0; c < g; ++c) {
    auto& pt = result.curve[c];
    pt.candidate = grid[c];
    double sum = 0.0;
    for (int f = 0; f < k; ++f) {
      const double e = errors[static_cast<std::size_t>(f)][c];
      if (!std::isfinite(e)) pt.failed = true;
      sum += e;
    }
    if (pt.failed) {
      pt.mean_error = kNaN;
      pt.se_error = kNaN;
      continue;
    }
    pt.mean_error = sum / k;
    double ss = 0.0;
    for (int f = 0; f < k; ++f) {
      const double d = errors[static_cast<std::size_t>(f)][c] - pt.mean_error;
      ss += d * d;
    }
    pt.se_error = std::sqrt(ss / (k - 1)) / std::sqrt(static_cast<double>(k));

    const auto& best = result.curve[result.best_index];
    if (!found || pt.mean_error < best.mean_error ||
        (pt.mean_error == best.mean_error && pt.candidate > best.candidate)) {
      result.best_index = c;
      found = true;
    }
  }
  if (!found) {
    std::string msg = "every cross-validation candidate failed";
    for (const auto& f : fold_failures) msg += "; " + f;
    throw ConfigError(msg);
  }
  result.best = grid[result.best_index];
  return result;
}

std::vector<double> lasso_lambda_grid(double lambda_max, Index n, Index p, int length) {
  if (!(lambda_max > 0.0) || length < 2) return {std::max(lambda_max, 0.0)};
  const double ratio = n > p ? 1e-3 : 1e-2;
  std::vector<double> grid(static_cast<std::size_t>(length));
  for (int i = 0; i < length; ++i)
    grid[static_cast<std::size_t>(i)] =
        lambda_max * std::pow(ratio, static_cast<double>(i) / (length - 1));
  return grid;
}

std::vector<double> nodewise_lambda_grid(const Matrix& sigma_hat, Index i, Index n, int length) {
  const Index p = sigma_hat.rows();
  double lmax = 0.0;
  for (Index k = 0; k < p; ++k)
    if (k != i) lmax = std::max(lmax, std::abs(sigma_hat(k, i)));
  return lasso_lambda_grid(2.0 * lmax, n, p - 1, length);
}

Vector take_rows(const Vector& v, const std::vector<Index>& rows) {
  Vector out(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Index>(i)] = v[rows[i]];
  return out;
}

Matrix take_rows(const Matrix& m, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
  return out;
}

FoldDesigns::FoldDesigns(const Matrix& x, const CvPlan& plan) : plan_(plan) {
  if (static_cast<Index>(plan.fold_assignment.size()) != x.rows())
    throw ConfigError("fold plan does not match the number of samples");
  for (int f = 0; f < plan.num_folds; ++f) {
    x_train_.push_back(take_rows(x, plan.train_rows(f)));
    x_test_.push_back(take_rows(x, plan.test_rows(f)));
    const Matrix& xt = x_train_.back();
    gram_.push_back(xt.transpose() * xt / static_cast<double>(xt.rows()));
  }
}

CvResult cv_lasso(const FoldDesigns& folds, const Vector& y, const std::vector<double>& grid,
                  const LassoOptions& opts) {
  auto objective = [&](int f, const std::vector<Index>& train, const std::vector<Index>& test) {
    const Matrix& xt = folds.x_train(f);
    const Vector y_train = take_rows(y, train);
    const Vector corr = xt.transpose() * y_train / static_cast<double>(xt.rows());
    return path_errors(folds.gram_train(f), corr, folds.x_test(f), take_rows(y, test), grid,
                       path_options(opts, mean_squared(y_train)));
  };
  return cv_select(objective, grid, folds.plan());
}

CvResult cv_nodewise(const FoldDesigns& folds, Index i, const std::vector<double>& grid,
                     const LassoOptions& opts) {
  LassoOptions node_opts = opts;
  node_opts.exclude = i;
  auto objective = [&](int f, const std::vector<Index>&, const std::vector<Index>&) {
    const Matrix& gram = folds.gram_train(f);
    return path_errors(gram, gram.col(i), folds.x_test(f), folds.x_test(f).col(i), grid,
                       path_options(node_opts, gram(i, i)));
  };
  return cv_select(objective, grid, folds.plan());
}

namespace {

// Median positive singular value of X, squared and divided by n.
double lambda2_base(const Vector& sv, Index n) {
  std::vector<double> positive;
  for (Index k = 0; k < sv.size(); ++k)
    if (sv[k] > 1e-10 * sv[0]) positive.push_back(sv[k]);
  double median = 1.0;
  if (!positive.empty()) {
    std::sort(positive.begin(), positive.end());
    const std::size_t h = positive.size() / 2;
    median = positive.size() % 2 ? positive[h] : 0.5 * (positive[h - 1] + positive[h]);
  }
  return median * median / static_cast<double>(n);
}

}  // namespace

std::vector<double> default_lambda2_grid(const Matrix& x) {
  const Vector sv = Eigen::BDCSVD<Matrix>(x).singularValues();
  const double n = static_cast<double>(x.rows());
  const double base = lambda2_base(sv, x.rows());
  std::vector<double> grid;
  for (double scale : {0.01, 0.1, 1.0, 10.0, 100.0}) {
    const double lambda2 = scale * base;
    double trace_p2 = 0.0;
    for (Index k = 0; k < sv.size(); ++k) {
      const double s2 = sv[k] * sv[k];
      trace_p2 += s2 * s2 / ((s2 + n * lambda2) * (s2 + n * lambda2));
    }
    if (trace_p2 <= 0.5 * n) grid.push_back(lambda2);
  }
  grid.push_back(RidgeProjectors::kInfinity);
  return grid;
}

std::vector<LavaTuning> default_lava_tuning(const Dataset& data, double c0) {
  const double lambda2 =
      lambda2_base(Eigen::BDCSVD<Matrix>(data.x()).singularValues(), data.n());
  const double lambda1 = lambda1_pilot(data.x(), lambda2, data.m(), c0);
  return std::vector<LavaTuning>(static_cast<std::size_t>(data.m()), LavaTuning{lambda1, lambda2});
}

std::vector<LavaCvColumn> tune_lava_cv(const Dataset& data, const CvPlan& plan,
                                       const LavaCvOptions& opts) {
  const Matrix& x = data.x();
  const std::vector<double> grid2 =
      opts.lambda2_grid.empty() ? default_lambda2_grid(x) : opts.lambda2_grid;
  std::vector<double> mult = opts.lambda1_multipliers;
  if (mult.empty()) {
    constexpr int kCount = 15;
    for (int i = 0; i < kCount; ++i)
      mult.push_back(2.0 * std::pow(0.01, static_cast<double>(i) / (kCount - 1)));
  }
  std::sort(mult.begin(), mult.end(), std::greater<>());

  const std::size_t g2 = grid2.size();
  const auto folds = static_cast<std::size_t>(plan.num_folds);
  std::vector<double> pilots(g2);
  std::vector<std::vector<Index>> train(folds), test(folds);
  std::vector<Matrix> x_train(folds), x_test(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    train[f] = plan.train_rows(static_cast<int>(f));
    test[f] = plan.test_rows(static_cast<int>(f));
    x_train[f] = take_rows(x, train[f]);
    x_test[f] = take_rows(x, test[f]);
  }
  // Full-data pilots, then one projector per (fold, lambda2).
  std::vector<std::unique_ptr<RidgeProjectors>> proj(folds * g2);
  parallel_for(g2 + folds * g2, opts.threads, [&](std::size_t t) {
    if (t < g2) {
      pilots[t] = lambda1_pilot(x, grid2[t], data.m(), opts.c0);
    } else {
      const std::size_t idx = t - g2;
      proj[idx] = std::make_unique<RidgeProjectors>(x_train[idx / g2], grid2[idx % g2]);
    }
  });

  std::vector<LavaCvColumn> out(static_cast<std::size_t>(data.m()));
  parallel_for(out.size(), opts.threads, [&](std::size_t j) {
    const Vector y = data.y().col(static_cast<Index>(j));
    auto stage2 = [&](int f, const std::vector<Index>& tr, const std::vector<Index>& te) {
      const auto fu = static_cast<std::size_t>(f);
      const Vector y_tr = take_rows(y, tr);
      const Vector y_te = take_rows(y, te);
      const LassoOptions path = path_options(opts.lasso, mean_squared(y_tr));
      std::vector<double> errors(g2, kNaN);
      for (std::size_t g = 0; g < g2; ++g) {
        const LavaColumnFit fit =
            lava_fit_column(x_train[fu], y_tr, pilots[g], *proj[fu * g2 + g], path);
        errors[g] = mean_squared(y_te - x_test[fu] * (fit.theta + fit.delta));
      }
      return errors;
    };
    LavaCvColumn& col = out[j];
    col.lambda2_cv = cv_select(stage2, grid2, plan);
    const std::size_t best2 = col.lambda2_cv.best_index;

    std::vector<double> grid1(mult.size());
    for (std::size_t i = 0; i < mult.size(); ++i) grid1[i] = pilots[best2] * mult[i];
    auto stage1 = [&](int f, const std::vector<Index>& tr, const std::vector<Index>& te) {
      const auto fu = static_cast<std::size_t>(f);
      const Vector y_tr = take_rows(y, tr);
      const Vector y_te = take_rows(y, te);
      std::vector<double> errors(grid1.size(), kNaN);
      LassoOptions path = path_options(opts.lasso, mean_squared(y_tr));
      for (std::size_t g = 0; g < grid1.size(); ++g) {
        const LavaColumnFit fit =
            lava_fit_column(x_train[fu], y_tr, grid1[g], *proj[fu * g2 + best2], path);
        errors[g] = mean_squared(y_te - x_test[fu] * (fit.theta + fit.delta));
        path.warm_start = fit.theta;
      }
      return errors;
    };
    col.lambda1_cv = cv_select(stage1, grid1, plan);
    col.tuning = LavaTuning{col.lambda1_cv.best, grid2[best2]};
  });
  return out;
}

}  // namespace hvinfer
