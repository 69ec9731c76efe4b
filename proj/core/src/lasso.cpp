#include "hvinfer/lasso.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "hvinfer/error.hpp"

namespace hvinfer {
namespace {

// One coordinate move; returns |change|, or the loss decrease G_kk change^2
// when `objective_scale` is set.
inline double update_coordinate(const Matrix& gram, Vector& coef, Vector& grad, Index k,
                                double half_lambda, double diag_floor, Index exclude,
                                bool objective_scale) {
  if (k == exclude) return 0.0;
  const double gkk = gram(k, k);
  const double old = coef[k];
  double next = 0.0;
  if (gkk > diag_floor) {
    next = soft_threshold(grad[k] + gkk * old, half_lambda) / gkk;
    if (!std::isfinite(next)) {
      throw NumericalError("lasso coordinate " + std::to_string(k) + " became non-finite");
    }
  }
  const double delta = next - old;
  if (delta != 0.0) {
    grad.noalias() -= delta * gram.col(k);
    coef[k] = next;
  }
  return objective_scale ? gkk * delta * delta : std::abs(delta);
}

}  // namespace

LassoResult lasso_gram(const Matrix& gram, const Vector& corr, double lambda,
                       const LassoOptions& opts) {
  const Index p = gram.rows();
  if (gram.cols() != p || corr.size() != p) throw ConfigError("lasso_gram: shape mismatch");
  if (!(lambda >= 0.0)) throw ConfigError("lasso penalty must be nonnegative");
  if (!gram.allFinite() || !corr.allFinite()) throw NumericalError("lasso input contains NaN/Inf");

  LassoResult res;
  res.coef = opts.warm_start.size() == p ? opts.warm_start : Vector::Zero(p);

  const double half_lambda = 0.5 * lambda;
  const double diag_floor = 1e-14 * std::max(1.0, gram.diagonal().cwiseAbs().maxCoeff());
  for (Index k = 0; k < p; ++k)
    if (gram(k, k) <= diag_floor || k == opts.exclude) res.coef[k] = 0.0;
  Vector grad = corr - gram * res.coef;

  const bool by_objective = opts.objective_tol > 0.0;
  auto settled = [&](double change) {
    return by_objective ? change < opts.objective_tol
                        : change < opts.tol * (1.0 + res.coef.cwiseAbs().maxCoeff());
  };

  std::vector<Index> active;
  active.reserve(static_cast<std::size_t>(p));
  while (res.sweeps < opts.max_iter) {
    double max_change = 0.0;
    for (Index k = 0; k < p; ++k)
      max_change = std::max(max_change, update_coordinate(gram, res.coef, grad, k, half_lambda,
                                                          diag_floor, opts.exclude, by_objective));
    ++res.sweeps;
    if (settled(max_change)) {
      res.converged = true;
      break;
    }

    // Iterate on the current support until it settles, then re-check all.
    active.clear();
    for (Index k = 0; k < p; ++k)
      if (res.coef[k] != 0.0) active.push_back(k);
    while (res.sweeps < opts.max_iter) {
      double change = 0.0;
      for (Index k : active)
        change = std::max(change, update_coordinate(gram, res.coef, grad, k, half_lambda,
                                                    diag_floor, opts.exclude, by_objective));
      ++res.sweeps;
      if (settled(change)) break;
    }
  }
  return res;
}

LassoResult lasso_cd(const Matrix& x, const Vector& y, double lambda, const LassoOptions& opts) {
  if (x.rows() != y.size()) throw ConfigError("lasso_cd: X and y row counts differ");
  if (!x.allFinite() || !y.allFinite()) throw NumericalError("lasso input contains NaN/Inf");
  const double n = static_cast<double>(x.rows());
  Matrix gram(x.cols(), x.cols());
  gram.setZero();
  gram.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose(), 1.0 / n);
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
  const Vector corr = x.transpose() * y / n;
  return lasso_gram(gram, corr, lambda, opts);
}

double lasso_lambda_max(const Matrix& x, const Vector& y) {
  if (x.cols() == 0) return 0.0;
  return 2.0 * (x.transpose() * y).cwiseAbs().maxCoeff() / static_cast<double>(x.rows());
}

}  // namespace hvinfer
