#include "hvinfer/inference.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "hvinfer/distributions.hpp"
#include "hvinfer/error.hpp"

namespace hvinfer {
namespace {

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in [0, 1)");
}

}  // namespace

Vector projected_response(const Matrix& y, const FactorEstimate& fe, Index j) {
  if (j < 0 || j >= y.cols()) throw ConfigError("response index out of range");
  if (fe.m() != y.cols()) throw ConfigError("factor estimate does not match Y");
  return y * fe.p_b_perp.col(j);
}

Vector initial_theta_lasso(const Matrix& x, const Vector& y_tilde, double lambda3,
                           const LassoOptions& opts) {
  return lasso_cd(x, y_tilde, lambda3, opts).coef;
}

PrecisionColumn nodewise_precision_column_gram(const Matrix& sigma_hat, Index i,
                                               double lambda_tilde, const LassoOptions& opts) {
  const Index p = sigma_hat.rows();
  if (p < 2) throw ConfigError("node-wise lasso needs at least 2 features");
  if (i < 0 || i >= p) throw ConfigError("feature index out of range");
  if (!(sigma_hat(i, i) > 0.0))
    throw ConfigError("feature " + std::to_string(i + 1) + " is identically zero");

  LassoOptions node = opts;
  node.exclude = i;
  if (node.warm_start.size() == p) node.warm_start[i] = 0.0;
  const Vector full = lasso_gram(sigma_hat, sigma_hat.col(i), lambda_tilde, node).coef;

  PrecisionColumn pc;
  pc.i = i;
  pc.lambda_tilde = lambda_tilde;
  pc.gamma.resize(p - 1);
  pc.gamma.head(i) = full.head(i);
  pc.gamma.tail(p - 1 - i) = full.tail(p - 1 - i);
  // full[i] == 0, so Sigma_{i,-i} gamma = Sigma_{i,.} full.
  pc.tau2 = sigma_hat(i, i) - sigma_hat.row(i).dot(full);
  if (!(pc.tau2 > 1e-12))
    throw NumericalError("node-wise fit of feature " + std::to_string(i + 1) +
                         " is singular (tau^2 = " + std::to_string(pc.tau2) + ")");
  pc.omega = -full / pc.tau2;
  pc.omega[i] = 1.0 / pc.tau2;
  return pc;
}

PrecisionColumn nodewise_precision_column(const Matrix& x, Index i, double lambda_tilde,
                                          const LassoOptions& opts) {
  if (x.cols() < 2) throw ConfigError("node-wise lasso needs at least 2 features");
  if (i < 0 || i >= x.cols()) throw ConfigError("feature index out of range");
  if (x.col(i).cwiseAbs().maxCoeff() == 0.0)
    throw ConfigError("feature " + std::to_string(i + 1) + " is identically zero");
  const Matrix sigma_hat = x.transpose() * x / static_cast<double>(x.rows());
  return nodewise_precision_column_gram(sigma_hat, i, lambda_tilde, opts);
}

double debias_entry(const Matrix& x, const Vector& y_tilde, const Vector& theta_init,
                    const PrecisionColumn& pc) {
  const Vector score = x.transpose() * (y_tilde - x * theta_init) / static_cast<double>(x.rows());
  return theta_init[pc.i] + pc.omega.dot(score);
}

double precision_variance(const PrecisionColumn& pc, const Matrix& sigma_hat) {
  return pc.omega.dot(sigma_hat * pc.omega);
}

ThetaInference theta_test_ci(Index i, Index j, double theta_init, double theta_debiased,
                             double var_term, double sigma2_ej, Index n, double alpha) {
  check_alpha(alpha);
  if (sigma2_ej < 0.0 || var_term < 0.0) throw ConfigError("variances must be nonnegative");
  const double scale = sigma2_ej * var_term;
  if (!(scale > 0.0))
    throw NumericalError("degenerate variance for entry (" + std::to_string(i + 1) + ", " +
                         std::to_string(j + 1) + ")");
  ThetaInference r;
  r.i = i;
  r.j = j;
  r.theta_init = theta_init;
  r.theta_debiased = theta_debiased;
  r.var_term = var_term;
  r.sigma2_ej = sigma2_ej;
  r.alpha = alpha;
  r.se = std::sqrt(scale / static_cast<double>(n));
  r.u_stat = theta_debiased / r.se;
  const double z = alpha > 0.0 ? normal_quantile(1.0 - 0.5 * alpha)
                               : std::numeric_limits<double>::infinity();
  r.ci_low = theta_debiased - z * r.se;
  r.ci_high = theta_debiased + z * r.se;
  r.p_value = std::min(1.0, 2.0 * normal_sf(std::abs(r.u_stat)));
  r.reject = std::abs(r.u_stat) > z;
  return r;
}

HiddenEffectResult hidden_effect_test(const FactorEstimate& fe, Index j, Index n, double alpha) {
  check_alpha(alpha);
  if (fe.k < 1) throw ConfigError("hidden-effect test needs at least one factor");
  if (j < 0 || j >= fe.m()) throw ConfigError("response index out of range");
  if (fe.sigma2_e.size() != fe.m()) throw ConfigError("noise variances have not been estimated");
  const double sigma2 = fe.sigma2_e[j];
  if (!(sigma2 > 1e-12))
    throw NumericalError("degenerate noise variance for response " + std::to_string(j + 1));
  HiddenEffectResult r;
  r.j = j;
  r.df = fe.k;
  r.alpha = alpha;
  r.r_stat = static_cast<double>(n) * fe.b_hat.col(j).squaredNorm() / sigma2;
  r.p_value = chi2_sf(r.r_stat, r.df);
  const double critical = alpha > 0.0 ? chi2_quantile(1.0 - alpha, r.df)
                                      : std::numeric_limits<double>::infinity();
  r.reject = r.r_stat > critical;
  return r;
}

}  // namespace hvinfer
