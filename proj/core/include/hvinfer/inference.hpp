#pragma once

#include "hvinfer/factors.hpp"
#include "hvinfer/lasso.hpp"
#include "hvinfer/types.hpp"

namespace hvinfer {

/// Y P_B^perp e_j: response j with the estimated hidden-factor directions
/// projected out.
Vector projected_response(const Matrix& y, const FactorEstimate& fe, Index j);

/// Lasso of the projected response on X: (1/n)|y_tilde - X t|^2 + lambda3 |t|_1.
Vector initial_theta_lasso(const Matrix& x, const Vector& y_tilde, double lambda3,
                           const LassoOptions& opts = {});

/// Node-wise lasso output for feature i: gamma regresses x_i on the other
/// columns, tau2 = x_i'(x_i - X_{-i} gamma)/n and omega is the estimated
/// column i of the precision matrix, omega_i = 1/tau2, omega_{-i} = -gamma/tau2.
struct PrecisionColumn {
  Index i = 0;
  Vector gamma;  ///< length p - 1, remaining features in original order
  double tau2 = 0.0;
  Vector omega;  ///< length p
  double lambda_tilde = 0.0;
};

/// Throws ConfigError for p < 2 or an all-zero column, NumericalError when
/// tau2 <= 1e-12 (feature i perfectly explained by the others).
PrecisionColumn nodewise_precision_column(const Matrix& x, Index i, double lambda_tilde,
                                          const LassoOptions& opts = {});
/// Same, reusing a precomputed sample covariance X'X/n.
PrecisionColumn nodewise_precision_column_gram(const Matrix& sigma_hat, Index i,
                                               double lambda_tilde, const LassoOptions& opts = {});

/// theta_init[i] + omega_i' X'(y_tilde - X theta_init) / n.
double debias_entry(const Matrix& x, const Vector& y_tilde, const Vector& theta_init,
                    const PrecisionColumn& pc);

/// omega' Sigma_hat omega.
double precision_variance(const PrecisionColumn& pc, const Matrix& sigma_hat);

struct ThetaInference {
  Index i = 0;
  Index j = 0;
  double theta_init = 0.0;
  double theta_debiased = 0.0;
  double var_term = 0.0;   ///< omega' Sigma_hat omega
  double sigma2_ej = 0.0;  ///< noise variance of response j
  double se = 0.0;         ///< sqrt(sigma2_ej * var_term / n)
  double u_stat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double p_value = 1.0;
  double alpha = 0.05;
  bool reject = false;
};

/// z-test and (1 - alpha) confidence interval for one debiased entry. alpha
/// may be 0 (never reject, infinite interval). Rejection needs
/// |u| > z_{alpha/2} strictly. Throws NumericalError when
/// sigma2_ej * var_term == 0.
ThetaInference theta_test_ci(Index i, Index j, double theta_init, double theta_debiased,
                             double var_term, double sigma2_ej, Index n, double alpha);

struct HiddenEffectResult {
  Index j = 0;
  double r_stat = 0.0;
  int df = 0;
  double p_value = 1.0;
  double alpha = 0.05;
  bool reject = false;
};

/// Chi-square test of B_j = 0: r = n |B_j|^2 / sigma2_j on K degrees of
/// freedom, rejected when r exceeds the (1 - alpha) quantile. Needs K >= 1
/// and filled noise variances; sigma2_j <= 1e-12 is a NumericalError.
HiddenEffectResult hidden_effect_test(const FactorEstimate& fe, Index j, Index n, double alpha);

}  // namespace hvinfer
