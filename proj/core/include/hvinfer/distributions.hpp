#pragma once

namespace hvinfer {

/// Standard normal CDF.
double normal_cdf(double x);
/// Upper tail 1 - Phi(x), accurate in the far tail.
double normal_sf(double x);
/// Inverse of normal_cdf on (0, 1); returns -inf / +inf at 0 / 1 and throws
/// ConfigError outside [0, 1].
double normal_quantile(double p);

/// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double regularized_gamma_q(double a, double x);

double chi2_cdf(double x, double df);
/// Survival function 1 - F(x).
double chi2_sf(double x, double df);
/// Inverse CDF on [0, 1); +inf at 1.
double chi2_quantile(double p, double df);

}  // namespace hvinfer
