#include "hvinfer/lava.hpp"

#include <map>
#include <memory>
#include <string>

#include "hvinfer/error.hpp"
#include "hvinfer/parallel.hpp"

namespace hvinfer {

namespace {

std::string column_message(std::size_t j, const std::exception& e) {
  return "lava fit of response column " + std::to_string(j + 1) + " failed: " + e.what();
}

}  // namespace

LavaColumnFit lava_fit_column(const Matrix& x, const Vector& y, double lambda1,
                              const RidgeProjectors& proj, const LassoOptions& opts) {
  if (proj.n() != x.rows() || proj.p() != x.cols())
    throw ConfigError("lava_fit_column: projectors built from a different design");
  if (y.size() != x.rows()) throw ConfigError("lava_fit_column: response length mismatch");
  if (!y.allFinite()) throw NumericalError("lava_fit_column: response contains NaN/Inf");

  const LassoResult lasso = lasso_gram(proj.weighted_gram(), proj.weighted_corr(y), lambda1, opts);
  LavaColumnFit fit;
  fit.theta = lasso.coef;
  fit.converged = lasso.converged;
  fit.lambda1 = lambda1;
  fit.lambda2 = proj.lambda2();
  const Vector x_theta = x * fit.theta;
  fit.delta = proj.ridge_solve(y - x_theta);
  fit.fitted = x_theta + x * fit.delta;
  return fit;
}

double lava_objective(const Matrix& x, const Vector& y, const Vector& theta, const Vector& delta,
                      double lambda1, double lambda2) {
  const double n = static_cast<double>(x.rows());
  double value = (y - x * (theta + delta)).squaredNorm() / n + lambda1 * theta.lpNorm<1>();
  if (lambda2 != RidgeProjectors::kInfinity) value += lambda2 * delta.squaredNorm();
  return value;
}

LavaFit lava_fit_all(const Dataset& data, const std::vector<LavaTuning>& tuning,
                     const LassoOptions& opts, int threads) {
  const Index m = data.m();
  if (static_cast<Index>(tuning.size()) != m)
    throw ConfigError("lava_fit_all: expected " + std::to_string(m) + " tuning pairs, got " +
                      std::to_string(tuning.size()));

  std::map<double, std::unique_ptr<RidgeProjectors>> projectors;
  for (const auto& t : tuning)
    if (!projectors.contains(t.lambda2))
      projectors.emplace(t.lambda2, std::make_unique<RidgeProjectors>(data.x(), t.lambda2));

  LavaFit out;
  out.column_fits.resize(static_cast<std::size_t>(m));
  parallel_for(static_cast<std::size_t>(m), threads, [&](std::size_t j) {
    try {
      out.column_fits[j] = lava_fit_column(data.x(), data.y().col(static_cast<Index>(j)),
                                           tuning[j].lambda1, *projectors.at(tuning[j].lambda2),
                                           opts);
    } catch (const ConfigError& e) {
      throw ConfigError(column_message(j, e));
    } catch (const InputError& e) {
      throw InputError(column_message(j, e));
    } catch (const Error& e) {
      throw NumericalError(column_message(j, e));
    }
  });

  out.f_hat.resize(data.p(), m);
  for (Index j = 0; j < m; ++j) {
    const auto& f = out.column_fits[static_cast<std::size_t>(j)];
    out.f_hat.col(j) = f.theta + f.delta;
  }
  out.residuals = data.y() - data.x() * out.f_hat;
  return out;
}

}  // namespace hvinfer
