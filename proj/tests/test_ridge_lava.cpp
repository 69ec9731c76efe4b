#include <gtest/gtest.h>

#include <cmath>

#include "hvinfer/error.hpp"
#include "hvinfer/lava.hpp"
#include "hvinfer/ridge.hpp"
#include "test_helpers.hpp"

using namespace hvinfer;

namespace {

Vector sorted_eigenvalues(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  return es.eigenvalues();
}

}  // namespace

TEST(RidgeProjectors, ComplementSymmetryAndSpectrum) {
  for (double l2 : {0.01, 0.5, 3.0}) {
    const Matrix x = fixtures::random_matrix(15, 25, 10);
    const RidgeProjectors proj(x, l2);
    const Matrix& p = proj.p_mat();
    const Matrix& q = proj.q_mat();
    EXPECT_LE((p + q - Matrix::Identity(15, 15)).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE((p - p.transpose()).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE((q - q.transpose()).cwiseAbs().maxCoeff(), 1e-8);
    const Vector ev = sorted_eigenvalues(p);
    EXPECT_GE(ev.minCoeff(), -1e-10);
    EXPECT_LT(ev.maxCoeff(), 1.0);
    EXPECT_GE(proj.m_diag().minCoeff(), 0.0);
  }
}

TEST(RidgeProjectors, MatchDirectFormulas) {
  const Matrix x = fixtures::random_matrix(12, 7, 20);
  const double n = 12.0;
  const double l2 = 0.3;
  const RidgeProjectors proj(x, l2);
  const Matrix inv = (x.transpose() * x + n * l2 * Matrix::Identity(7, 7)).inverse();
  const Matrix p = x * inv * x.transpose();
  const Matrix q = Matrix::Identity(12, 12) - p;
  EXPECT_LE((proj.p_mat() - p).cwiseAbs().maxCoeff(), 1e-10);
  for (Index k = 0; k < 7; ++k)
    EXPECT_NEAR(proj.m_diag()[k], x.col(k).dot(q * q * x.col(k)) / n, 1e-8);
  EXPECT_LE((proj.weighted_gram() - x.transpose() * q * x / n).cwiseAbs().maxCoeff(), 1e-10);
  const Vector y = fixtures::random_vector(12, 21);
  EXPECT_LE((proj.weighted_corr(y) - x.transpose() * q * y / n).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((proj.ridge_solve(y) - inv * x.transpose() * y).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(RidgeProjectors, InfiniteLambdaIsIdentityComplement) {
  const Matrix x = fixtures::random_matrix(10, 4, 30);
  const RidgeProjectors proj(x, RidgeProjectors::kInfinity);
  EXPECT_TRUE(proj.p_mat().isZero(0.0));
  EXPECT_LE((proj.q_mat() - Matrix::Identity(10, 10)).cwiseAbs().maxCoeff(), 0.0);
  const Vector expected = (x.transpose() * x).diagonal() / 10.0;
  EXPECT_LE((proj.m_diag() - expected).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_TRUE(proj.ridge_solve(fixtures::random_vector(10, 1)).isZero(0.0));
}

TEST(RidgeProjectors, OrthogonalDesignHalfEigenvalues) {
  const Matrix x = fixtures::orthogonal_design(20, 6, 40);
  const RidgeProjectors proj(x, 1.0);
  const Vector ev = sorted_eigenvalues(proj.p_mat());
  // 14 zeros then six eigenvalues n / (n + n) = 1/2.
  for (Index k = 0; k < 14; ++k) EXPECT_NEAR(ev[k], 0.0, 1e-10);
  for (Index k = 14; k < 20; ++k) EXPECT_NEAR(ev[k], 0.5, 1e-10);
}

TEST(RidgeProjectors, ZeroLambdaProjectsOntoColumnSpace) {
  const Matrix wide = fixtures::random_matrix(8, 20, 50);
  const RidgeProjectors full_row(wide, 0.0);
  const Matrix& p = full_row.p_mat();
  EXPECT_LE((p * p - p).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LE((p - Matrix::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-8);

  const Matrix tall = fixtures::random_matrix(20, 5, 51);
  const RidgeProjectors col(tall, 0.0);
  EXPECT_LE((col.p_mat() * col.p_mat() - col.p_mat()).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_NEAR(col.p_mat().trace(), 5.0, 1e-8);
}

TEST(RidgeProjectors, RankDeficientDesignTruncates) {
  Matrix x = fixtures::random_matrix(10, 4, 60);
  x.col(3) = x.col(0) + x.col(1);
  const RidgeProjectors proj(x, 0.0);
  EXPECT_EQ(proj.rank(), 3);
  EXPECT_NEAR(proj.p_mat().trace(), 3.0, 1e-8);
}

TEST(RidgeProjectors, RejectsNegativeAndNonFinite) {
  const Matrix x = fixtures::random_matrix(5, 3, 1);
  EXPECT_THROW(RidgeProjectors(x, -1.0), ConfigError);
  Matrix bad = x;
  bad(0, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(RidgeProjectors(bad, 1.0), NumericalError);
}

TEST(LavaColumn, InfiniteRidgeIsPlainLasso) {
  const Matrix x = fixtures::random_matrix(30, 12, 70);
  const Vector y = fixtures::random_vector(30, 71);
  const RidgeProjectors proj(x, RidgeProjectors::kInfinity);
  LassoOptions opts;
  opts.tol = 1e-12;
  const LavaColumnFit fit = lava_fit_column(x, y, 0.1, proj, opts);
  EXPECT_TRUE(fit.delta.isZero(0.0));
  EXPECT_LE((fit.theta - lasso_cd(x, y, 0.1, opts).coef).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(LavaColumn, LargePenaltyGivesRidgeFit) {
  const Matrix x = fixtures::random_matrix(20, 30, 80);
  const Vector y = fixtures::random_vector(20, 81);
  const RidgeProjectors proj(x, 0.2);
  const LavaColumnFit fit = lava_fit_column(x, y, 1e6, proj);
  EXPECT_TRUE(fit.theta.isZero(0.0));
  EXPECT_LE((fit.fitted - proj.p_mat() * y).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(LavaColumn, FitIdentityAndWeightedKkt) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Matrix x = fixtures::random_matrix(20, 30, 90 + seed);
    const Vector y = x.leftCols(3).rowwise().sum() + fixtures::random_vector(20, 190 + seed);
    const RidgeProjectors proj(x, 0.05);
    const double lambda1 = 0.3;
    LassoOptions opts;
    opts.tol = 1e-12;
    const LavaColumnFit fit = lava_fit_column(x, y, lambda1, proj, opts);
    const Vector expected = proj.p_mat() * y + proj.q_mat() * x * fit.theta;
    EXPECT_LE((fit.fitted - expected).cwiseAbs().maxCoeff(), 1e-6);

    const Vector grad = 2.0 * x.transpose() * proj.q_mat() * (y - x * fit.theta) / 20.0;
    for (Index k = 0; k < 30; ++k) {
      if (fit.theta[k] == 0.0)
        EXPECT_LE(std::abs(grad[k]), lambda1 + 1e-6);
      else
        EXPECT_NEAR(grad[k], lambda1 * (fit.theta[k] > 0 ? 1.0 : -1.0), 1e-4);
    }
  }
}

TEST(LavaColumn, MatchesAlternatingMinimization) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const Matrix x = fixtures::random_matrix(20, 30, 300 + seed);
    const Vector y = 2.0 * x.col(seed % 30) + fixtures::random_vector(20, 400 + seed);
    const double lambda1 = 0.2;
    const double lambda2 = 0.1;
    LassoOptions opts;
    opts.tol = 1e-12;
    const LavaColumnFit fit = lava_fit_column(x, y, lambda1, RidgeProjectors(x, lambda2), opts);
    const fixtures::LavaOracle oracle = fixtures::alternating_lava(x, y, lambda1, lambda2);
    ASSERT_LT(oracle.outer_iterations, 100000);
    const double value = lava_objective(x, y, fit.theta, fit.delta, lambda1, lambda2);
    EXPECT_LE(std::abs(value - oracle.objective), 1e-6 * std::abs(oracle.objective));
  }
}

TEST(LavaColumn, NeverWorseThanSingleComponentCandidates) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Matrix x = fixtures::random_matrix(20, 30, 500 + seed);
    const Vector y = fixtures::random_vector(20, 600 + seed) + x.col(0);
    const double lambda1 = 0.25;
    const double lambda2 = 0.5;
    const RidgeProjectors proj(x, lambda2);
    const LavaColumnFit fit = lava_fit_column(x, y, lambda1, proj);
    const double value = lava_objective(x, y, fit.theta, fit.delta, lambda1, lambda2);
    const Vector zero = Vector::Zero(30);
    const double ridge_only = lava_objective(x, y, zero, proj.ridge_solve(y), lambda1, lambda2);
    const double lasso_only = lava_objective(x, y, lasso_cd(x, y, lambda1).coef, zero, lambda1, lambda2);
    EXPECT_LE(value, ridge_only + 1e-9);
    EXPECT_LE(value, lasso_only + 1e-9);
  }
}

TEST(LavaColumn, RejectsMismatchedProjectors) {
  const Matrix x = fixtures::random_matrix(10, 4, 1);
  const RidgeProjectors other(fixtures::random_matrix(10, 5, 2), 1.0);
  EXPECT_THROW(lava_fit_column(x, fixtures::random_vector(10, 3), 0.1, other), ConfigError);
}

TEST(LavaAll, InterpolatesExactlyRecoverableResponses) {
  const Matrix x = fixtures::random_matrix(40, 5, 700);
  const Matrix f = fixtures::random_matrix(5, 3, 701);
  const Dataset data(x, x * f, false);
  const LavaFit fit = lava_fit_all(data, std::vector<LavaTuning>(3, LavaTuning{0.0, 0.0}));
  EXPECT_LE(fit.residuals.cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LE((fit.f_hat - f).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(LavaAll, ResidualsConsistentWithColumnFits) {
  const Dataset data(fixtures::random_matrix(25, 10, 800), fixtures::random_matrix(25, 4, 801));
  const std::vector<LavaTuning> tuning{{0.1, 0.5}, {0.2, 0.5}, {0.1, 2.0},
                                       {0.3, RidgeProjectors::kInfinity}};
  const LavaFit fit = lava_fit_all(data, tuning);
  for (Index j = 0; j < 4; ++j) {
    const auto& cf = fit.column_fits[static_cast<std::size_t>(j)];
    EXPECT_LE((fit.residuals.col(j) - (data.y().col(j) - cf.fitted)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_EQ(cf.lambda1, tuning[static_cast<std::size_t>(j)].lambda1);
  }
}

TEST(LavaAll, SingleColumnMatchesColumnFit) {
  const Dataset data(fixtures::random_matrix(25, 10, 810), fixtures::random_matrix(25, 1, 811));
  const LavaFit fit = lava_fit_all(data, {{0.15, 0.4}});
  const LavaColumnFit col =
      lava_fit_column(data.x(), data.y().col(0), 0.15, RidgeProjectors(data.x(), 0.4));
  EXPECT_TRUE(fit.f_hat.col(0) == col.theta + col.delta);
}

TEST(LavaAll, ParallelMatchesSerialBitwise) {
  const Dataset data(fixtures::random_matrix(30, 40, 820), fixtures::random_matrix(30, 9, 821));
  const std::vector<LavaTuning> tuning(9, LavaTuning{0.2, 0.3});
  const LavaFit serial = lava_fit_all(data, tuning, {}, 1);
  const LavaFit parallel = lava_fit_all(data, tuning, {}, 4);
  EXPECT_TRUE(serial.residuals == parallel.residuals);
  EXPECT_TRUE(serial.f_hat == parallel.f_hat);
}

TEST(LavaAll, TuningLengthMismatchIsConfigError) {
  const Dataset data(fixtures::random_matrix(10, 3, 1), fixtures::random_matrix(10, 2, 2));
  EXPECT_THROW(lava_fit_all(data, {{0.1, 0.1}}), ConfigError);
}
