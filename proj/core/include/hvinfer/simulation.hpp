#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hvinfer/dataset.hpp"
#include "hvinfer/pipeline.hpp"

namespace hvinfer {

using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Synthetic hidden-variable regression Y = X Theta + Z B + E with
/// Z = X A + W. Normal draws are parameterized by (mean, standard deviation).
struct DgpConfig {
  Index n = 200;
  Index p = 50;
  Index m = 20;
  int k = 3;
  double eta = 0.2;  ///< scale of A
  Index s = 3;       ///< nonzero rows of Theta
  Index s_m = 10;    ///< nonzeros per nonzero row
  std::optional<double> theta_signal;  ///< fixed nonzero value; otherwise N(2, 0.1)
  Index b_m = 0;        ///< leading columns of B set to zero
  double sigma_w = 3.0;  ///< standard deviation of W
  std::uint64_t seed = 0;

  double theta_mean = 2.0;
  double theta_sd = 0.1;
  double a_mean = 0.5;
  double a_sd = 0.1;
  double b_mean = 0.1;
  double b_sd = 1.0;

  /// Throws ConfigError on invalid dimensions or scales.
  void validate() const;
};

/// Sigma_jk = (-1)^(j+k) 0.5^|j-k|.
Matrix dgp_covariance(Index p);

struct DgpInstance {
  Dataset data;  ///< centered copy of (x, y)
  Matrix x;      ///< raw draws, n x p
  Matrix y;      ///< raw responses, n x m
  Matrix theta_true;  ///< p x m
  Matrix a_true;      ///< p x K
  Matrix b_true;      ///< K x m
  Matrix z;           ///< n x K
  Matrix w;           ///< n x K
  Matrix e;           ///< n x m
  BoolMatrix support;  ///< Theta != 0
};

/// Deterministic in cfg.seed; each random block (X, A, B, Theta, W, E) uses
/// its own substream.
DgpInstance generate_dgp(const DgpConfig& cfg);

struct MethodConfig {
  PipelineConfig pipeline;
  bool use_true_k = true;  ///< force K to the generating value
};

/// Rates over one rejection table: type1 over cells where `nonnull` is
/// false, power over cells where it is true (NaN when a set is empty).
struct Rates {
  double type1 = 0.0;
  double power = 0.0;
};
Rates rejection_rates(const BoolMatrix& reject, const BoolMatrix& nonnull);

struct RepDetail {
  int rep = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  int k_used = 0;
  Rates rates;
  BoolMatrix reject;   ///< p x m for Theta tests, 1 x m for B tests
  BoolMatrix nonnull;  ///< same shape; true where the alternative holds
};

struct ExperimentResult {
  double type1 = 0.0;  ///< mean of per-replication rates
  double power = 0.0;
  int reps = 0;
  int failures = 0;
  std::vector<RepDetail> detail;
};

/// Averages rates over successful replications and counts failures.
/// Throws NumericalError when more than 10% of replications failed.
ExperimentResult aggregate_replications(std::vector<RepDetail> detail);

/// Type I error / power of the entrywise Theta tests. Replication r uses
/// seed derive_seed(cfg.seed, r) for data and CV folds.
ExperimentResult run_theta_experiment(const DgpConfig& cfg, const MethodConfig& method, int reps,
                                      double alpha, int threads = 1);

/// Type I error over the b_m zero columns of B and power over the rest.
ExperimentResult run_b_experiment(const DgpConfig& cfg, const MethodConfig& method, int reps,
                                  double alpha, int threads = 1);

struct SweepRow {
  double r = 0.0;
  ExperimentResult result;
};

/// One Theta experiment per signal value with the nonzeros fixed at r.
std::vector<SweepRow> run_signal_sweep(const DgpConfig& cfg, const MethodConfig& method,
                                       const std::vector<double>& r_grid, int reps, double alpha,
                                       int threads = 1);

/// CSV emitters (header + rows).
void write_experiment_csv(std::ostream& out, const DgpConfig& cfg, double alpha,
                          const ExperimentResult& res);
void write_sweep_csv(std::ostream& out, const DgpConfig& cfg, double alpha,
                     const std::vector<SweepRow>& rows);
void write_replication_csv(std::ostream& out, const ExperimentResult& res);

}  // namespace hvinfer
