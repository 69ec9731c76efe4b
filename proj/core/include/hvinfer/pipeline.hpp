#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "hvinfer/dataset.hpp"
#include "hvinfer/factors.hpp"
#include "hvinfer/inference.hpp"
#include "hvinfer/lava.hpp"
#include "hvinfer/tuning.hpp"

namespace hvinfer {

enum class TuningMode {
  Default,          ///< closed-form rate-based penalties, no CV
  CrossValidation,  ///< K-fold CV for every penalty
};

struct PipelineConfig {
  TuningMode tuning = TuningMode::CrossValidation;
  std::optional<int> k;  ///< forced number of hidden factors (0 allowed)
  int k_bar = 0;         ///< <= 0: floor(min(n, m) / 2)
  double alpha = 0.05;
  double c0 = 1.0;  ///< pilot constant for lambda1
  int cv_folds = 5;
  std::uint64_t seed = 0;
  double lambda3_scale = 1.0;       ///< default-mode constant for lambda3
  double lambda_tilde_scale = 1.0;  ///< default-mode constant for lambda_tilde
  std::optional<double> lambda3;       ///< fixed value, bypasses tuning
  std::optional<double> lambda_tilde;  ///< fixed value, bypasses tuning
  std::vector<LavaTuning> lava_tuning;  ///< fixed per-column values when non-empty
  LassoOptions lasso;
  int threads = 1;
};

/// Estimated hidden structure: lava fit, residual SVD and factors.
struct HiddenStructure {
  std::vector<LavaTuning> lava_tuning;
  std::vector<LavaCvColumn> lava_cv;  ///< empty unless tuned by CV
  LavaFit lava;
  ResidualSvd svd;
  int k_selected = 0;  ///< eigenvalue-ratio choice, reported even when K is forced
  FactorEstimate factors;
};

/// Stage 1-2: tuned lava fit of every response, residual SVD, K and factors.
HiddenStructure fit_hidden_structure(const Dataset& data, const PipelineConfig& cfg);

/// Factor stage only, from precomputed residuals.
HiddenStructure hidden_structure_from_residuals(const Matrix& residuals, const PipelineConfig& cfg);

/// Stage 3: debiased inference on entries of Theta. Projected responses,
/// initial lasso fits, per-response scores and node-wise precision columns
/// are computed once and cached; each precision column serves every
/// response. `data` and `factors` must outlive the engine.
class ThetaInferenceEngine {
 public:
  ThetaInferenceEngine(const Dataset& data, const FactorEstimate& factors, PipelineConfig cfg);

  /// Computes caches for the given features and responses (in parallel).
  void prepare(const std::vector<Index>& features, const std::vector<Index>& responses);
  void prepare_all();

  ThetaInference infer(Index i, Index j);

  const Matrix& sigma_hat() const noexcept { return sigma_hat_; }
  const Vector& projected(Index j);
  const Vector& initial_estimate(Index j);
  double lambda3(Index j);
  const PrecisionColumn& precision_column(Index i);
  double var_term(Index i);

 private:
  struct ResponseCache {
    Vector y_tilde;
    Vector theta_init;
    Vector score;  ///< X'(y_tilde - X theta_init) / n
    double lambda3 = 0.0;
  };
  struct FeatureCache {
    PrecisionColumn pc;
    double var_term = 0.0;
  };

  const ResponseCache& response(Index j);
  const FeatureCache& feature(Index i);
  ResponseCache compute_response(Index j) const;
  FeatureCache compute_feature(Index i) const;
  const FoldDesigns& folds();

  const Dataset& data_;
  const FactorEstimate& factors_;
  PipelineConfig cfg_;
  Matrix sigma_hat_;
  std::optional<FoldDesigns> folds_;
  std::vector<std::optional<ResponseCache>> responses_;
  std::vector<std::optional<FeatureCache>> features_;
};

/// Full pipeline for one entry (0-based indices).
ThetaInference infer_entry_pipeline(const Dataset& data, Index i, Index j,
                                    const PipelineConfig& cfg);

/// Hidden-effect tests for the listed responses.
std::vector<HiddenEffectResult> test_hidden_effects(const FactorEstimate& fe, Index n,
                                                    const std::vector<Index>& responses,
                                                    double alpha);

}  // namespace hvinfer
