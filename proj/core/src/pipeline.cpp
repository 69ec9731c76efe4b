#include "hvinfer/pipeline.hpp"

#include <cmath>
#include <string>

#include "hvinfer/error.hpp"
#include "hvinfer/parallel.hpp"

namespace hvinfer {
namespace {

// Re-raises library errors with the pipeline stage prepended.
template <class F>
auto in_stage(const char* stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const ParseError& e) {
    throw ParseError(std::string(stage) + ": " + e.what(), e.row(), e.col());
  } catch (const InputError& e) {
    throw InputError(std::string(stage) + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(stage) + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(stage) + ": " + e.what());
  }
}

FactorEstimate factors_for(const HiddenStructure& hs, const Matrix& residuals,
                           const PipelineConfig& cfg) {
  FactorEstimate fe = estimate_loadings_factors(hs.svd, cfg.k.value_or(hs.k_selected));
  fill_noise_variances(fe, residuals);
  return fe;
}

int select_k(const ResidualSvd& svd, int k_bar) {
  const int bar = k_bar > 0 ? k_bar : std::max(1, default_k_bar(svd.n, svd.m));
  std::vector<double> d(svd.d.data(), svd.d.data() + svd.d.size());
  if (static_cast<int>(d.size()) < bar + 1) d.resize(static_cast<std::size_t>(bar + 1), 0.0);
  return select_num_factors(d, bar);
}

}  // namespace

HiddenStructure hidden_structure_from_residuals(const Matrix& residuals,
                                                const PipelineConfig& cfg) {
  HiddenStructure hs;
  in_stage("factor estimation", [&] {
    hs.svd = svd_scaled_residuals(residuals);
    hs.k_selected = select_k(hs.svd, cfg.k_bar);
    hs.factors = factors_for(hs, residuals, cfg);
  });
  hs.lava.residuals = residuals;
  return hs;
}

HiddenStructure fit_hidden_structure(const Dataset& data, const PipelineConfig& cfg) {
  HiddenStructure hs;
  in_stage("lava tuning", [&] {
    if (!cfg.lava_tuning.empty()) {
      hs.lava_tuning = cfg.lava_tuning;
    } else if (cfg.tuning == TuningMode::CrossValidation) {
      const CvPlan plan = kfold_indices(data.n(), cfg.cv_folds, cfg.seed);
      LavaCvOptions opts;
      opts.c0 = cfg.c0;
      opts.lasso = cfg.lasso;
      opts.threads = cfg.threads;
      hs.lava_cv = tune_lava_cv(data, plan, opts);
      for (const auto& c : hs.lava_cv) hs.lava_tuning.push_back(c.tuning);
    } else {
      hs.lava_tuning = default_lava_tuning(data, cfg.c0);
    }
  });
  hs.lava = in_stage("lava fit", [&] {
    return lava_fit_all(data, hs.lava_tuning, cfg.lasso, cfg.threads);
  });
  in_stage("factor estimation", [&] {
    hs.svd = svd_scaled_residuals(hs.lava.residuals);
    hs.k_selected = select_k(hs.svd, cfg.k_bar);
    hs.factors = factors_for(hs, hs.lava.residuals, cfg);
  });
  return hs;
}

ThetaInferenceEngine::ThetaInferenceEngine(const Dataset& data, const FactorEstimate& factors,
                                           PipelineConfig cfg)
    : data_(data), factors_(factors), cfg_(std::move(cfg)) {
  if (factors.m() != data.m()) throw ConfigError("factor estimate does not match the data");
  if (factors.sigma2_e.size() != data.m())
    throw ConfigError("noise variances have not been estimated");
  sigma_hat_ = data.x().transpose() * data.x() / static_cast<double>(data.n());
  responses_.resize(static_cast<std::size_t>(data.m()));
  features_.resize(static_cast<std::size_t>(data.p()));
}

const FoldDesigns& ThetaInferenceEngine::folds() {
  if (!folds_) folds_.emplace(data_.x(), kfold_indices(data_.n(), cfg_.cv_folds, cfg_.seed));
  return *folds_;
}

ThetaInferenceEngine::ResponseCache ThetaInferenceEngine::compute_response(Index j) const {
  return in_stage("initial lasso", [&] {
    const Matrix& x = data_.x();
    const double n = static_cast<double>(data_.n());
    const double p = static_cast<double>(data_.p());
    ResponseCache c;
    c.y_tilde = projected_response(data_.y(), factors_, j);
    if (cfg_.lambda3) {
      c.lambda3 = *cfg_.lambda3;
    } else if (cfg_.tuning == TuningMode::CrossValidation) {
      const auto grid = lasso_lambda_grid(lasso_lambda_max(x, c.y_tilde), data_.n(), data_.p());
      c.lambda3 = cv_lasso(*folds_, c.y_tilde, grid, cfg_.lasso).best;
    } else {
      c.lambda3 = cfg_.lambda3_scale * std::sqrt(sigma_hat_.diagonal().maxCoeff()) *
                  std::sqrt(std::log(p) / n);
    }
    c.theta_init = initial_theta_lasso(x, c.y_tilde, c.lambda3, cfg_.lasso);
    c.score = x.transpose() * (c.y_tilde - x * c.theta_init) / n;
    return c;
  });
}

ThetaInferenceEngine::FeatureCache ThetaInferenceEngine::compute_feature(Index i) const {
  return in_stage("node-wise lasso", [&] {
    const Index p = data_.p();
    double lambda = 0.0;
    if (cfg_.lambda_tilde) {
      lambda = *cfg_.lambda_tilde;
    } else if (cfg_.tuning == TuningMode::CrossValidation) {
      lambda = cv_nodewise(*folds_, i, nodewise_lambda_grid(sigma_hat_, i, data_.n()), cfg_.lasso).best;
    } else {
      lambda = cfg_.lambda_tilde_scale *
               std::sqrt(std::log(static_cast<double>(p)) / static_cast<double>(data_.n()));
    }
    FeatureCache c;
    c.pc = nodewise_precision_column_gram(sigma_hat_, i, lambda, cfg_.lasso);
    c.var_term = precision_variance(c.pc, sigma_hat_);
    return c;
  });
}

void ThetaInferenceEngine::prepare(const std::vector<Index>& features,
                                   const std::vector<Index>& responses) {
  for (Index i : features)
    if (i < 0 || i >= data_.p()) throw ConfigError("feature index out of range");
  for (Index j : responses)
    if (j < 0 || j >= data_.m()) throw ConfigError("response index out of range");
  const bool cv = cfg_.tuning == TuningMode::CrossValidation;
  if (cv && (!cfg_.lambda3 || !cfg_.lambda_tilde)) folds();

  std::vector<Index> todo_j, todo_i;
  for (Index j : responses)
    if (!responses_[static_cast<std::size_t>(j)]) todo_j.push_back(j);
  for (Index i : features)
    if (!features_[static_cast<std::size_t>(i)]) todo_i.push_back(i);
  std::vector<std::optional<ResponseCache>> rc(todo_j.size());
  std::vector<std::optional<FeatureCache>> fc(todo_i.size());
  parallel_for(todo_j.size() + todo_i.size(), cfg_.threads, [&](std::size_t t) {
    if (t < todo_j.size())
      rc[t] = compute_response(todo_j[t]);
    else
      fc[t - todo_j.size()] = compute_feature(todo_i[t - todo_j.size()]);
  });
  for (std::size_t t = 0; t < todo_j.size(); ++t)
    responses_[static_cast<std::size_t>(todo_j[t])] = std::move(rc[t]);
  for (std::size_t t = 0; t < todo_i.size(); ++t)
    features_[static_cast<std::size_t>(todo_i[t])] = std::move(fc[t]);
}

void ThetaInferenceEngine::prepare_all() {
  std::vector<Index> features(static_cast<std::size_t>(data_.p()));
  std::vector<Index> responses(static_cast<std::size_t>(data_.m()));
  for (Index i = 0; i < data_.p(); ++i) features[static_cast<std::size_t>(i)] = i;
  for (Index j = 0; j < data_.m(); ++j) responses[static_cast<std::size_t>(j)] = j;
  prepare(features, responses);
}

const ThetaInferenceEngine::ResponseCache& ThetaInferenceEngine::response(Index j) {
  if (j < 0 || j >= data_.m()) throw ConfigError("response index out of range");
  auto& slot = responses_[static_cast<std::size_t>(j)];
  if (!slot) prepare({}, {j});
  return *slot;
}

const ThetaInferenceEngine::FeatureCache& ThetaInferenceEngine::feature(Index i) {
  if (i < 0 || i >= data_.p()) throw ConfigError("feature index out of range");
  auto& slot = features_[static_cast<std::size_t>(i)];
  if (!slot) prepare({i}, {});
  return *slot;
}

const Vector& ThetaInferenceEngine::projected(Index j) { return response(j).y_tilde; }
const Vector& ThetaInferenceEngine::initial_estimate(Index j) { return response(j).theta_init; }
double ThetaInferenceEngine::lambda3(Index j) { return response(j).lambda3; }
const PrecisionColumn& ThetaInferenceEngine::precision_column(Index i) { return feature(i).pc; }
double ThetaInferenceEngine::var_term(Index i) { return feature(i).var_term; }

ThetaInference ThetaInferenceEngine::infer(Index i, Index j) {
  const ResponseCache& r = response(j);
  const FeatureCache& f = feature(i);
  const double debiased = r.theta_init[i] + f.pc.omega.dot(r.score);
  return in_stage("entry test", [&] {
    return theta_test_ci(i, j, r.theta_init[i], debiased, f.var_term, factors_.sigma2_e[j],
                         data_.n(), cfg_.alpha);
  });
}

ThetaInference infer_entry_pipeline(const Dataset& data, Index i, Index j,
                                    const PipelineConfig& cfg) {
  if (i < 0 || i >= data.p() || j < 0 || j >= data.m())
    throw ConfigError("entry (" + std::to_string(i + 1) + ", " + std::to_string(j + 1) +
                      ") is out of range");
  const HiddenStructure hs = fit_hidden_structure(data, cfg);
  ThetaInferenceEngine engine(data, hs.factors, cfg);
  return engine.infer(i, j);
}

std::vector<HiddenEffectResult> test_hidden_effects(const FactorEstimate& fe, Index n,
                                                    const std::vector<Index>& responses,
                                                    double alpha) {
  std::vector<HiddenEffectResult> out;
  out.reserve(responses.size());
  for (Index j : responses)
    out.push_back(in_stage("hidden-effect test", [&] { return hidden_effect_test(fe, j, n, alpha); }));
  return out;
}

}  // namespace hvinfer
