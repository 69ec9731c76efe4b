#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "artifacts.hpp"
#include "hvinfer/error.hpp"
#include "hvinfer/matrix_io.hpp"
#include "hvinfer/parallel.hpp"
#include "hvinfer/pipeline.hpp"
#include "hvinfer/simulation.hpp"
#include "hvinfer_cli/cli.hpp"

namespace hvinfer::cli {
namespace fs = std::filesystem;

namespace {

struct CommonOptions {
  std::string out;
  std::uint64_t seed = 0;
  int threads = 1;
  double alpha = 0.05;
  std::string correction = "none";
};

struct DataOptions {
  std::string x;
  std::string y;
  bool header = false;
  std::string fit_dir;
};

struct MethodOptions {
  std::string tuning = "cv";
  std::optional<int> k;
  int k_bar = 0;
  double c0 = 1.0;
  int folds = 5;
  std::optional<double> lambda3;
  std::optional<double> lambda_tilde;
};

struct SimOptions {
  DgpConfig dgp;
  std::optional<double> r;
  int reps = 100;
  std::string mode = "theta";
  bool estimate_k = false;
  std::vector<double> r_grid{0.05, 0.07, 0.1, 0.2, 0.3, 0.5, 1.0, 1.5, 2.0};
};

struct Selection {
  std::vector<std::string> entries;
  std::vector<std::string> responses;
  std::vector<std::string> features;
};

// Everything a single invocation may set; only the chosen subcommand fills it.
struct Invocation {
  CommonOptions common;
  DataOptions data;
  MethodOptions method;
  SimOptions sim;
  Selection sel;
};

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }
Json optional_json(const std::optional<int>& v) { return v ? Json(*v) : Json(nullptr); }

Json real_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (Index k = 0; k < v.size(); ++k) a.push_back(v[k]);
  return a;
}

Json matrix_json(const Matrix& m) {
  Json a = Json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    a.push_back(std::move(row));
  }
  return a;
}

std::string resolve(const std::string& path) {
  return path.empty() ? path : fs::absolute(fs::path(path)).lexically_normal().string();
}

void require_file(const std::string& path, const std::string& flag) {
  if (path.empty()) throw ConfigError(flag + " is required");
  if (!fs::is_regular_file(path)) throw InputError(flag + ": no such file " + path);
}

void validate_common(const CommonOptions& c) {
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ConfigError("--alpha must lie in (0, 1)");
  if (c.threads < 1) throw ConfigError("--threads must be at least 1");
}

PipelineConfig pipeline_config(const MethodOptions& mo, const CommonOptions& co) {
  PipelineConfig cfg;
  cfg.tuning = mo.tuning == "default" ? TuningMode::Default : TuningMode::CrossValidation;
  if (mo.k && *mo.k < 0) throw ConfigError("--k must be nonnegative");
  cfg.k = mo.k;
  cfg.k_bar = mo.k_bar;
  if (!(mo.c0 > 0.0)) throw ConfigError("--c0 must be positive");
  cfg.c0 = mo.c0;
  cfg.cv_folds = mo.folds;
  if (mo.lambda3 && !(*mo.lambda3 >= 0.0)) throw ConfigError("--lambda3 must be nonnegative");
  if (mo.lambda_tilde && !(*mo.lambda_tilde >= 0.0))
    throw ConfigError("--lambda-tilde must be nonnegative");
  cfg.lambda3 = mo.lambda3;
  cfg.lambda_tilde = mo.lambda_tilde;
  cfg.alpha = co.alpha;
  cfg.seed = co.seed;
  cfg.threads = co.threads;
  return cfg;
}

Json common_json(const CommonOptions& c) {
  return Json{{"out", c.out}, {"seed", c.seed}, {"threads", c.threads}, {"alpha", c.alpha},
              {"correction", c.correction}};
}

Json method_json(const MethodOptions& m) {
  return Json{{"tuning", m.tuning},   {"k", optional_json(m.k)},
              {"k_bar", m.k_bar},     {"c0", m.c0},
              {"folds", m.folds},     {"lambda3", optional_json(m.lambda3)},
              {"lambda_tilde", optional_json(m.lambda_tilde)}};
}

Json data_json(const DataOptions& d) {
  return Json{{"x", d.x}, {"y", d.y}, {"header", d.header}, {"fit_dir", d.fit_dir}};
}

Json dgp_json(const SimOptions& s) {
  const auto& d = s.dgp;
  return Json{{"n", d.n},         {"p", d.p},
              {"m", d.m},         {"k", d.k},
              {"eta", d.eta},     {"s", d.s},
              {"sm", d.s_m},      {"bm", d.b_m},
              {"r", optional_json(s.r)}, {"sigma_w", d.sigma_w},
              {"reps", s.reps},   {"mode", s.mode},
              {"estimate_k", s.estimate_k}};
}

struct LoadedData {
  Dataset data;
  std::vector<std::string> x_labels;
  std::vector<std::string> y_labels;
  Json inputs;
};

std::vector<std::string> labels_or_default(std::vector<std::string> labels, Index count,
                                           const std::string& prefix) {
  if (static_cast<Index>(labels.size()) == count) return labels;
  labels.clear();
  for (Index k = 0; k < count; ++k) labels.push_back(prefix + std::to_string(k + 1));
  return labels;
}

LoadedData load_data(const DataOptions& d) {
  require_file(d.x, "--x");
  require_file(d.y, "--y");
  auto x = load_matrix_csv(d.x, d.header);
  auto y = load_matrix_csv(d.y, d.header);
  if (x.values.rows() != y.values.rows())
    throw InputError("X has " + std::to_string(x.values.rows()) + " rows but Y has " +
                     std::to_string(y.values.rows()));
  const Index p = x.values.cols();
  const Index m = y.values.cols();
  LoadedData out{Dataset(std::move(x.values), std::move(y.values), true),
                 labels_or_default(std::move(x.labels), p, "x"),
                 labels_or_default(std::move(y.labels), m, "y"), Json::object()};
  out.inputs["x"] = input_record(d.x);
  out.inputs["y"] = input_record(d.y);
  return out;
}

// Hidden structure either refitted or rebuilt from a previous fit directory.
HiddenStructure hidden_structure(const LoadedData* loaded, const DataOptions& d,
                                 PipelineConfig cfg, Json& inputs) {
  if (d.fit_dir.empty()) {
    if (!loaded) throw ConfigError("either --x/--y or --fit-dir is required");
    return fit_hidden_structure(loaded->data, cfg);
  }
  const fs::path dir(d.fit_dir);
  require_file((dir / "residuals.csv").string(), "--fit-dir");
  require_file((dir / "factors.json").string(), "--fit-dir");
  const auto residuals = load_matrix_csv(dir / "residuals.csv", true).values;
  if (loaded && (residuals.rows() != loaded->data.n() || residuals.cols() != loaded->data.m()))
    throw InputError("residuals in --fit-dir are " + std::to_string(residuals.rows()) + "x" +
                     std::to_string(residuals.cols()) + " but the data are " +
                     std::to_string(loaded->data.n()) + "x" + std::to_string(loaded->data.m()));
  if (!cfg.k) {
    Json factors;
    try {
      factors = Json::parse(read_file(dir / "factors.json"));
      cfg.k = factors.at("k").get<int>();
    } catch (const nlohmann::json::exception& e) {
      throw InputError("malformed factors.json in --fit-dir: " + std::string(e.what()));
    }
  }
  inputs["residuals"] = input_record(dir / "residuals.csv");
  inputs["factors"] = input_record(dir / "factors.json");
  return hidden_structure_from_residuals(residuals, cfg);
}

double corrected_alpha(const CommonOptions& c, std::size_t tests) {
  return c.correction == "bonferroni" ? c.alpha / static_cast<double>(std::max<std::size_t>(tests, 1))
                                      : c.alpha;
}

Json factors_json(const HiddenStructure& hs, const PipelineConfig& cfg, Index n, Index m) {
  const auto& fe = hs.factors;
  Json j;
  j["n"] = n;
  j["m"] = m;
  j["k"] = fe.k;
  j["k_selected"] = hs.k_selected;
  j["k_bar"] = cfg.k_bar > 0 ? cfg.k_bar : default_k_bar(n, m);
  j["singular_values"] = vector_json(hs.svd.d);
  j["d_k"] = vector_json(fe.d_k);
  j["b_hat"] = matrix_json(fe.b_hat);
  j["w_hat"] = matrix_json(fe.w_hat);
  j["v_k"] = matrix_json(fe.v_k);
  j["p_b_perp"] = matrix_json(fe.p_b_perp);
  j["sigma2_e"] = vector_json(fe.sigma2_e);
  Json tuning = Json::array();
  for (const auto& t : hs.lava_tuning)
    tuning.push_back(Json{{"lambda1", real_json(t.lambda1)}, {"lambda2", real_json(t.lambda2)}});
  j["lava_tuning"] = tuning;
  return j;
}

std::string matrix_csv(const Matrix& m, const std::vector<std::string>& labels) {
  std::ostringstream ss;
  write_matrix_csv(ss, m, labels);
  return ss.str();
}

int cmd_fit(const Invocation& inv, std::ostream& out) {
  const auto cfg = pipeline_config(inv.method, inv.common);
  const auto loaded = load_data(inv.data);
  const auto hs = fit_hidden_structure(loaded.data, cfg);

  ArtifactWriter w(inv.common.out);
  w.write("f_hat.csv", matrix_csv(hs.lava.f_hat, loaded.y_labels));
  w.write("residuals.csv", matrix_csv(hs.lava.residuals, loaded.y_labels));
  w.write_json("factors.json", factors_json(hs, cfg, loaded.data.n(), loaded.data.m()));
  w.write_manifest("fit",
                   Json{{"common", common_json(inv.common)},
                        {"data", data_json(inv.data)},
                        {"method", method_json(inv.method)}},
                   inv.common.seed, loaded.inputs,
                   Json{{"k", hs.factors.k}, {"k_selected", hs.k_selected}});
  out << "fit: K = " << hs.factors.k << " (eigenvalue-ratio choice " << hs.k_selected
      << "), artifacts in " << w.dir().string() << "\n";
  return kOk;
}

int cmd_infer_theta(const Invocation& inv, std::ostream& out) {
  auto cfg = pipeline_config(inv.method, inv.common);
  const auto loaded = load_data(inv.data);
  const auto entries = parse_entries(inv.sel.entries, loaded.data.p(), loaded.data.m());
  cfg.alpha = corrected_alpha(inv.common, entries.size());

  Json inputs = loaded.inputs;
  const auto hs = hidden_structure(&loaded, inv.data, cfg, inputs);
  ThetaInferenceEngine engine(loaded.data, hs.factors, cfg);
  std::set<Index> features, responses;
  for (const auto& [i, j] : entries) {
    features.insert(i);
    responses.insert(j);
  }
  engine.prepare({features.begin(), features.end()}, {responses.begin(), responses.end()});

  std::ostringstream csv;
  csv << "i,j,theta_init,theta_debiased,se,ci_low,ci_high,u_stat,p_value,alpha,reject\n";
  int rejected = 0;
  for (const auto& [i, j] : entries) {
    const auto r = engine.infer(i, j);
    rejected += r.reject;
    csv << i + 1 << ',' << j + 1 << ',' << format_real(r.theta_init) << ','
        << format_real(r.theta_debiased) << ',' << format_real(r.se) << ','
        << format_real(r.ci_low) << ',' << format_real(r.ci_high) << ','
        << format_real(r.u_stat) << ',' << format_real(r.p_value) << ','
        << format_real(r.alpha) << ',' << (r.reject ? 1 : 0) << '\n';
  }

  ArtifactWriter w(inv.common.out);
  w.write("theta_results.csv", csv.str());
  w.write_manifest("infer-theta",
                   Json{{"common", common_json(inv.common)},
                        {"data", data_json(inv.data)},
                        {"method", method_json(inv.method)},
                        {"entries", inv.sel.entries}},
                   inv.common.seed, inputs,
                   Json{{"k", hs.factors.k}, {"tests", entries.size()},
                        {"per_test_alpha", cfg.alpha}, {"rejected", rejected}});
  out << "infer-theta: " << entries.size() << " entries, " << rejected << " rejected at alpha "
      << format_real(cfg.alpha) << "\n";
  return kOk;
}

int cmd_test_hidden(const Invocation& inv, std::ostream& out) {
  const auto cfg = pipeline_config(inv.method, inv.common);
  std::optional<LoadedData> loaded;
  if (inv.data.fit_dir.empty() || !inv.data.x.empty() || !inv.data.y.empty())
    loaded.emplace(load_data(inv.data));
  Json inputs = loaded ? loaded->inputs : Json::object();
  const auto hs = hidden_structure(loaded ? &*loaded : nullptr, inv.data, cfg, inputs);
  const Index n = hs.factors.n();
  const auto responses = parse_index_list(inv.sel.responses, hs.factors.m(), "response");
  const double alpha = corrected_alpha(inv.common, responses.size());
  if (hs.factors.k < 1)
    throw ConfigError("hidden-effect tests need at least one factor, but K = 0");
  const auto results = test_hidden_effects(hs.factors, n, responses, alpha);

  std::ostringstream csv;
  csv << "j,r_stat,df,p_value,alpha,reject\n";
  int rejected = 0;
  for (const auto& r : results) {
    rejected += r.reject;
    csv << r.j + 1 << ',' << format_real(r.r_stat) << ',' << r.df << ','
        << format_real(r.p_value) << ',' << format_real(r.alpha) << ',' << (r.reject ? 1 : 0)
        << '\n';
  }
  ArtifactWriter w(inv.common.out);
  w.write("b_tests.csv", csv.str());
  w.write_manifest("test-hidden",
                   Json{{"common", common_json(inv.common)},
                        {"data", data_json(inv.data)},
                        {"method", method_json(inv.method)},
                        {"responses", inv.sel.responses}},
                   inv.common.seed, inputs,
                   Json{{"k", hs.factors.k}, {"tests", results.size()},
                        {"per_test_alpha", alpha}, {"rejected", rejected}});
  out << "test-hidden: " << results.size() << " responses, " << rejected << " rejected\n";
  return kOk;
}

MethodConfig sim_method(const Invocation& inv) {
  MethodConfig mc;
  mc.pipeline = pipeline_config(inv.method, inv.common);
  mc.pipeline.threads = 1;
  mc.use_true_k = !inv.sim.estimate_k && !inv.method.k;
  return mc;
}

DgpConfig sim_dgp(const Invocation& inv) {
  DgpConfig d = inv.sim.dgp;
  d.theta_signal = inv.sim.r;
  d.seed = inv.common.seed;
  if (inv.sim.reps < 1) throw ConfigError("--reps must be at least 1");
  d.validate();
  return d;
}

int cmd_simulate(const Invocation& inv, std::ostream& out) {
  const auto dgp = sim_dgp(inv);
  const auto method = sim_method(inv);
  const bool b_mode = inv.sim.mode == "b";
  const auto res = b_mode ? run_b_experiment(dgp, method, inv.sim.reps, inv.common.alpha,
                                             inv.common.threads)
                          : run_theta_experiment(dgp, method, inv.sim.reps, inv.common.alpha,
                                                 inv.common.threads);
  std::ostringstream summary, detail;
  write_experiment_csv(summary, dgp, inv.common.alpha, res);
  write_replication_csv(detail, res);

  ArtifactWriter w(inv.common.out);
  w.write("simulation.csv", summary.str());
  w.write("replications.csv", detail.str());
  w.write_manifest("simulate",
                   Json{{"common", common_json(inv.common)},
                        {"dgp", dgp_json(inv.sim)},
                        {"method", method_json(inv.method)}},
                   inv.common.seed, Json::object(),
                   Json{{"type1", res.type1}, {"power", res.power}, {"reps", res.reps},
                        {"failures", res.failures}});
  out << "simulate (" << inv.sim.mode << "): type I " << format_real(res.type1) << ", power "
      << format_real(res.power) << " over " << res.reps << " replications (" << res.failures
      << " failed)\n";
  return kOk;
}

int cmd_sweep(const Invocation& inv, std::ostream& out) {
  const auto dgp = sim_dgp(inv);
  if (inv.sim.r_grid.empty()) throw ConfigError("--r-grid is empty");
  for (double r : inv.sim.r_grid)
    if (!std::isfinite(r)) throw ConfigError("--r-grid values must be finite");
  const auto rows = run_signal_sweep(dgp, sim_method(inv), inv.sim.r_grid, inv.sim.reps,
                                     inv.common.alpha, inv.common.threads);
  std::ostringstream csv;
  write_sweep_csv(csv, dgp, inv.common.alpha, rows);

  ArtifactWriter w(inv.common.out);
  w.write("sweep.csv", csv.str());
  Json cfg{{"common", common_json(inv.common)},
           {"dgp", dgp_json(inv.sim)},
           {"method", method_json(inv.method)},
           {"r_grid", inv.sim.r_grid}};
  w.write_manifest("sweep", cfg, inv.common.seed, Json::object(),
                   Json{{"points", rows.size()}});
  out << "sweep: " << rows.size() << " signal values written to " << (w.dir() / "sweep.csv").string()
      << "\n";
  return kOk;
}

void append_curve(std::ostringstream& csv, const std::string& parameter, Index target,
                  const CvResult& cv) {
  for (std::size_t k = 0; k < cv.curve.size(); ++k) {
    const auto& pt = cv.curve[k];
    csv << parameter << ',' << target + 1 << ',' << format_real(pt.candidate) << ','
        << format_real(pt.mean_error) << ',' << format_real(pt.se_error) << ','
        << (pt.failed ? 1 : 0) << ',' << (k == cv.best_index ? 1 : 0) << '\n';
  }
}

int cmd_cv(const Invocation& inv, std::ostream& out) {
  auto cfg = pipeline_config(inv.method, inv.common);
  cfg.tuning = TuningMode::CrossValidation;
  const auto loaded = load_data(inv.data);
  const auto& data = loaded.data;
  const auto responses = parse_index_list(inv.sel.responses, data.m(), "response");
  const auto features = parse_index_list(inv.sel.features, data.p(), "feature");
  const auto hs = fit_hidden_structure(data, cfg);

  const FoldDesigns folds(data.x(), kfold_indices(data.n(), cfg.cv_folds, cfg.seed));
  std::vector<CvResult> lambda3_cv(responses.size());
  parallel_for(responses.size(), cfg.threads, [&](std::size_t r) {
    const Vector y_tilde = projected_response(data.y(), hs.factors, responses[r]);
    const auto grid = lasso_lambda_grid(lasso_lambda_max(data.x(), y_tilde), data.n(), data.p());
    lambda3_cv[r] = cv_lasso(folds, y_tilde, grid, cfg.lasso);
  });
  std::vector<CvResult> nodewise_cv(data.p() >= 2 ? features.size() : 0);
  const Matrix sigma_hat = data.x().transpose() * data.x() / static_cast<double>(data.n());
  parallel_for(nodewise_cv.size(), cfg.threads, [&](std::size_t f) {
    const Index i = features[f];
    nodewise_cv[f] =
        cv_nodewise(folds, i, nodewise_lambda_grid(sigma_hat, i, data.n()), cfg.lasso);
  });

  std::ostringstream csv;
  csv << "parameter,target,candidate,mean_error,se_error,failed,selected\n";
  for (Index j : responses) {
    append_curve(csv, "lambda2", j, hs.lava_cv[static_cast<std::size_t>(j)].lambda2_cv);
    append_curve(csv, "lambda1", j, hs.lava_cv[static_cast<std::size_t>(j)].lambda1_cv);
  }
  for (std::size_t r = 0; r < responses.size(); ++r)
    append_curve(csv, "lambda3", responses[r], lambda3_cv[r]);
  for (std::size_t f = 0; f < nodewise_cv.size(); ++f)
    append_curve(csv, "lambda_tilde", features[f], nodewise_cv[f]);

  ArtifactWriter w(inv.common.out);
  w.write("cv_curves.csv", csv.str());
  w.write_manifest("cv",
                   Json{{"common", common_json(inv.common)},
                        {"data", data_json(inv.data)},
                        {"method", method_json(inv.method)},
                        {"responses", inv.sel.responses},
                        {"features", inv.sel.features}},
                   inv.common.seed, loaded.inputs, Json{{"k", hs.factors.k}});
  out << "cv: curves for " << responses.size() << " responses and " << nodewise_cv.size()
      << " features written to " << (w.dir() / "cv_curves.csv").string() << "\n";
  return kOk;
}

void add_common(CLI::App* sub, CommonOptions& c, bool with_correction) {
  sub->add_option("--out", c.out, "Output directory")->required();
  sub->add_option("--seed", c.seed, "Seed for CV folds and simulated data");
  sub->add_option("--threads", c.threads, "Worker thread cap");
  sub->add_option("--alpha", c.alpha, "Significance level in (0, 1)");
  if (with_correction)
    sub->add_option("--correction", c.correction, "Multiple-testing correction")
        ->check(CLI::IsMember({"none", "bonferroni"}));
}

void add_data(CLI::App* sub, DataOptions& d, bool with_fit_dir) {
  sub->add_option("--x", d.x, "Design matrix CSV (n x p)");
  sub->add_option("--y", d.y, "Response matrix CSV (n x m)");
  sub->add_flag("--header", d.header, "CSV files start with a header row");
  if (with_fit_dir)
    sub->add_option("--fit-dir", d.fit_dir, "Reuse residuals and K from a previous fit");
}

void add_method(CLI::App* sub, MethodOptions& m, bool with_k) {
  sub->add_option("--tuning", m.tuning, "Penalty tuning")
      ->check(CLI::IsMember({"cv", "default"}));
  if (with_k) sub->add_option("--k", m.k, "Number of hidden factors (skips selection)");
  sub->add_option("--k-bar", m.k_bar, "Largest K considered (<= 0: min(n, m) / 2)");
  sub->add_option("--c0", m.c0, "Pilot constant for lambda1");
  sub->add_option("--folds", m.folds, "Cross-validation folds");
  sub->add_option("--lambda3", m.lambda3, "Fixed penalty of the initial lasso");
  sub->add_option("--lambda-tilde", m.lambda_tilde, "Fixed node-wise penalty");
}

void add_dgp(CLI::App* sub, SimOptions& s) {
  auto& d = s.dgp;
  sub->add_option("--n", d.n, "Samples");
  sub->add_option("--p", d.p, "Features");
  sub->add_option("--m", d.m, "Responses");
  sub->add_option("--k", d.k, "Hidden variables");
  sub->add_option("--eta", d.eta, "Scale of the confounding loadings A");
  sub->add_option("--s", d.s, "Nonzero rows of Theta");
  sub->add_option("--sm", d.s_m, "Nonzeros per nonzero row");
  sub->add_option("--bm", d.b_m, "Leading columns of B set to zero");
  sub->add_option("--sigma-w", d.sigma_w, "Standard deviation of W");
  sub->add_option("--reps", s.reps, "Replications");
  sub->add_flag("--estimate-k", s.estimate_k, "Select K by eigenvalue ratio instead of the truth");
}

std::string kind_name(int code) {
  switch (code) {
    case kInputError: return "input";
    case kNumericalError: return "numerical";
    case kConfigError: return "config";
    default: return "internal";
  }
}

int report(int code, const std::string& message, const std::string& out_dir, std::ostream& err,
           Json extra = Json::object()) {
  Json record{{"error", Json{{"kind", kind_name(code)}, {"exit_code", code}, {"message", message}}}};
  for (auto& [k, v] : extra.items()) record["error"][k] = v;
  err << "hvinfer: " << kind_name(code) << " error: " << message << "\n" << record.dump() << "\n";
  if (!out_dir.empty()) write_error_record(out_dir, record);
  return code;
}

// Pulls `--config <file>` / `--config=<file>` out of the arguments.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::string config_path;
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--config") {
      if (k + 1 >= args.size()) throw ConfigError("--config needs a file path");
      config_path = args[++k];
    } else if (args[k].rfind("--config=", 0) == 0) {
      config_path = args[k].substr(9);
    } else {
      rest.push_back(args[k]);
    }
  }
  if (config_path.empty()) return rest;
  if (!fs::is_regular_file(config_path)) throw InputError("--config: no such file " + config_path);
  return merge_config(parse_config_text(read_file(config_path)), rest);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Invocation inv;
  CLI::App app{"Inference for multivariate regression with hidden variables", "hvinfer"};
  app.set_version_flag("--version", HVINFER_VERSION);
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  auto* fit = app.add_subcommand("fit", "Estimate F, residuals and hidden factors");
  add_common(fit, inv.common, false);
  add_data(fit, inv.data, false);
  add_method(fit, inv.method, true);

  auto* theta = app.add_subcommand("infer-theta", "Debiased tests and intervals for Theta entries");
  add_common(theta, inv.common, true);
  add_data(theta, inv.data, true);
  add_method(theta, inv.method, true);
  theta->add_option("--entries", inv.sel.entries, "Entries i:j (1-based, comma-separated) or all")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

  auto* hidden = app.add_subcommand("test-hidden", "Chi-square tests of hidden effects B_j = 0");
  add_common(hidden, inv.common, true);
  add_data(hidden, inv.data, true);
  add_method(hidden, inv.method, true);
  hidden->add_option("--responses", inv.sel.responses, "Responses (1-based) or all")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo type I error and power");
  add_common(simulate, inv.common, false);
  add_method(simulate, inv.method, false);
  add_dgp(simulate, inv.sim);
  simulate->add_option("--r", inv.sim.r, "Fixed nonzero value of Theta");
  simulate->add_option("--mode", inv.sim.mode, "Tests to evaluate")
      ->check(CLI::IsMember({"theta", "b"}));

  auto* sweep = app.add_subcommand("sweep", "Power curve over the Theta signal strength");
  add_common(sweep, inv.common, false);
  add_method(sweep, inv.method, false);
  add_dgp(sweep, inv.sim);
  sweep->add_option("--r-grid", inv.sim.r_grid, "Signal values")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
      ->delimiter(',');

  auto* cv = app.add_subcommand("cv", "Cross-validation curves of every penalty");
  add_common(cv, inv.common, false);
  add_data(cv, inv.data, false);
  add_method(cv, inv.method, false);
  cv->add_option("--responses", inv.sel.responses, "Responses (1-based) or all")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  cv->add_option("--features", inv.sel.features, "Features (1-based) or all")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

  std::string out_dir;
  try {
    auto tokens = expand_config(args);
    std::reverse(tokens.begin(), tokens.end());
    try {
      app.parse(tokens);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
      return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
      return report(kConfigError, e.what(), "", err);
    }

    auto& c = inv.common;
    c.out = resolve(c.out);
    out_dir = c.out;
    inv.data.x = resolve(inv.data.x);
    inv.data.y = resolve(inv.data.y);
    inv.data.fit_dir = resolve(inv.data.fit_dir);
    validate_common(c);

    if (fit->parsed()) return cmd_fit(inv, out);
    if (theta->parsed()) return cmd_infer_theta(inv, out);
    if (hidden->parsed()) return cmd_test_hidden(inv, out);
    if (simulate->parsed()) return cmd_simulate(inv, out);
    if (sweep->parsed()) return cmd_sweep(inv, out);
    if (cv->parsed()) return cmd_cv(inv, out);
    return report(kConfigError, "no command given", "", err);
  } catch (const ParseError& e) {
    return report(kInputError, e.what(), out_dir, err, Json{{"row", e.row()}, {"col", e.col()}});
  } catch (const InputError& e) {
    return report(kInputError, e.what(), out_dir, err);
  } catch (const NumericalError& e) {
    return report(kNumericalError, e.what(), out_dir, err);
  } catch (const ConfigError& e) {
    return report(kConfigError, e.what(), out_dir, err);
  } catch (const std::exception& e) {
    return report(kInternalError, e.what(), out_dir, err);
  }
}

}  // namespace hvinfer::cli
