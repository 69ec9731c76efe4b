#include "hvinfer/simulation.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "hvinfer/error.hpp"
#include "hvinfer/matrix_io.hpp"
#include "hvinfer/parallel.hpp"
#include "hvinfer/random.hpp"

namespace hvinfer {
namespace {

enum Stream : std::uint64_t { kX = 1, kA, kB, kTheta, kW, kE, kPipeline };

Matrix normal_matrix(Index rows, Index cols, CounterRng& rng, double mean, double sd) {
  Matrix out(rows, cols);
  // Row-major fill so that the leading rows do not depend on the row count.
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) out(r, c) = rng.normal(mean, sd);
  return out;
}

std::string format_optional(const std::optional<double>& v) {
  return v ? format_real(*v) : std::string("random");
}

}  // namespace

void DgpConfig::validate() const {
  if (n < 2 || p < 1 || m < 1) throw ConfigError("DGP needs n >= 2, p >= 1, m >= 1");
  if (k < 0) throw ConfigError("DGP: k must be nonnegative");
  if (s < 0 || s > p) throw ConfigError("DGP: s must lie in [0, p]");
  if (s_m < 0 || s_m > m) throw ConfigError("DGP: s_m must lie in [0, m]");
  if (b_m < 0 || b_m > m) throw ConfigError("DGP: b_m must lie in [0, m]");
  if (!(eta >= 0.0)) throw ConfigError("DGP: eta must be nonnegative");
  if (!(sigma_w > 0.0)) throw ConfigError("DGP: sigma_w must be positive");
  if (theta_signal && !std::isfinite(*theta_signal)) throw ConfigError("DGP: signal must be finite");
  if (!(theta_sd >= 0.0 && a_sd >= 0.0 && b_sd >= 0.0))
    throw ConfigError("DGP: standard deviations must be nonnegative");
}

Matrix dgp_covariance(Index p) {
  Matrix sigma(p, p);
  for (Index j = 0; j < p; ++j)
    for (Index k = 0; k < p; ++k) {
      const Index d = j > k ? j - k : k - j;
      sigma(j, k) = ((j + k) % 2 ? -1.0 : 1.0) * std::pow(0.5, static_cast<double>(d));
    }
  return sigma;
}

DgpInstance generate_dgp(const DgpConfig& cfg) {
  cfg.validate();
  const Index n = cfg.n, p = cfg.p, m = cfg.m, k = cfg.k;

  CounterRng rx(derive_seed(cfg.seed, kX));
  const Eigen::LLT<Matrix> chol(dgp_covariance(p));
  const Matrix x = normal_matrix(n, p, rx, 0.0, 1.0) * chol.matrixL().transpose();

  CounterRng ra(derive_seed(cfg.seed, kA));
  const Matrix a = cfg.eta * normal_matrix(p, k, ra, cfg.a_mean, cfg.a_sd);

  CounterRng rb(derive_seed(cfg.seed, kB));
  Matrix b = normal_matrix(k, m, rb, cfg.b_mean, cfg.b_sd);
  b.leftCols(cfg.b_m).setZero();

  CounterRng rt(derive_seed(cfg.seed, kTheta));
  Matrix theta = Matrix::Zero(p, m);
  for (Index i = 0; i < cfg.s; ++i)
    for (Index j = 0; j < cfg.s_m; ++j)
      theta(i, j) = cfg.theta_signal ? *cfg.theta_signal : rt.normal(cfg.theta_mean, cfg.theta_sd);

  CounterRng rw(derive_seed(cfg.seed, kW));
  const Matrix w = normal_matrix(n, k, rw, 0.0, cfg.sigma_w);
  CounterRng re(derive_seed(cfg.seed, kE));
  const Matrix e = normal_matrix(n, m, re, 0.0, 1.0);

  const Matrix z = x * a + w;
  const Matrix y = x * theta + z * b + e;
  DgpInstance out{Dataset(x, y, true), x, y, theta, a, b, z, w, e, (theta.array() != 0.0)};
  return out;
}

Rates rejection_rates(const BoolMatrix& reject, const BoolMatrix& nonnull) {
  if (reject.rows() != nonnull.rows() || reject.cols() != nonnull.cols())
    throw ConfigError("rejection and truth tables differ in shape");
  double null_hits = 0, nulls = 0, alt_hits = 0, alts = 0;
  for (Index c = 0; c < reject.cols(); ++c)
    for (Index r = 0; r < reject.rows(); ++r) {
      if (nonnull(r, c)) {
        alts += 1;
        alt_hits += reject(r, c);
      } else {
        nulls += 1;
        null_hits += reject(r, c);
      }
    }
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  return {nulls > 0 ? null_hits / nulls : nan, alts > 0 ? alt_hits / alts : nan};
}

ExperimentResult aggregate_replications(std::vector<RepDetail> detail) {
  ExperimentResult res;
  res.reps = static_cast<int>(detail.size());
  double t1 = 0.0, pw = 0.0;
  int ok = 0;
  for (const auto& d : detail) {
    if (d.failed) {
      ++res.failures;
      continue;
    }
    ++ok;
    t1 += d.rates.type1;
    pw += d.rates.power;
  }
  if (res.reps > 0 && res.failures * 10 > res.reps) {
    std::string msg = std::to_string(res.failures) + " of " + std::to_string(res.reps) +
                      " replications failed";
    for (const auto& d : detail)
      if (d.failed) {
        msg += "; first failure (rep " + std::to_string(d.rep) + "): " + d.error;
        break;
      }
    throw NumericalError(msg);
  }
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  res.type1 = ok ? t1 / ok : nan;
  res.power = ok ? pw / ok : nan;
  res.detail = std::move(detail);
  return res;
}

namespace {

template <class RepBody>
ExperimentResult replicate(const DgpConfig& cfg, const MethodConfig& method, int reps,
                           double alpha, int threads, RepBody&& body) {
  if (reps < 1) throw ConfigError("need at least one replication");
  cfg.validate();
  std::vector<RepDetail> detail(static_cast<std::size_t>(reps));
  parallel_for(detail.size(), threads, [&](std::size_t r) {
    RepDetail& d = detail[r];
    d.rep = static_cast<int>(r);
    d.seed = derive_seed(cfg.seed, r);
    DgpConfig rep_cfg = cfg;
    rep_cfg.seed = d.seed;
    PipelineConfig pc = method.pipeline;
    pc.alpha = alpha;
    pc.seed = derive_seed(d.seed, kPipeline);
    pc.threads = 1;
    if (method.use_true_k) pc.k = cfg.k;
    try {
      const DgpInstance inst = generate_dgp(rep_cfg);
      body(inst, pc, d);
      d.rates = rejection_rates(d.reject, d.nonnull);
    } catch (const std::exception& e) {
      d.failed = true;
      d.error = e.what();
    }
  });
  return aggregate_replications(std::move(detail));
}

}  // namespace

ExperimentResult run_theta_experiment(const DgpConfig& cfg, const MethodConfig& method, int reps,
                                      double alpha, int threads) {
  return replicate(cfg, method, reps, alpha, threads,
                   [](const DgpInstance& inst, const PipelineConfig& pc, RepDetail& d) {
                     const HiddenStructure hs = fit_hidden_structure(inst.data, pc);
                     d.k_used = hs.factors.k;
                     ThetaInferenceEngine engine(inst.data, hs.factors, pc);
                     engine.prepare_all();
                     const Index p = inst.data.p(), m = inst.data.m();
                     d.reject.resize(p, m);
                     for (Index j = 0; j < m; ++j)
                       for (Index i = 0; i < p; ++i) d.reject(i, j) = engine.infer(i, j).reject;
                     d.nonnull = inst.support;
                   });
}

ExperimentResult run_b_experiment(const DgpConfig& cfg, const MethodConfig& method, int reps,
                                  double alpha, int threads) {
  if (cfg.b_m < 1 || cfg.b_m >= cfg.m) throw ConfigError("B experiment needs 1 <= b_m < m");
  return replicate(cfg, method, reps, alpha, threads,
                   [&](const DgpInstance& inst, const PipelineConfig& pc, RepDetail& d) {
                     const HiddenStructure hs = fit_hidden_structure(inst.data, pc);
                     d.k_used = hs.factors.k;
                     const Index m = inst.data.m();
                     d.reject.resize(1, m);
                     d.nonnull.resize(1, m);
                     for (Index j = 0; j < m; ++j) {
                       d.reject(0, j) =
                           hidden_effect_test(hs.factors, j, inst.data.n(), pc.alpha).reject;
                       d.nonnull(0, j) = j >= cfg.b_m;
                     }
                   });
}

std::vector<SweepRow> run_signal_sweep(const DgpConfig& cfg, const MethodConfig& method,
                                       const std::vector<double>& r_grid, int reps, double alpha,
                                       int threads) {
  if (r_grid.empty()) throw ConfigError("signal grid is empty");
  std::vector<SweepRow> rows;
  for (double r : r_grid) {
    DgpConfig c = cfg;
    c.theta_signal = r;
    rows.push_back({r, run_theta_experiment(c, method, reps, alpha, threads)});
  }
  return rows;
}

void write_experiment_csv(std::ostream& out, const DgpConfig& cfg, double alpha,
                          const ExperimentResult& res) {
  out << "n,p,m,k,eta,s,s_m,b_m,r,alpha,seed,type1,power,reps,failures\n";
  out << cfg.n << ',' << cfg.p << ',' << cfg.m << ',' << cfg.k << ',' << format_real(cfg.eta)
      << ',' << cfg.s << ',' << cfg.s_m << ',' << cfg.b_m << ','
      << format_optional(cfg.theta_signal) << ',' << format_real(alpha) << ',' << cfg.seed << ','
      << format_real(res.type1) << ',' << format_real(res.power) << ',' << res.reps << ','
      << res.failures << '\n';
}

void write_sweep_csv(std::ostream& out, const DgpConfig& cfg, double alpha,
                     const std::vector<SweepRow>& rows) {
  out << "n,p,m,k,eta,s,s_m,r,alpha,seed,type1,power,reps,failures\n";
  for (const auto& row : rows) {
    out << cfg.n << ',' << cfg.p << ',' << cfg.m << ',' << cfg.k << ',' << format_real(cfg.eta)
        << ',' << cfg.s << ',' << cfg.s_m << ',' << format_real(row.r) << ','
        << format_real(alpha) << ',' << cfg.seed << ',' << format_real(row.result.type1) << ','
        << format_real(row.result.power) << ',' << row.result.reps << ','
        << row.result.failures << '\n';
  }
}

void write_replication_csv(std::ostream& out, const ExperimentResult& res) {
  out << "rep,seed,failed,k_used,type1,power,error\n";
  for (const auto& d : res.detail) {
    std::string err = d.error;
    for (char& c : err)
      if (c == ',' || c == '\n' || c == '\r') c = ' ';
    out << d.rep << ',' << d.seed << ',' << (d.failed ? 1 : 0) << ',' << d.k_used << ','
        << (d.failed ? std::string() : format_real(d.rates.type1)) << ','
        << (d.failed ? std::string() : format_real(d.rates.power)) << ',' << err << '\n';
  }
}

}  // namespace hvinfer
