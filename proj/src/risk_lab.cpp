#include "sparse_minimax/risk_lab.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sparse_minimax/design_diagnostics.hpp"
#include "sparse_minimax/estimators.hpp"
#include "sparse_minimax/parallel.hpp"

namespace sparse_minimax {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct ReplicateOut {
  // [estimator][amplitude]
  std::vector<std::vector<double>> err;
};

ReplicateOut run_replicate(const ExperimentConfig& cfg, const std::vector<double>& amplitudes,
                           const Vector& slope_lambda, double lambda, std::size_t r) {
  const SeedSpec seed{cfg.master_seed, static_cast<std::uint64_t>(r)};
  const GaussianDesign design = gen_design(cfg.n, cfg.p, seed);
  const Matrix& X = design.X;
  const SupportRule rule = cfg.random_support ? SupportRule{RandomSupport{seed}} : SupportRule{FirstK{}};
  const Vector z = cfg.noiseless ? Vector::Zero(cfg.n) : gen_noise(cfg.n, cfg.sigma, seed).z;
  const double nd = static_cast<double>(cfg.n);

  std::optional<Vector> xtz;
  std::optional<EventAReport> event;

  ReplicateOut out;
  out.err.assign(cfg.estimators.size(), std::vector<double>(amplitudes.size(), kNaN));
  for (std::size_t a = 0; a < amplitudes.size(); ++a) {
    const SparseSignal signal = make_signal(cfg.p, cfg.k, amplitudes[a], rule);
    const Vector beta = signal.dense();
    const Vector y = model_response(X, signal, z);
    const double tol = default_lasso_tol(X, y, cfg.sigma);

    for (std::size_t e = 0; e < cfg.estimators.size(); ++e) {
      Vector fit;
      bool converged = true;
      switch (cfg.estimators[e]) {
        case EstimatorId::kOracle: {
          if (!xtz) xtz = X.transpose() * z / nd;
          fit = soft_threshold(beta + *xtz, lambda);
          break;
        }
        case EstimatorId::kLasso: {
          const EstimatorResult res = lasso_fit(X, y, LassoConfig{lambda, tol, 100000});
          converged = res.converged;
          fit = res.beta_hat;
          break;
        }
        case EstimatorId::kSlope: {
          const EstimatorResult res = slope_fit(X, y, SlopeConfig{slope_lambda, tol, 100000});
          converged = res.converged;
          fit = res.beta_hat;
          break;
        }
        case EstimatorId::kMle: {
          fit = mle_best_subset(X, y, static_cast<int>(cfg.k), cfg.enumeration_cap).fit.beta_hat;
          break;
        }
        case EstimatorId::kAggregated: {
          // The event depends on X only, so it is evaluated once per replicate;
          // the branches match aggregated_estimate().
          if (!event) {
            EventAOptions opts;
            opts.restarts = cfg.sre_restarts;
            opts.seed = cfg.master_seed ^ static_cast<std::uint64_t>(r);
            opts.skip_theta_when_norms_fail = true;
            event = event_a_check(X, static_cast<int>(cfg.k), cfg.eps, opts);
          }
          if (event->holds) {
            const EstimatorResult res = lasso_fit(X, y, LassoConfig{lambda, tol, 100000});
            converged = res.converged;
            fit = res.beta_hat;
          } else {
            fit = mle_best_subset(X, y, static_cast<int>(cfg.k), cfg.enumeration_cap).fit.beta_hat;
          }
          break;
        }
      }
      if (converged) out.err[e][a] = (fit - beta).squaredNorm();
    }
  }
  return out;
}

}  // namespace

double st_risk_exact(double mu, double tau) {
  if (!(tau >= 0.0)) throw std::invalid_argument("st_risk_exact: tau must be >= 0");
  mu = std::abs(mu);  // r is even in mu; evaluate on one side so that holds exactly
  const double band = normal_cdf(tau - mu) - normal_cdf(-tau - mu);
  return 1.0 + tau * tau + (mu * mu - tau * tau - 1.0) * band - (tau - mu) * normal_pdf(tau + mu) -
         (tau + mu) * normal_pdf(tau - mu);
}

double st_risk_quadrature(double mu, double tau) {
  if (!(tau >= 0.0)) throw std::invalid_argument("st_risk_quadrature: tau must be >= 0");
  using boost::math::quadrature::gauss_kronrod;
  const double inf = std::numeric_limits<double>::infinity();
  const double lo = -tau - mu;  // below: eta = mu + w + tau
  const double hi = tau - mu;   // above: eta = mu + w - tau
  auto below = [&](double w) { return (w + tau) * (w + tau) * normal_pdf(w); };
  auto middle = [&](double w) { return mu * mu * normal_pdf(w); };
  auto above = [&](double w) { return (w - tau) * (w - tau) * normal_pdf(w); };
  constexpr double kTol = 1e-12;
  double total = gauss_kronrod<double, 61>::integrate(below, -inf, lo, 12, kTol);
  if (hi > lo) total += gauss_kronrod<double, 61>::integrate(middle, lo, hi, 12, kTol);
  total += gauss_kronrod<double, 61>::integrate(above, hi, inf, 12, kTol);
  return total;
}

StBoundsReport st_risk_bounds_check(const std::vector<std::pair<double, double>>& grid) {
  StBoundsReport report;
  for (const auto& [mu, tau] : grid) {
    StBoundsRow row;
    row.mu = mu;
    row.tau = tau;
    row.risk = st_risk_exact(mu, tau);
    row.cap_bound = 1.0 + tau * tau;
    row.ok = row.risk <= row.cap_bound;
    if (mu == 0.0) {
      row.zero_bound = std::exp(-tau * tau / 2.0);
      row.ok = row.ok && row.risk <= *row.zero_bound;
    }
    report.all_ok = report.all_ok && row.ok;
    report.rows.push_back(row);
  }
  return report;
}

double minimax_denominator(Eigen::Index n, Eigen::Index p, Eigen::Index k, double sigma) {
  if (k < 1 || p <= k || n < 1) throw std::invalid_argument("minimax_denominator: require 1 <= k < p, n >= 1");
  return 2.0 * sigma * sigma * static_cast<double>(k) *
         std::log(static_cast<double>(p) / static_cast<double>(k)) / static_cast<double>(n);
}

double oracle_risk_prediction(Eigen::Index n, Eigen::Index p, Eigen::Index k, double sigma, double eps) {
  const double lambda = lambda_eps(eps, sigma, n, p, k);
  const double kd = static_cast<double>(k);
  return kd * sigma * sigma / static_cast<double>(n) + kd * lambda * lambda;
}

double oracle_ratio_prediction(Eigen::Index n, Eigen::Index p, Eigen::Index k, double eps) {
  return oracle_risk_prediction(n, p, k, 1.0, eps) / minimax_denominator(n, p, k, 1.0);
}

std::string to_string(EstimatorId id) {
  switch (id) {
    case EstimatorId::kLasso: return "lasso";
    case EstimatorId::kSlope: return "slope";
    case EstimatorId::kMle: return "mle";
    case EstimatorId::kOracle: return "oracle";
    case EstimatorId::kAggregated: return "aggregated";
  }
  return "unknown";
}

EstimatorId parse_estimator(const std::string& name) {
  for (auto id : {EstimatorId::kLasso, EstimatorId::kSlope, EstimatorId::kMle, EstimatorId::kOracle,
                  EstimatorId::kAggregated}) {
    if (to_string(id) == name) return id;
  }
  throw std::invalid_argument("unknown estimator '" + name +
                              "' (expected lasso, slope, mle, oracle or aggregated)");
}

std::vector<double> default_amplitudes(Eigen::Index n, Eigen::Index p, Eigen::Index k, double sigma) {
  const double unit = sigma * std::sqrt(2.0 * std::log(static_cast<double>(p) / static_cast<double>(k)) /
                                        static_cast<double>(n));
  std::vector<double> out;
  for (double m : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) out.push_back(m * unit);
  return out;
}

void ExperimentConfig::validate() const {
  if (n < 1) throw std::invalid_argument("config: n must be >= 1");
  if (k < 1) throw std::invalid_argument("config: k must be >= 1");
  if (k >= p) throw std::invalid_argument("config: k must be < p (got k=" + std::to_string(k) +
                                          ", p=" + std::to_string(p) + ")");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("config: sigma must be > 0");
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw std::invalid_argument("config: eps must be >= 0");
  if (reps < 1) throw std::invalid_argument("config: reps must be >= 1");
  if (estimators.empty()) throw std::invalid_argument("config: at least one estimator is required");
  if (!(slope_q > 0.0 && slope_q < 1.0)) throw std::invalid_argument("config: slope_q must lie in (0, 1)");
  if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
  if (sre_restarts < 1) throw std::invalid_argument("config: sre_restarts must be >= 1");
  for (double a : amplitudes) {
    if (!std::isfinite(a)) throw std::invalid_argument("config: amplitudes must be finite");
  }
  for (auto id : estimators) {
    if ((id == EstimatorId::kMle || id == EstimatorId::kAggregated) && k > n) {
      throw std::invalid_argument("config: best-subset fits need k <= n");
    }
  }
}

std::vector<double> ExperimentConfig::resolved_amplitudes() const {
  return amplitudes.empty() ? default_amplitudes(n, p, k, sigma) : amplitudes;
}

const EstimatorRisk& RiskReport::get(EstimatorId id) const {
  for (const auto& e : estimators) {
    if (e.id == id) return e;
  }
  throw std::invalid_argument("risk report has no estimator " + to_string(id));
}

RiskReport empirical_risk(const ExperimentConfig& config) {
  config.validate();
  RiskReport report;
  report.config = config;
  report.amplitudes = config.resolved_amplitudes();
  report.denominator = minimax_denominator(config.n, config.p, config.k, config.sigma);

  const double lambda = lambda_eps(config.eps, config.sigma, config.n, config.p, config.k);
  Vector slope_lambda;
  for (auto id : config.estimators) {
    if (id == EstimatorId::kSlope) {
      slope_lambda = slope_lambda_seq(config.eps, config.sigma, config.n, config.p, config.slope_q);
    }
  }

  const auto reps = static_cast<std::size_t>(config.reps);
  std::vector<ReplicateOut> slots(reps);
  parallel_for(reps, config.threads, [&](std::size_t r) {
    slots[r] = run_replicate(config, report.amplitudes, slope_lambda, lambda, r);
  });

  for (std::size_t e = 0; e < config.estimators.size(); ++e) {
    EstimatorRisk est;
    est.id = config.estimators[e];
    est.sq_errors.assign(report.amplitudes.size(), std::vector<double>(reps, kNaN));
    double sup = -1.0;
    for (std::size_t a = 0; a < report.amplitudes.size(); ++a) {
      AmplitudeRisk ar;
      ar.amplitude = report.amplitudes[a];
      std::vector<double> kept;
      kept.reserve(reps);
      for (std::size_t r = 0; r < reps; ++r) {
        const double v = slots[r].err[e][a];
        est.sq_errors[a][r] = v;
        if (std::isnan(v)) {
          ++ar.flagged;
        } else {
          kept.push_back(v);
        }
      }
      ar.stats = mean_stderr(kept);
      est.flagged += ar.flagged;
      if (!kept.empty() && ar.stats.mean > sup) {
        sup = ar.stats.mean;
        est.sup_amplitude = ar.amplitude;
      }
      est.per_amplitude.push_back(ar);
    }
    est.minimax_ratio = sup / report.denominator;
    const double share = static_cast<double>(est.flagged) /
                         static_cast<double>(reps * report.amplitudes.size());
    if (share > config.max_flagged_share) {
      est.failed = true;
      report.failed = true;
      report.failure += to_string(est.id) + ": " + std::to_string(est.flagged) +
                        " non-converged fits exceed the tolerated share; ";
    }
    report.estimators.push_back(std::move(est));
  }
  return report;
}

double minimax_ratio(const RiskReport& report, EstimatorId id) {
  return report.get(id).minimax_ratio;
}

SlopeHighProbReport slope_highprob_check(const ExperimentConfig& config, double q) {
  ExperimentConfig cfg = config;
  cfg.estimators = {EstimatorId::kSlope};
  cfg.slope_q = q;
  const auto amps = config.resolved_amplitudes();
  cfg.amplitudes = {*std::max_element(amps.begin(), amps.end())};
  const RiskReport report = empirical_risk(cfg);

  SlopeHighProbReport out;
  out.amplitude = cfg.amplitudes.front();
  out.threshold = (2.0 + 6.0 * cfg.eps) * cfg.sigma * cfg.sigma * static_cast<double>(cfg.k) *
                  std::log(static_cast<double>(cfg.p) / static_cast<double>(cfg.k)) / static_cast<double>(cfg.n);
  out.sq_errors = report.estimators.front().sq_errors.front();
  out.reps = cfg.reps;
  for (double v : out.sq_errors) {
    // A non-converged fit counts against the claim.
    if (std::isnan(v) || v > out.threshold) ++out.exceed;
  }
  out.fraction = static_cast<double>(out.exceed) / static_cast<double>(out.reps);
  return out;
}

MomentEstimate moment_from_errors(const RiskReport& report, EstimatorId id, double m) {
  if (!(m >= 1.0)) throw std::invalid_argument("moment estimate: m must be >= 1");
  const auto& cfg = report.config;
  const double unit = cfg.sigma * cfg.sigma * static_cast<double>(cfg.k) *
                      std::log(static_cast<double>(cfg.p) / static_cast<double>(cfg.k)) / static_cast<double>(cfg.n);
  const EstimatorRisk& est = report.get(id);
  MomentEstimate out;
  for (const auto& errs : est.sq_errors) {
    std::vector<double> powered;
    for (double v : errs) {
      if (!std::isnan(v)) powered.push_back(std::pow(v, m / 2.0));
    }
    const double mean = mean_stderr(powered).mean;
    const double value = std::pow(mean, 2.0 / m) / unit;
    out.normalized.push_back(value);
    out.sup = std::max(out.sup, value);
  }
  return out;
}

MomentEstimate mle_moment_estimate(const ExperimentConfig& config, double m) {
  if (!(m >= 1.0)) throw std::invalid_argument("mle_moment_estimate: m must be >= 1");
  ExperimentConfig cfg = config;
  cfg.estimators = {EstimatorId::kMle};
  return moment_from_errors(empirical_risk(cfg), EstimatorId::kMle, m);
}

}  // namespace sparse_minimax
