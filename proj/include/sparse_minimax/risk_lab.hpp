#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sparse_minimax/design_gen.hpp"
#include "sparse_minimax/numerics.hpp"

namespace sparse_minimax {

/// E(eta_tau(mu + w) - mu)^2 for w ~ N(0,1), closed form.
double st_risk_exact(double mu, double tau);

/// The same expectation by adaptive Gauss-Kronrod quadrature, split at the
/// two kinks of the integrand. Slow; used as the reference for st_risk_exact.
double st_risk_quadrature(double mu, double tau);

struct StBoundsRow {
  double mu = 0.0;
  double tau = 0.0;
  double risk = 0.0;
  /// e^{-tau^2/2}; only checked on the mu = 0 column.
  std::optional<double> zero_bound;
  double cap_bound = 0.0;  // 1 + tau^2
  bool ok = false;
};

struct StBoundsReport {
  std::vector<StBoundsRow> rows;
  bool all_ok = true;
};

StBoundsReport st_risk_bounds_check(const std::vector<std::pair<double, double>>& grid);

/// 2 sigma^2 k log(p/k) / n.
double minimax_denominator(Eigen::Index n, Eigen::Index p, Eigen::Index k, double sigma);

/// k sigma^2 / n + k lambda_eps^2.
double oracle_risk_prediction(Eigen::Index n, Eigen::Index p, Eigen::Index k, double sigma, double eps);

/// oracle_risk_prediction / minimax_denominator = (1+eps)^2 + 1/(2 log(p/k)).
double oracle_ratio_prediction(Eigen::Index n, Eigen::Index p, Eigen::Index k, double eps);

enum class EstimatorId { kLasso, kSlope, kMle, kOracle, kAggregated };
std::string to_string(EstimatorId id);
EstimatorId parse_estimator(const std::string& name);

/// Amplitude grid {0.25, 0.5, 1, 2, 4, 8} * sigma sqrt(2 log(p/k) / n).
std::vector<double> default_amplitudes(Eigen::Index n, Eigen::Index p, Eigen::Index k, double sigma);

struct ExperimentConfig {
  Eigen::Index n = 200;
  Eigen::Index p = 400;
  Eigen::Index k = 4;
  double sigma = 1.0;
  double eps = 0.1;
  std::vector<EstimatorId> estimators{EstimatorId::kOracle};
  /// Absolute signal amplitudes; empty means default_amplitudes().
  std::vector<double> amplitudes;
  int reps = 100;
  std::uint64_t master_seed = 0;
  double slope_q = 0.5;
  bool random_support = false;
  /// Draw z = 0 while keeping sigma in lambda and in the denominator.
  bool noiseless = false;
  double enumeration_cap = kDefaultEnumerationCap;
  int sre_restarts = 64;
  int threads = 1;
  /// Largest tolerated share of non-converged replicates per estimator.
  double max_flagged_share = 0.01;

  /// Throws std::invalid_argument naming the violated precondition.
  void validate() const;
  std::vector<double> resolved_amplitudes() const;
};

struct AmplitudeRisk {
  double amplitude = 0.0;
  MeanStderr stats;
  int flagged = 0;
};

struct EstimatorRisk {
  EstimatorId id = EstimatorId::kOracle;
  std::vector<AmplitudeRisk> per_amplitude;
  /// sq_errors[a][r]; NaN where replicate r was flagged.
  std::vector<std::vector<double>> sq_errors;
  double minimax_ratio = 0.0;
  double sup_amplitude = 0.0;
  int flagged = 0;
  bool failed = false;
};

struct RiskReport {
  ExperimentConfig config;
  std::vector<double> amplitudes;
  double denominator = 0.0;
  std::vector<EstimatorRisk> estimators;
  bool failed = false;
  std::string failure;

  const EstimatorRisk& get(EstimatorId id) const;
};

/// Replicate r draws X, z and (when random) the support from stream r of the
/// master seed and reuses them for every amplitude and estimator.
RiskReport empirical_risk(const ExperimentConfig& config);

/// sup over amplitudes of the mean squared error, over the minimax denominator.
double minimax_ratio(const RiskReport& report, EstimatorId id);

struct SlopeHighProbReport {
  double threshold = 0.0;  // (2 + 6 eps) sigma^2 k log(p/k) / n
  double amplitude = 0.0;
  int exceed = 0;
  int reps = 0;
  double fraction = 0.0;
  std::vector<double> sq_errors;
};

/// SLOPE with slope_lambda_seq(eps, sigma, n, p, q) at the largest amplitude of
/// the config.
SlopeHighProbReport slope_highprob_check(const ExperimentConfig& config, double q);

struct MomentEstimate {
  /// Per amplitude: (mean ||b - beta||^m)^{2/m} / (sigma^2 k log(p/k) / n).
  std::vector<double> normalized;
  double sup = 0.0;
};

MomentEstimate moment_from_errors(const RiskReport& report, EstimatorId id, double m);

/// Best-subset MLE moment over the config's amplitude grid.
MomentEstimate mle_moment_estimate(const ExperimentConfig& config, double m);

}  // namespace sparse_minimax
