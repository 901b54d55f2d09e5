#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sparse_minimax/design_gen.hpp"
#include "sparse_minimax/numerics.hpp"

namespace sparse_minimax {

struct LassoConfig {
  double lambda = 0.0;
  double tol = 1e-8;
  int max_iter = 100000;
};

struct SlopeConfig {
  Vector lambda_seq;  // non-increasing, nonnegative, length p
  double tol = 1e-8;
  int max_iter = 100000;
};

struct EstimatorResult {
  Vector beta_hat;
  int iterations = 0;
  double kkt_residual = 0.0;
  double objective = 0.0;
  bool converged = false;
  /// Objective after every sweep (Lasso) or accepted step (SLOPE).
  std::vector<double> objective_trace;
};

/// sign(u_i) * max(|u_i| - lambda, 0).
Vector soft_threshold(const Vector& u, double lambda);

/// (1 + eps) * sigma * sqrt(2 log(p/k) / n).
double lambda_eps(double eps, double sigma, Eigen::Index n, Eigen::Index p, Eigen::Index k);

/// 1e-8 * sigma * max(1, ||X^T y / n||_inf).
double default_lasso_tol(const Matrix& X, const Vector& y, double sigma);

double lasso_objective(const Matrix& X, const Vector& y, const Vector& b, double lambda);

/// max_j of |g_j - lambda sign(b_j)| on the support and (|g_j| - lambda)_+ off
/// it, with g = X^T (y - X b) / n.
double lasso_kkt_residual(const Matrix& X, const Vector& y, const Vector& b, double lambda);

/// Cyclic coordinate descent with exact soft-threshold updates. Sweeps run on a
/// working set (covariance updates on its Gram block); the full KKT residual is
/// checked against tol from the true residual before returning.
EstimatorResult lasso_fit(const Matrix& X, const Vector& y, const LassoConfig& config);

/// sigma (1+eps) n^{-1/2} Phi^{-1}(1 - i q / (2p)), i = 1..p.
Vector slope_lambda_seq(double eps, double sigma, Eigen::Index n, Eigen::Index p, double q);

/// Exact prox of b -> sum_j lambda_j |b|_(j) via pool-adjacent-violators on the
/// sorted magnitudes.
Vector prox_sorted_l1(const Vector& u, const Vector& lambda);

double sorted_l1_norm(const Vector& b, const Vector& lambda);
double slope_objective(const Matrix& X, const Vector& y, const Vector& b, const Vector& lambda);

/// ||b - prox(b + g)||_inf with g = X^T (y - X b) / n; zero iff b is optimal.
double slope_kkt_residual(const Matrix& X, const Vector& y, const Vector& b, const Vector& lambda);

/// Accelerated proximal gradient on a working set, expanded until the full
/// prox-gradient residual is below tol.
EstimatorResult slope_fit(const Matrix& X, const Vector& y, const SlopeConfig& config);

struct MleResult {
  EstimatorResult fit;
  std::vector<int> support;
  double rss = 0.0;
};

/// Exhaustive best-subset least squares over all size-k supports. Ties keep the
/// lexicographically smallest support; rank-deficient blocks use the
/// minimum-norm solution.
MleResult mle_best_subset(const Matrix& X, const Vector& y, int k,
                          double cap = kDefaultEnumerationCap);

/// eta_lambda(beta + X^T z / n); needs the true beta and noise.
Vector oracle_estimator(const Vector& beta, const Matrix& X, const Vector& z, double lambda);

enum class AggregatedBranch { kLasso, kMle };
std::string to_string(AggregatedBranch branch);

struct EventAReport;

struct AggregatedResult {
  EstimatorResult fit;
  AggregatedBranch branch = AggregatedBranch::kLasso;
  double lambda = 0.0;
  /// The well-conditioning gate uses an upper-bound estimate of the cone
  /// constant, so the branch choice is a proxy for the exact event.
  bool event_is_proxy = true;
  bool column_norm_ok = false;
  bool theta_ok = false;
  double theta_upper = 0.0;
};

struct AggregatedOptions {
  int restarts = 64;
  std::uint64_t seed = 0;
  double enumeration_cap = kDefaultEnumerationCap;
};

/// Lasso with lambda_eps when the design passes the well-conditioning check,
/// best-subset MLE otherwise.
AggregatedResult aggregated_estimate(const Instance& instance, int k, double eps,
                                     const AggregatedOptions& options = {});

}  // namespace sparse_minimax
