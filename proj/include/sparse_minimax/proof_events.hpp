#pragma once

#include <cstdint>
#include <vector>

#include "sparse_minimax/design_gen.hpp"

namespace sparse_minimax {

/// S together with the k_star - |S| indices outside S with the largest
/// |X_i^T z|; ties go to the smaller index. Returned sorted.
std::vector<Eigen::Index> resolvent_set(const Matrix& X, const Vector& z,
                                        const std::vector<Eigen::Index>& S, Eigen::Index k_star);

struct ResolventReport {
  std::vector<Eigen::Index> s_star;
  Eigen::Index k_star = 0;
  /// supp(beta_L), supp(beta_O) and supp(beta) all inside s_star.
  bool contains_all = false;
  /// Spectral norm of X_S*^T X_S* / n - I.
  double delta_emp = 0.0;
  double eig_min = 0.0;
  double eig_max = 0.0;
};

ResolventReport b_delta_check(const Instance& instance, const Vector& beta_L, const Vector& beta_O,
                              Eigen::Index k_star);

enum class GapStatus { kHolds, kViolated, kVacuous };
const char* to_string(GapStatus status);

struct GapCheck {
  double lhs = 0.0;    // ||beta_O - beta_L||_2
  double rhs = 0.0;    // delta/(1-delta) ||beta_O - beta||_2
  double slack = 0.0;  // 10 tol sqrt(p)
  GapStatus status = GapStatus::kVacuous;
};

/// Vacuous unless report.contains_all and report.delta_emp < 1. `tol` is the
/// KKT tolerance the Lasso fit was computed to.
GapCheck oracle_lasso_gap_check(const Vector& beta, const Vector& beta_L, const Vector& beta_O,
                                const ResolventReport& report, double tol);

struct StochasticErrorParams {
  double delta0 = 0.1;
  double delta1 = 0.1;
  double delta2 = 0.1;
  double delta3 = 0.05;

  void validate() const;
};

double h_func(const Vector& u, Eigen::Index k, Eigen::Index n, double sigma, double delta1, double delta2);
double g_func(const Vector& u, const Matrix& X, double sigma, double delta0, double delta2, double delta3);

/// Probe directions for the "for all u" event: sign(X^T z) masked to its top m
/// coordinates (these maximize z^T X u / n on the H unit ball), taken for every
/// m <= 2k and a geometric grid beyond, plus random sparse and dense directions.
std::vector<Vector> stochastic_probe_directions(const Matrix& X, const Vector& z, Eigen::Index k,
                                                int random_count, SeedSpec seed);

struct StochasticCheck {
  bool applicable = false;
  int samples = 0;
  int holding = 0;
  double fraction = 0.0;
  /// max over samples of z^T X u / n - (1+delta0) max(H, G).
  double worst_margin = 0.0;
};

StochasticCheck stochastic_error_event_check(const Matrix& X, const Vector& z, Eigen::Index k, double sigma,
                                             const StochasticErrorParams& params,
                                             const std::vector<Vector>& u_samples);

struct L2Constants {
  double C1 = 0.0;
  double C2 = 0.0;
};

/// C1 = (8(1+d0)(1+d2) + sqrt(2)(1+eps)) / (1-d0)^2,
/// C2 = (4 sqrt(2)(1+d0)(1+d2) + 1 + eps) / (16 sqrt(2)(1+d0)^2 d2^2).
L2Constants lasso_l2_constants(double delta0, double delta2, double eps);

/// C1 sigma sqrt(k log(p/k)/n) + C2 sigma log(1/d3) / sqrt(n k log(p/k)).
/// Requires p >= 2k and (1+eps) > (1+d0)(1+d1)(1+d2).
double lasso_l2_bound(Eigen::Index k, Eigen::Index n, Eigen::Index p, double sigma, double eps,
                      const StochasticErrorParams& params);

/// c_q = 1 + q 2^{q-2} (1 + Gamma(q)).
double moment_constant(double q);

/// c_q sigma^q [(C1 sqrt(k log(p/k)/n))^q + (C2 / sqrt(n k log(p/k)))^q].
double lasso_moment_bound(double q, Eigen::Index k, Eigen::Index n, Eigen::Index p, double sigma,
                          double eps, double delta0, double delta2);

}  // namespace sparse_minimax

namespace sparse_minimax {

/// Monte Carlo drivers for the checks above. Replicate r draws its design,
/// noise and support from stream r of `seed`.
struct ProofRunConfig {
  Eigen::Index n = 1000;
  Eigen::Index p = 2000;
  Eigen::Index k = 4;
  double sigma = 1.0;
  double eps = 0.1;
  /// Signal amplitude in units of sigma sqrt(2 log(p/k) / n).
  double amplitude_multiplier = 2.0;
  /// 0 means 2k.
  Eigen::Index k_star = 0;
  int reps = 100;
  std::uint64_t seed = 0;
  int threads = 1;
  StochasticErrorParams stochastic;
  /// Random probe directions per noise draw (on top of the adversarial ones).
  int u_random = 32;

  void validate() const;
  Eigen::Index resolved_k_star() const { return k_star > 0 ? k_star : 2 * k; }
  double amplitude() const;
};

struct GapRun {
  int reps = 0;
  int contained = 0;
  int non_vacuous = 0;
  int holds = 0;
  int violated = 0;
  int not_converged = 0;
  double containment_rate = 0.0;
  double mean_delta_emp = 0.0;
  /// max over non-vacuous replicates of lhs - rhs - slack (<= 0 when all hold).
  double worst_excess = 0.0;
};

GapRun run_gap_experiment(const ProofRunConfig& config);

struct StochasticRun {
  bool applicable = false;
  int reps = 0;
  int failures = 0;
  double failure_fraction = 0.0;
  /// delta3 + 3 sqrt(delta3 (1 - delta3) / reps).
  double tolerated = 0.0;
  double worst_margin = 0.0;
  bool pass = false;
};

/// One design from stream 0, `reps` noise draws; a replicate fails when any
/// probe direction violates the event.
StochasticRun run_stochastic_error(const ProofRunConfig& config);

struct LassoErrorRun {
  int reps = 0;
  int not_converged = 0;
  int event_a_holds = 0;
  double l2_bound = 0.0;
  int below_bound = 0;
  double max_error = 0.0;
  double moment_bound = 0.0;   // q = 2
  double mean_sq_error = 0.0;  // over all replicates
  double mean_sq_error_on_event = 0.0;  // E(||.||^2 1_A)
};

/// Lasso errors against lasso_l2_bound and lasso_moment_bound(2, ...), with
/// delta0 = delta1 = delta2 from delta_consts(eps) and delta3 from the config.
LassoErrorRun run_lasso_error_bounds(const ProofRunConfig& config);

}  // namespace sparse_minimax
