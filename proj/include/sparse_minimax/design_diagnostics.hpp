#pragma once

#include <cstdint>
#include <vector>

#include "sparse_minimax/design_gen.hpp"
#include "sparse_minimax/numerics.hpp"

namespace sparse_minimax {

/// max_j ||X_j||_2.
double max_column_norm(const Matrix& X);

struct DeltaConsts {
  double delta0 = 0.0;
  double c0 = 0.0;
};

/// delta0 = (1 + eps/2)^{1/3} - 1 and
/// c0 = 8 sqrt(2) / eps * (1 + eps/2)^{2/3} + 2 / eps + 2.
DeltaConsts delta_consts(double eps);

/// (4 sqrt(2)(1+d0)(1+d2) + 1 + eps) / ((1+eps) - (1+d0)(1+d1)(1+d2)).
double c0_general(double delta0, double delta1, double delta2, double eps);

/// Exact V_s: min over |S| = s of the smallest eigenvalue of X_S^T X_S / n.
double sparse_min_eig(const Matrix& X, int s, double cap = kDefaultEnumerationCap);

/// ||X d||_2 / (sqrt(n) ||d||_2).
double cone_ratio(const Matrix& X, const Vector& d);

/// Nearest-direction map onto {||d||_1 <= radius ||d||_2, ||d||_2 = 1}:
/// soft-threshold at the level where the l1/l2 ratio equals radius, then
/// normalize. Vectors already inside the cone are only normalized.
Vector project_cone_sphere(const Vector& v, double radius);

struct SreOptions {
  int restarts = 64;
  std::uint64_t seed = 0;
  int max_iter = 400;
  int threads = 1;
};

struct SreEstimate {
  /// Smallest cone ratio found; an upper bound on theta(k, c0).
  double theta_upper = 0.0;
  int restarts = 0;
  Vector argmin_vector;
  /// True when the cone covers the minimal eigenvector of the Gram (or all of
  /// R^p), so theta_upper is the exact minimum.
  bool exact = false;
};

SreEstimate sre_theta_estimate(const Matrix& X, int k, double c0, const SreOptions& options = {});

struct EventAOptions {
  int restarts = 64;
  std::uint64_t seed = 0;
  int threads = 1;
  /// Skip the cone search when the column-norm branch already fails.
  bool skip_theta_when_norms_fail = false;
};

struct EventAReport {
  double delta0 = 0.0;
  double c0 = 0.0;
  double max_col_norm = 0.0;
  double col_norm_limit = 0.0;
  bool max_col_norm_ok = false;
  double theta_upper = 0.0;
  double theta_threshold = 0.0;
  bool theta_evaluated = false;
  bool theta_exact = false;
  bool theta_ok = false;
  bool holds = false;
};

EventAReport event_a_check(const Matrix& X, int k, double eps, const EventAOptions& options = {});

struct GramWindow {
  /// Extreme eigenvalues of X_S^T X_S / n.
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  bool ok = false;
  bool rank_deficient = false;
};

GramWindow gram_eig_window(const Matrix& X, const std::vector<Eigen::Index>& S, double delta);

}  // namespace sparse_minimax
