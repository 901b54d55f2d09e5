#include "sparse_minimax/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "sparse_minimax/design_diagnostics.hpp"

namespace sparse_minimax {

namespace {

inline double soft(double u, double lambda) {
  if (u > lambda) return u - lambda;
  if (u < -lambda) return u + lambda;
  return 0.0;
}

void check_shapes(const Matrix& X, const Vector& y, const char* who) {
  if (X.rows() != y.size()) {
    throw std::invalid_argument(std::string(who) + ": X has " + std::to_string(X.rows()) +
                                " rows but y has length " + std::to_string(y.size()));
  }
  if (X.rows() < 1 || X.cols() < 1) {
    throw std::invalid_argument(std::string(who) + ": empty design");
  }
}

/// Gram block of the working set, grown as columns are added. Entries are
/// X_i^T X_j / n and X_j^T y / n.
class WorkingGram {
 public:
  WorkingGram(const Matrix& X, const Vector& y) : X_(X), y_(y), n_(static_cast<double>(X.rows())) {}

  void add(const std::vector<Eigen::Index>& cols) {
    if (cols.empty()) return;
    const auto old = static_cast<Eigen::Index>(index_.size());
    const auto add_count = static_cast<Eigen::Index>(cols.size());
    index_.insert(index_.end(), cols.begin(), cols.end());
    const auto m = old + add_count;

    Matrix fresh(X_.rows(), add_count);
    for (Eigen::Index c = 0; c < add_count; ++c) fresh.col(c) = X_.col(cols[static_cast<std::size_t>(c)]);

    Matrix grown(m, m);
    grown.topLeftCorner(old, old) = gram_;
    for (Eigen::Index c = 0; c < add_count; ++c) {
      for (Eigen::Index i = 0; i < m; ++i) {
        const double v = X_.col(index_[static_cast<std::size_t>(i)]).dot(fresh.col(c)) / n_;
        grown(i, old + c) = v;
        grown(old + c, i) = v;
      }
    }
    gram_ = std::move(grown);

    Vector cy(m);
    cy.head(old) = xty_;
    for (Eigen::Index c = 0; c < add_count; ++c) cy(old + c) = fresh.col(c).dot(y_) / n_;
    xty_ = std::move(cy);
  }

  const std::vector<Eigen::Index>& index() const { return index_; }
  const Matrix& gram() const { return gram_; }
  const Vector& xty() const { return xty_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(index_.size()); }

  Vector gather(const Vector& full) const {
    Vector out(size());
    for (Eigen::Index i = 0; i < size(); ++i) out(i) = full(index_[static_cast<std::size_t>(i)]);
    return out;
  }
  void scatter(const Vector& local, Vector& full) const {
    for (Eigen::Index i = 0; i < size(); ++i) full(index_[static_cast<std::size_t>(i)]) = local(i);
  }

 private:
  const Matrix& X_;
  const Vector& y_;
  double n_;
  std::vector<Eigen::Index> index_;
  Matrix gram_;
  Vector xty_;
};

Vector residual_gradient(const Matrix& X, const Vector& y, const Vector& b) {
  const double n = static_cast<double>(X.rows());
  Vector r = y;
  for (Eigen::Index j = 0; j < b.size(); ++j) {
    if (b(j) != 0.0) r.noalias() -= b(j) * X.col(j);
  }
  return X.transpose() * r / n;
}

double lasso_kkt_from_gradient(const Vector& g, const Vector& b, double lambda) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < b.size(); ++j) {
    const double v = b(j) != 0.0 ? std::abs(g(j) - lambda * (b(j) > 0 ? 1.0 : -1.0))
                                 : std::max(std::abs(g(j)) - lambda, 0.0);
    worst = std::max(worst, v);
  }
  return worst;
}

// Caps how many columns one expansion may add, keeping the strongest; the
// first gradient at b = 0 can flag far more columns than the final support.
void keep_strongest(std::vector<Eigen::Index>& cols, const Vector& score, Eigen::Index current) {
  const auto cap = static_cast<std::size_t>(std::max<Eigen::Index>(16, 2 * current));
  if (cols.size() <= cap) return;
  std::stable_sort(cols.begin(), cols.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(score(a)) > std::abs(score(b));
  });
  cols.resize(cap);
  std::sort(cols.begin(), cols.end());
}

void validate_lambda_seq(const Vector& lambda, Eigen::Index p) {
  if (lambda.size() != p) throw std::invalid_argument("slope: lambda_seq must have length p");
  for (Eigen::Index i = 0; i < p; ++i) {
    if (!(lambda(i) >= 0.0) || !std::isfinite(lambda(i))) {
      throw std::invalid_argument("slope: lambda_seq must be finite and nonnegative");
    }
    if (i > 0 && lambda(i) > lambda(i - 1)) {
      throw std::invalid_argument("slope: lambda_seq must be non-increasing");
    }
  }
}

}  // namespace

Vector soft_threshold(const Vector& u, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("soft_threshold: lambda must be >= 0");
  Vector out(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) out(i) = soft(u(i), lambda);
  return out;
}

double lambda_eps(double eps, double sigma, Eigen::Index n, Eigen::Index p, Eigen::Index k) {
  if (k <= 0 || p <= k) throw std::invalid_argument("lambda_eps: require 0 < k < p");
  if (n < 1) throw std::invalid_argument("lambda_eps: require n >= 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("lambda_eps: require sigma > 0");
  if (!(eps >= 0.0)) throw std::invalid_argument("lambda_eps: require eps >= 0");
  const double ratio = static_cast<double>(p) / static_cast<double>(k);
  return (1.0 + eps) * sigma * std::sqrt(2.0 * std::log(ratio) / static_cast<double>(n));
}

double default_lasso_tol(const Matrix& X, const Vector& y, double sigma) {
  const double xty = (X.transpose() * y).cwiseAbs().maxCoeff() / static_cast<double>(X.rows());
  return 1e-8 * sigma * std::max(1.0, xty);
}

double lasso_objective(const Matrix& X, const Vector& y, const Vector& b, double lambda) {
  const double n = static_cast<double>(X.rows());
  return (y - X * b).squaredNorm() / (2.0 * n) + lambda * b.lpNorm<1>();
}

double lasso_kkt_residual(const Matrix& X, const Vector& y, const Vector& b, double lambda) {
  check_shapes(X, y, "lasso_kkt_residual");
  return lasso_kkt_from_gradient(residual_gradient(X, y, b), b, lambda);
}

EstimatorResult lasso_fit(const Matrix& X, const Vector& y, const LassoConfig& config) {
  check_shapes(X, y, "lasso_fit");
  if (!(config.lambda >= 0.0)) throw std::invalid_argument("lasso_fit: lambda must be >= 0");
  if (!(config.tol > 0.0)) throw std::invalid_argument("lasso_fit: tol must be > 0");
  if (config.max_iter < 1) throw std::invalid_argument("lasso_fit: max_iter must be >= 1");

  const Eigen::Index p = X.cols();
  const double lambda = config.lambda;
  const double yy_half = y.squaredNorm() / (2.0 * static_cast<double>(X.rows()));

  EstimatorResult result;
  result.beta_hat = Vector::Zero(p);
  Vector& b = result.beta_hat;

  WorkingGram ws(X, y);
  std::vector<char> in_ws(static_cast<std::size_t>(p), 0);
  double inner_tol = config.tol / 4.0;

  Vector g = X.transpose() * y / static_cast<double>(X.rows());
  while (true) {
    result.kkt_residual = lasso_kkt_from_gradient(g, b, lambda);
    if (result.kkt_residual <= config.tol) {
      result.converged = true;
      break;
    }
    if (result.iterations >= config.max_iter) break;

    std::vector<Eigen::Index> violators;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (!in_ws[static_cast<std::size_t>(j)] && std::abs(g(j)) > lambda) violators.push_back(j);
    }
    keep_strongest(violators, g, ws.size());
    if (violators.empty()) {
      inner_tol /= 8.0;
    } else {
      for (const auto j : violators) in_ws[static_cast<std::size_t>(j)] = 1;
      ws.add(violators);
    }

    const Matrix& G = ws.gram();
    const Vector& c = ws.xty();
    Vector bw = ws.gather(b);
    Vector q = ws.gather(g);  // X_W^T (y - X b) / n, kept current across updates

    while (result.iterations < config.max_iter) {
      for (Eigen::Index i = 0; i < ws.size(); ++i) {
        const double gii = G(i, i);
        if (gii <= 0.0) continue;
        const double old = bw(i);
        const double updated = soft(old + q(i) / gii, lambda / gii);
        if (updated != old) {
          const double d = updated - old;
          q.noalias() -= G.col(i) * d;
          bw(i) = updated;
        }
      }
      ++result.iterations;
      result.objective_trace.push_back(yy_half - c.dot(bw) + 0.5 * bw.dot(G * bw) +
                                       lambda * bw.lpNorm<1>());
      double inner = 0.0;
      for (Eigen::Index i = 0; i < ws.size(); ++i) {
        const double v = bw(i) != 0.0 ? std::abs(q(i) - lambda * (bw(i) > 0 ? 1.0 : -1.0))
                                      : std::max(std::abs(q(i)) - lambda, 0.0);
        inner = std::max(inner, v);
      }
      if (inner <= inner_tol) break;
    }
    ws.scatter(bw, b);
    g = residual_gradient(X, y, b);
  }
  result.objective = lasso_objective(X, y, b, lambda);
  return result;
}

Vector slope_lambda_seq(double eps, double sigma, Eigen::Index n, Eigen::Index p, double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("slope_lambda_seq: q must lie in (0, 1)");
  if (!(eps >= 0.0)) throw std::invalid_argument("slope_lambda_seq: eps must be >= 0");
  if (!(sigma > 0.0)) throw std::invalid_argument("slope_lambda_seq: sigma must be > 0");
  if (n < 1 || p < 1) throw std::invalid_argument("slope_lambda_seq: n, p must be positive");
  Vector lambda(p);
  const double scale = sigma * (1.0 + eps) / std::sqrt(static_cast<double>(n));
  for (Eigen::Index i = 1; i <= p; ++i) {
    // 1 - iq/(2p) >= 1/2, so use the upper-tail form to keep precision near 1.
    const double tail = static_cast<double>(i) * q / (2.0 * static_cast<double>(p));
    lambda(i - 1) = scale * -normal_quantile(tail);
  }
  return lambda;
}

Vector prox_sorted_l1(const Vector& u, const Vector& lambda) {
  const Eigen::Index p = u.size();
  if (lambda.size() != p) throw std::invalid_argument("prox_sorted_l1: length mismatch");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(u(a)) > std::abs(u(b));
  });

  // Stack of blocks: [start, end], running sum of (|u| - lambda), block mean.
  std::vector<Eigen::Index> start(static_cast<std::size_t>(p)), end(static_cast<std::size_t>(p));
  std::vector<double> sum(static_cast<std::size_t>(p)), mean(static_cast<std::size_t>(p));
  std::size_t top = 0;
  for (Eigen::Index i = 0; i < p; ++i) {
    start[top] = i;
    end[top] = i;
    sum[top] = std::abs(u(order[static_cast<std::size_t>(i)])) - lambda(i);
    mean[top] = sum[top];
    while (top > 0 && mean[top - 1] <= mean[top]) {
      --top;
      end[top] = i;
      sum[top] += sum[top + 1];
      mean[top] = sum[top] / static_cast<double>(i - start[top] + 1);
    }
    ++top;
  }

  Vector out = Vector::Zero(p);
  for (std::size_t blk = 0; blk < top; ++blk) {
    const double v = std::max(mean[blk], 0.0);
    for (Eigen::Index i = start[blk]; i <= end[blk]; ++i) {
      const Eigen::Index j = order[static_cast<std::size_t>(i)];
      out(j) = u(j) >= 0.0 ? v : -v;
    }
  }
  return out;
}

double sorted_l1_norm(const Vector& b, const Vector& lambda) {
  std::vector<double> mags(static_cast<std::size_t>(b.size()));
  for (Eigen::Index i = 0; i < b.size(); ++i) mags[static_cast<std::size_t>(i)] = std::abs(b(i));
  std::sort(mags.begin(), mags.end(), std::greater<>());
  double total = 0.0;
  for (std::size_t i = 0; i < mags.size(); ++i) total += lambda(static_cast<Eigen::Index>(i)) * mags[i];
  return total;
}

double slope_objective(const Matrix& X, const Vector& y, const Vector& b, const Vector& lambda) {
  const double n = static_cast<double>(X.rows());
  return (y - X * b).squaredNorm() / (2.0 * n) + sorted_l1_norm(b, lambda);
}

double slope_kkt_residual(const Matrix& X, const Vector& y, const Vector& b, const Vector& lambda) {
  check_shapes(X, y, "slope_kkt_residual");
  const Vector g = residual_gradient(X, y, b);
  return (b - prox_sorted_l1(b + g, lambda)).cwiseAbs().maxCoeff();
}

EstimatorResult slope_fit(const Matrix& X, const Vector& y, const SlopeConfig& config) {
  check_shapes(X, y, "slope_fit");
  const Eigen::Index p = X.cols();
  validate_lambda_seq(config.lambda_seq, p);
  if (!(config.tol > 0.0)) throw std::invalid_argument("slope_fit: tol must be > 0");
  if (config.max_iter < 1) throw std::invalid_argument("slope_fit: max_iter must be >= 1");

  const Vector& lambda = config.lambda_seq;
  const double yy_half = y.squaredNorm() / (2.0 * static_cast<double>(X.rows()));

  EstimatorResult result;
  result.beta_hat = Vector::Zero(p);
  Vector& b = result.beta_hat;

  WorkingGram ws(X, y);
  std::vector<char> in_ws(static_cast<std::size_t>(p), 0);
  double inner_tol = config.tol / 4.0;

  while (true) {
    const Vector g = residual_gradient(X, y, b);
    const Vector v = prox_sorted_l1(b + g, lambda);
    result.kkt_residual = (b - v).cwiseAbs().maxCoeff();
    if (result.kkt_residual <= config.tol) {
      result.converged = true;
      break;
    }
    if (result.iterations >= config.max_iter) break;

    std::vector<Eigen::Index> fresh;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (!in_ws[static_cast<std::size_t>(j)] && v(j) != 0.0) fresh.push_back(j);
    }
    keep_strongest(fresh, v, ws.size());
    if (fresh.empty()) {
      inner_tol /= 8.0;
    } else {
      for (const auto j : fresh) in_ws[static_cast<std::size_t>(j)] = 1;
      ws.add(fresh);
    }

    const Matrix& G = ws.gram();
    const Vector& c = ws.xty();
    const Vector lam = lambda.head(ws.size());
    const double L = std::max(Eigen::SelfAdjointEigenSolver<Matrix>(G, Eigen::EigenvaluesOnly)
                                  .eigenvalues()
                                  .maxCoeff(),
                              1e-300);

    Vector x = ws.gather(b);
    Vector yk = x;
    double t = 1.0;
    auto objective = [&](const Vector& w) {
      return yy_half - c.dot(w) + 0.5 * w.dot(G * w) + sorted_l1_norm(w, lam);
    };
    while (result.iterations < config.max_iter) {
      const Vector grad = G * yk - c;
      const Vector next = prox_sorted_l1(yk - grad / L, lam / L);
      ++result.iterations;
      // Gradient-based restart keeps the accelerated iterates from oscillating.
      if ((yk - next).dot(next - x) > 0.0) {
        t = 1.0;
        yk = x;
        continue;
      }
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      yk = next + ((t - 1.0) / t_next) * (next - x);
      x = next;
      t = t_next;
      result.objective_trace.push_back(objective(x));

      const Vector q = c - G * x;
      const double inner = (x - prox_sorted_l1(x + q, lam)).cwiseAbs().maxCoeff();
      if (inner <= inner_tol) break;
    }
    ws.scatter(x, b);
  }
  result.objective = slope_objective(X, y, b, lambda);
  return result;
}

MleResult mle_best_subset(const Matrix& X, const Vector& y, int k, double cap) {
  check_shapes(X, y, "mle_best_subset");
  const int p = static_cast<int>(X.cols());
  if (k < 1 || k > p) throw std::invalid_argument("mle_best_subset: require 1 <= k <= p");
  if (k > X.rows()) throw std::invalid_argument("mle_best_subset: require k <= n");

  MleResult best;
  best.rss = std::numeric_limits<double>::infinity();
  Vector best_coef;
  Matrix XS(X.rows(), k);
  int visited = 0;
  for_each_subset(p, k, cap, "mle_best_subset", [&](const std::vector<int>& S) {
    for (int c = 0; c < k; ++c) XS.col(c) = X.col(S[static_cast<std::size_t>(c)]);
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(XS);
    const Vector coef = cod.solve(y);
    const double rss = (y - XS * coef).squaredNorm();
    ++visited;
    if (rss < best.rss) {
      best.rss = rss;
      best.support = S;
      best_coef = coef;
    }
  });

  best.fit.beta_hat = Vector::Zero(p);
  for (int c = 0; c < k; ++c) best.fit.beta_hat(best.support[static_cast<std::size_t>(c)]) = best_coef(c);
  best.fit.iterations = visited;
  best.fit.objective = best.rss;
  best.fit.kkt_residual = 0.0;
  best.fit.converged = true;
  return best;
}

Vector oracle_estimator(const Vector& beta, const Matrix& X, const Vector& z, double lambda) {
  if (X.cols() != beta.size() || X.rows() != z.size()) {
    throw std::invalid_argument("oracle_estimator: dimension mismatch");
  }
  return soft_threshold(beta + X.transpose() * z / static_cast<double>(X.rows()), lambda);
}

std::string to_string(AggregatedBranch branch) {
  return branch == AggregatedBranch::kLasso ? "lasso" : "mle";
}

AggregatedResult aggregated_estimate(const Instance& instance, int k, double eps,
                                     const AggregatedOptions& options) {
  const Matrix& X = instance.X();
  const Vector& y = instance.y;
  AggregatedResult out;
  out.lambda = lambda_eps(eps, instance.noise.sigma, X.rows(), X.cols(), k);

  EventAOptions event_options;
  event_options.restarts = options.restarts;
  event_options.seed = options.seed;
  event_options.skip_theta_when_norms_fail = true;
  const EventAReport event = event_a_check(X, k, eps, event_options);
  out.column_norm_ok = event.max_col_norm_ok;
  out.theta_ok = event.theta_ok;
  out.theta_upper = event.theta_upper;

  if (event.holds) {
    out.branch = AggregatedBranch::kLasso;
    LassoConfig cfg;
    cfg.lambda = out.lambda;
    cfg.tol = default_lasso_tol(X, y, instance.noise.sigma);
    out.fit = lasso_fit(X, y, cfg);
  } else {
    out.branch = AggregatedBranch::kMle;
    out.fit = mle_best_subset(X, y, k, options.enumeration_cap).fit;
  }
  return out;
}

}  // namespace sparse_minimax
