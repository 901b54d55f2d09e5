#include "sparse_minimax/design_diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "sparse_minimax/parallel.hpp"

namespace sparse_minimax {

namespace {

// Above this width the Gram is not formed; products go through X directly.
constexpr Eigen::Index kDenseGramLimit = 2500;

double l1_over_l2(const Vector& v) {
  const double l2 = v.norm();
  return l2 > 0.0 ? v.lpNorm<1>() / l2 : 0.0;
}

struct Candidate {
  double ratio = std::numeric_limits<double>::infinity();
  Vector d;
};

// Smallest ratio wins; equal ratios fall back to the raw bytes of the vector
// so that the choice never depends on evaluation order.
bool better(const Candidate& a, const Candidate& b) {
  if (a.ratio != b.ratio) return a.ratio < b.ratio;
  if (b.d.size() == 0) return a.d.size() != 0;
  if (a.d.size() == 0) return false;
  return std::memcmp(a.d.data(), b.d.data(), sizeof(double) * static_cast<std::size_t>(a.d.size())) < 0;
}

class QuadForm {
 public:
  explicit QuadForm(const Matrix& X) : X_(X), n_(static_cast<double>(X.rows())) {
    if (X.cols() <= kDenseGramLimit) {
      gram_ = X.transpose() * X / n_;
      dense_ = true;
    }
  }
  bool dense() const { return dense_; }
  const Matrix& gram() const { return gram_; }

  Vector apply(const Vector& d) const {
    if (dense_) return gram_ * d;
    const Vector xd = X_ * d;
    return X_.transpose() * xd / n_;
  }
  double value(const Vector& d) const { return d.dot(apply(d)); }

  double top_eigenvalue() const {
    if (dense_) {
      return Eigen::SelfAdjointEigenSolver<Matrix>(gram_, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    }
    // Power iteration from a fixed start; only used for a step size.
    Vector v = Vector::Ones(X_.cols()).normalized();
    double lam = 0.0;
    for (int it = 0; it < 100; ++it) {
      Vector w = apply(v);
      const double next = w.norm();
      if (next == 0.0) return 0.0;
      v = w / next;
      if (std::abs(next - lam) <= 1e-6 * next) {
        lam = next;
        break;
      }
      lam = next;
    }
    return lam * 1.05;
  }

 private:
  const Matrix& X_;
  double n_;
  Matrix gram_;
  bool dense_ = false;
};

Candidate descend(const QuadForm& q, Vector d, double radius, double step0, int max_iter) {
  d = project_cone_sphere(d, radius);
  double f = q.value(d);
  double step = step0;
  for (int it = 0; it < max_iter; ++it) {
    const Vector grad = 2.0 * q.apply(d);
    bool moved = false;
    while (step > step0 * 1e-8) {
      Vector trial = project_cone_sphere(d - step * grad, radius);
      const double ft = q.value(trial);
      if (ft < f) {
        const double gain = f - ft;
        d = std::move(trial);
        f = ft;
        moved = gain > 1e-14 * std::max(f, 1e-300);
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
    step = std::min(step * 2.0, step0 * 4.0);
  }
  return {std::sqrt(std::max(f, 0.0)), d};
}

}  // namespace

double max_column_norm(const Matrix& X) {
  if (X.cols() == 0) return 0.0;
  return X.colwise().norm().maxCoeff();
}

DeltaConsts delta_consts(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("delta_consts: eps must be > 0");
  const double base = 1.0 + eps / 2.0;
  DeltaConsts out;
  out.delta0 = std::cbrt(base) - 1.0;
  out.c0 = 8.0 * std::sqrt(2.0) / eps * std::pow(base, 2.0 / 3.0) + 2.0 / eps + 2.0;
  return out;
}

double c0_general(double delta0, double delta1, double delta2, double eps) {
  const double denom = (1.0 + eps) - (1.0 + delta0) * (1.0 + delta1) * (1.0 + delta2);
  if (!(denom > 0.0)) {
    throw std::invalid_argument("c0_general: need (1+eps) > (1+delta0)(1+delta1)(1+delta2)");
  }
  return (4.0 * std::sqrt(2.0) * (1.0 + delta0) * (1.0 + delta2) + 1.0 + eps) / denom;
}

double sparse_min_eig(const Matrix& X, int s, double cap) {
  const int p = static_cast<int>(X.cols());
  if (s < 1 || s > p) throw std::invalid_argument("sparse_min_eig: require 1 <= s <= p");
  const Matrix G = X.transpose() * X / static_cast<double>(X.rows());
  double best = std::numeric_limits<double>::infinity();
  Matrix block(s, s);
  for_each_subset(p, s, cap, "sparse_min_eig", [&](const std::vector<int>& S) {
    for (int a = 0; a < s; ++a) {
      for (int b = 0; b < s; ++b) block(a, b) = G(S[static_cast<std::size_t>(a)], S[static_cast<std::size_t>(b)]);
    }
    const double v = s == 1 ? block(0, 0)
                            : Eigen::SelfAdjointEigenSolver<Matrix>(block, Eigen::EigenvaluesOnly)
                                  .eigenvalues()
                                  .minCoeff();
    best = std::min(best, v);
  });
  return std::max(best, 0.0);
}

double cone_ratio(const Matrix& X, const Vector& d) {
  const double dn = d.norm();
  if (dn == 0.0) throw std::invalid_argument("cone_ratio: zero direction");
  return (X * d).norm() / (std::sqrt(static_cast<double>(X.rows())) * dn);
}

Vector project_cone_sphere(const Vector& v, double radius) {
  if (!(radius >= 1.0)) throw std::invalid_argument("project_cone_sphere: radius must be >= 1");
  const double vn = v.norm();
  if (vn == 0.0) throw std::invalid_argument("project_cone_sphere: zero vector");
  if (l1_over_l2(v) <= radius) return v / vn;

  const Vector mag = v.cwiseAbs();
  const double top = mag.maxCoeff();
  auto shrink = [&](double t) {
    Vector out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double m = std::max(mag(i) - t, 0.0);
      out(i) = v(i) >= 0.0 ? m : -m;
    }
    return out;
  };

  // The ratio of the thresholded vector falls as t grows, so bisect on t and
  // keep the feasible end.
  double lo = 0.0;
  double hi = top;
  Vector feasible;
  for (int it = 0; it < 200 && hi - lo > 1e-10 * top; ++it) {
    const double mid = 0.5 * (lo + hi);
    Vector trial = shrink(mid);
    if (trial.norm() > 0.0 && l1_over_l2(trial) <= radius) {
      hi = mid;
      feasible = std::move(trial);
    } else {
      lo = mid;
    }
  }
  if (feasible.size() == 0 || feasible.norm() == 0.0) {
    // Many tied maxima: fall back to the first largest coordinate.
    Eigen::Index j = 0;
    mag.maxCoeff(&j);
    feasible = Vector::Zero(v.size());
    feasible(j) = v(j) >= 0.0 ? 1.0 : -1.0;
  }
  return feasible / feasible.norm();
}

SreEstimate sre_theta_estimate(const Matrix& X, int k, double c0, const SreOptions& options) {
  if (options.restarts < 1) throw std::invalid_argument("sre_theta_estimate: restarts must be >= 1");
  if (k < 1) throw std::invalid_argument("sre_theta_estimate: k must be >= 1");
  if (!(c0 >= 0.0)) throw std::invalid_argument("sre_theta_estimate: c0 must be >= 0");
  const Eigen::Index p = X.cols();
  const double radius = (1.0 + c0) * std::sqrt(static_cast<double>(k));
  const QuadForm q(X);
  const double sqrt_n = std::sqrt(static_cast<double>(X.rows()));

  SreEstimate est;
  est.restarts = options.restarts;
  Candidate best;
  auto offer = [&](Candidate c) {
    if (better(c, best)) best = std::move(c);
  };

  // Every basis vector lies in the cone.
  for (Eigen::Index j = 0; j < p; ++j) {
    Candidate c;
    c.ratio = X.col(j).norm() / sqrt_n;
    c.d = Vector::Zero(p);
    c.d(j) = 1.0;
    offer(std::move(c));
  }

  std::vector<Vector> starts;
  starts.push_back(best.d);

  if (q.dense()) {
    const Matrix& G = q.gram();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(G);
    Vector vmin = eig.eigenvectors().col(0);
    if (radius >= std::sqrt(static_cast<double>(p)) || l1_over_l2(vmin) <= radius) {
      Candidate c;
      c.d = vmin / vmin.norm();
      c.ratio = std::sqrt(std::max(q.value(c.d), 0.0));
      offer(std::move(c));
      est.exact = true;
    }
    starts.push_back(vmin);

    // Most correlated pair: (e_i - sign e_j) / sqrt(2) exposes near-duplicate columns.
    if (p >= 2) {
      double top = -1.0;
      Eigen::Index bi = 0, bj = 1;
      for (Eigen::Index j = 1; j < p; ++j) {
        for (Eigen::Index i = 0; i < j; ++i) {
          const double scale = std::sqrt(G(i, i) * G(j, j));
          const double corr = scale > 0.0 ? std::abs(G(i, j)) / scale : 0.0;
          if (corr > top) {
            top = corr;
            bi = i;
            bj = j;
          }
        }
      }
      Candidate c;
      c.d = Vector::Zero(p);
      c.d(bi) = 1.0 / std::sqrt(2.0);
      c.d(bj) = (G(bi, bj) >= 0.0 ? -1.0 : 1.0) / std::sqrt(2.0);
      c.ratio = std::sqrt(std::max(q.value(c.d), 0.0));
      starts.push_back(c.d);
      offer(std::move(c));
    }
  }

  if (!est.exact) {
    const double L = q.top_eigenvalue();
    const double step0 = L > 0.0 ? 0.5 / L : 1.0;
    const std::size_t fixed = starts.size();
    const std::size_t total = fixed + static_cast<std::size_t>(options.restarts);
    std::vector<Candidate> results(total);
    parallel_for(total, options.threads, [&](std::size_t r) {
      Vector start;
      if (r < fixed) {
        start = starts[r];
      } else {
        CounterRng rng(SeedSpec{options.seed, r - fixed}, StreamPurpose::kSreStart);
        start.resize(p);
        for (Eigen::Index i = 0; i < p; ++i) start(i) = rng.next_normal();
      }
      results[r] = descend(q, start, radius, step0, options.max_iter);
    });
    for (auto& c : results) offer(std::move(c));
  } else {
    est.restarts = 0;
  }

  est.theta_upper = best.ratio;
  est.argmin_vector = std::move(best.d);
  return est;
}

EventAReport event_a_check(const Matrix& X, int k, double eps, const EventAOptions& options) {
  const DeltaConsts dc = delta_consts(eps);
  EventAReport report;
  report.delta0 = dc.delta0;
  report.c0 = dc.c0;
  const double sqrt_n = std::sqrt(static_cast<double>(X.rows()));
  report.max_col_norm = max_column_norm(X);
  report.col_norm_limit = (1.0 + dc.delta0) * sqrt_n;
  report.max_col_norm_ok = report.max_col_norm <= report.col_norm_limit;
  report.theta_threshold = 1.0 - dc.delta0;

  if (report.max_col_norm_ok || !options.skip_theta_when_norms_fail) {
    SreOptions sre;
    sre.restarts = options.restarts;
    sre.seed = options.seed;
    sre.threads = options.threads;
    const SreEstimate est = sre_theta_estimate(X, k, dc.c0, sre);
    report.theta_evaluated = true;
    report.theta_exact = est.exact;
    report.theta_upper = est.theta_upper;
    report.theta_ok = est.theta_upper >= report.theta_threshold;
  }
  report.holds = report.max_col_norm_ok && report.theta_ok;
  return report;
}

GramWindow gram_eig_window(const Matrix& X, const std::vector<Eigen::Index>& S, double delta) {
  if (S.empty()) throw std::invalid_argument("gram_eig_window: empty support");
  const auto s = static_cast<Eigen::Index>(S.size());
  Matrix XS(X.rows(), s);
  for (Eigen::Index c = 0; c < s; ++c) {
    const auto j = S[static_cast<std::size_t>(c)];
    if (j < 0 || j >= X.cols()) throw std::invalid_argument("gram_eig_window: index out of range");
    XS.col(c) = X.col(j);
  }
  const Matrix G = XS.transpose() * XS / static_cast<double>(X.rows());
  const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(G, Eigen::EigenvaluesOnly).eigenvalues();
  GramWindow w;
  w.sigma_max = std::max(ev.maxCoeff(), 0.0);
  w.sigma_min = std::clamp(ev.minCoeff(), 0.0, w.sigma_max);
  w.rank_deficient = s > X.rows();
  if (w.rank_deficient) w.sigma_min = 0.0;
  w.ok = !w.rank_deficient && w.sigma_min >= 1.0 - delta && w.sigma_max <= 1.0 + delta;
  return w;
}

}  // namespace sparse_minimax
