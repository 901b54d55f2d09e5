#include "sparse_minimax/proof_events.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "sparse_minimax/design_diagnostics.hpp"

namespace sparse_minimax {

namespace {

bool support_inside(const Vector& b, const std::vector<char>& mask) {
  for (Eigen::Index j = 0; j < b.size(); ++j) {
    if (b(j) != 0.0 && !mask[static_cast<std::size_t>(j)]) return false;
  }
  return true;
}

void check_unit(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0)) {
    throw std::invalid_argument(std::string("stochastic error params: ") + name + " must lie in (0, 1)");
  }
}

}  // namespace

std::vector<Eigen::Index> resolvent_set(const Matrix& X, const Vector& z,
                                        const std::vector<Eigen::Index>& S, Eigen::Index k_star) {
  const Eigen::Index p = X.cols();
  const auto s = static_cast<Eigen::Index>(S.size());
  if (k_star <= s) throw std::invalid_argument("resolvent_set: k_star must exceed |S|");
  if (k_star >= p) throw std::invalid_argument("resolvent_set: k_star must be < p");
  if (X.rows() != z.size()) throw std::invalid_argument("resolvent_set: z length != n");

  std::vector<char> in_s(static_cast<std::size_t>(p), 0);
  for (const auto j : S) {
    if (j < 0 || j >= p) throw std::invalid_argument("resolvent_set: support index out of range");
    in_s[static_cast<std::size_t>(j)] = 1;
  }
  const Vector score = (X.transpose() * z).cwiseAbs();
  std::vector<Eigen::Index> rest;
  rest.reserve(static_cast<std::size_t>(p - s));
  for (Eigen::Index j = 0; j < p; ++j) {
    if (!in_s[static_cast<std::size_t>(j)]) rest.push_back(j);
  }
  const auto take = static_cast<std::size_t>(k_star - s);
  std::partial_sort(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(take), rest.end(),
                    [&](Eigen::Index a, Eigen::Index b) {
                      return score(a) != score(b) ? score(a) > score(b) : a < b;
                    });
  std::vector<Eigen::Index> out(S.begin(), S.end());
  out.insert(out.end(), rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(take));
  std::sort(out.begin(), out.end());
  return out;
}

ResolventReport b_delta_check(const Instance& instance, const Vector& beta_L, const Vector& beta_O,
                              Eigen::Index k_star) {
  const Matrix& X = instance.X();
  ResolventReport report;
  report.k_star = k_star;
  report.s_star = resolvent_set(X, instance.noise.z, instance.signal.support, k_star);

  std::vector<char> mask(static_cast<std::size_t>(X.cols()), 0);
  for (const auto j : report.s_star) mask[static_cast<std::size_t>(j)] = 1;
  report.contains_all = support_inside(beta_L, mask) && support_inside(beta_O, mask) &&
                        support_inside(instance.signal.dense(), mask);

  const GramWindow w = gram_eig_window(X, report.s_star, 0.0);
  report.eig_min = w.sigma_min;
  report.eig_max = w.sigma_max;
  report.delta_emp = std::max(1.0 - w.sigma_min, w.sigma_max - 1.0);
  return report;
}

const char* to_string(GapStatus status) {
  switch (status) {
    case GapStatus::kHolds: return "holds";
    case GapStatus::kViolated: return "violated";
    case GapStatus::kVacuous: return "vacuous";
  }
  return "vacuous";
}

GapCheck oracle_lasso_gap_check(const Vector& beta, const Vector& beta_L, const Vector& beta_O,
                                const ResolventReport& report, double tol) {
  GapCheck out;
  out.lhs = (beta_O - beta_L).norm();
  out.slack = 10.0 * tol * std::sqrt(static_cast<double>(beta.size()));
  if (!report.contains_all || !(report.delta_emp < 1.0)) {
    out.status = GapStatus::kVacuous;
    return out;
  }
  out.rhs = report.delta_emp / (1.0 - report.delta_emp) * (beta_O - beta).norm();
  out.status = out.lhs <= out.rhs + out.slack ? GapStatus::kHolds : GapStatus::kViolated;
  return out;
}

void StochasticErrorParams::validate() const {
  check_unit(delta0, "delta0");
  check_unit(delta1, "delta1");
  check_unit(delta2, "delta2");
  check_unit(delta3, "delta3");
}

double h_func(const Vector& u, Eigen::Index k, Eigen::Index n, double sigma, double delta1, double delta2) {
  const Eigen::Index p = u.size();
  if (k < 1 || k > p) throw std::invalid_argument("h_func: require 1 <= k <= p");
  std::vector<double> mags(static_cast<std::size_t>(p));
  for (Eigen::Index i = 0; i < p; ++i) mags[static_cast<std::size_t>(i)] = std::abs(u(i));
  std::sort(mags.begin(), mags.end(), std::greater<>());

  const double nd = static_cast<double>(n);
  const double pd = static_cast<double>(p);
  double head = 0.0;
  for (Eigen::Index j = 1; j <= k; ++j) {
    head += mags[static_cast<std::size_t>(j - 1)] * 4.0 * std::sqrt(std::log(2.0 * pd / static_cast<double>(j)) / nd);
  }
  double tail = 0.0;
  for (Eigen::Index j = k + 1; j <= p; ++j) tail += mags[static_cast<std::size_t>(j - 1)];
  const double tail_weight = std::sqrt(2.0 * std::log(pd / static_cast<double>(k)) / nd);
  return sigma * (1.0 + delta2) * (head + (1.0 + delta1) * tail * tail_weight);
}

double g_func(const Vector& u, const Matrix& X, double sigma, double delta0, double delta2, double delta3) {
  const double n = static_cast<double>(X.rows());
  return sigma * (1.0 + delta2) / delta2 * std::sqrt(2.0 * std::log(1.0 / delta3)) / (n * (1.0 + delta0)) *
         (X * u).norm();
}

std::vector<Vector> stochastic_probe_directions(const Matrix& X, const Vector& z, Eigen::Index k,
                                                int random_count, SeedSpec seed) {
  const Eigen::Index p = X.cols();
  const Vector v = X.transpose() * z;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return std::abs(v(a)) > std::abs(v(b)); });

  // Every mask size up to 2k, then a geometric grid up to p.
  std::vector<Eigen::Index> sizes;
  for (Eigen::Index m = 1; m <= std::min(p, 2 * std::max<Eigen::Index>(k, 1)); ++m) sizes.push_back(m);
  for (double m = static_cast<double>(sizes.back()) * 1.5; m < static_cast<double>(p); m *= 1.5) {
    sizes.push_back(static_cast<Eigen::Index>(m));
  }
  if (sizes.back() != p) sizes.push_back(p);

  std::vector<Vector> out;
  Vector masked = Vector::Zero(p);
  Eigen::Index filled = 0;
  for (const auto m : sizes) {
    for (; filled < m; ++filled) {
      const Eigen::Index j = order[static_cast<std::size_t>(filled)];
      masked(j) = v(j) >= 0.0 ? 1.0 : -1.0;
    }
    out.push_back(masked);
  }

  CounterRng rng(seed, StreamPurpose::kProbe);
  for (int r = 0; r < random_count; ++r) {
    Vector u = Vector::Zero(p);
    if (r % 2 == 0) {
      const Eigen::Index support = std::min<Eigen::Index>(p, std::max<Eigen::Index>(1, k));
      for (Eigen::Index i = 0; i < support; ++i) {
        u(static_cast<Eigen::Index>(rng.next_below(static_cast<std::uint64_t>(p)))) = rng.next_normal();
      }
    } else {
      for (Eigen::Index i = 0; i < p; ++i) u(i) = rng.next_normal();
    }
    out.push_back(std::move(u));
  }
  return out;
}

StochasticCheck stochastic_error_event_check(const Matrix& X, const Vector& z, Eigen::Index k, double sigma,
                                             const StochasticErrorParams& params,
                                             const std::vector<Vector>& u_samples) {
  params.validate();
  StochasticCheck out;
  const double sqrt_n = std::sqrt(static_cast<double>(X.rows()));
  out.applicable = max_column_norm(X) <= (1.0 + params.delta0) * sqrt_n;
  if (!out.applicable) return out;

  const double n = static_cast<double>(X.rows());
  const Vector xtz = X.transpose() * z / n;
  out.worst_margin = -std::numeric_limits<double>::infinity();
  for (const auto& u : u_samples) {
    const double lhs = xtz.dot(u);
    const double h = h_func(u, k, X.rows(), sigma, params.delta1, params.delta2);
    const double g = g_func(u, X, sigma, params.delta0, params.delta2, params.delta3);
    const double margin = lhs - (1.0 + params.delta0) * std::max(h, g);
    out.worst_margin = std::max(out.worst_margin, margin);
    ++out.samples;
    if (margin <= 0.0) ++out.holding;
  }
  out.fraction = out.samples > 0 ? static_cast<double>(out.holding) / out.samples : 1.0;
  if (out.samples == 0) out.worst_margin = 0.0;
  return out;
}

L2Constants lasso_l2_constants(double delta0, double delta2, double eps) {
  L2Constants c;
  const double a = (1.0 + delta0) * (1.0 + delta2);
  c.C1 = (8.0 * a + std::sqrt(2.0) * (1.0 + eps)) / ((1.0 - delta0) * (1.0 - delta0));
  c.C2 = (4.0 * std::sqrt(2.0) * a + 1.0 + eps) /
         (16.0 * std::sqrt(2.0) * (1.0 + delta0) * (1.0 + delta0) * delta2 * delta2);
  return c;
}

double lasso_l2_bound(Eigen::Index k, Eigen::Index n, Eigen::Index p, double sigma, double eps,
                      const StochasticErrorParams& params) {
  params.validate();
  if (k < 1 || p < 2 * k) throw std::invalid_argument("lasso_l2_bound: require p >= 2k, k >= 1");
  if (n < 1) throw std::invalid_argument("lasso_l2_bound: require n >= 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("lasso_l2_bound: require sigma > 0");
  if (!((1.0 + eps) > (1.0 + params.delta0) * (1.0 + params.delta1) * (1.0 + params.delta2))) {
    throw std::invalid_argument("lasso_l2_bound: require (1+eps) > (1+delta0)(1+delta1)(1+delta2)");
  }
  const L2Constants c = lasso_l2_constants(params.delta0, params.delta2, eps);
  const double kl = static_cast<double>(k) * std::log(static_cast<double>(p) / static_cast<double>(k));
  const double nd = static_cast<double>(n);
  return c.C1 * sigma * std::sqrt(kl / nd) + c.C2 * sigma * std::log(1.0 / params.delta3) / std::sqrt(nd * kl);
}

double moment_constant(double q) {
  return 1.0 + q * std::pow(2.0, q - 2.0) * (1.0 + std::tgamma(q));
}

double lasso_moment_bound(double q, Eigen::Index k, Eigen::Index n, Eigen::Index p, double sigma,
                          double eps, double delta0, double delta2) {
  if (!(q >= 2.0)) throw std::invalid_argument("lasso_moment_bound: require q >= 2");
  if (k < 1 || p <= k || n < 1) throw std::invalid_argument("lasso_moment_bound: require 1 <= k < p, n >= 1");
  const L2Constants c = lasso_l2_constants(delta0, delta2, eps);
  const double kl = static_cast<double>(k) * std::log(static_cast<double>(p) / static_cast<double>(k));
  const double nd = static_cast<double>(n);
  const double a = c.C1 * std::sqrt(kl / nd);
  const double b = c.C2 / std::sqrt(nd * kl);
  return moment_constant(q) * std::pow(sigma, q) * (std::pow(a, q) + std::pow(b, q));
}

}  // namespace sparse_minimax
