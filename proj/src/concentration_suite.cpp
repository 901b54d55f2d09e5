#include "sparse_minimax/concentration_suite.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "sparse_minimax/design_diagnostics.hpp"
#include "sparse_minimax/numerics.hpp"
#include "sparse_minimax/parallel.hpp"
#include "sparse_minimax/proof_events.hpp"
#include "sparse_minimax/rng.hpp"

namespace sparse_minimax {

namespace {

GridPoint gp(std::initializer_list<std::pair<std::string, double>> params) {
  return GridPoint{std::vector<std::pair<std::string, double>>(params)};
}

int as_int(const GridPoint& g, const char* name) {
  const double v = g.get(name);
  if (v != std::floor(v) || v < 1) {
    throw std::invalid_argument(std::string("grid parameter ") + name + " must be a positive integer");
  }
  return static_cast<int>(v);
}

std::vector<double> abs_normals(CounterRng& rng, int p) {
  std::vector<double> g(static_cast<std::size_t>(p));
  for (auto& v : g) v = std::abs(rng.next_normal());
  return g;
}

/// k-th largest (1-based) of values; reorders the input.
double kth_largest(std::vector<double>& values, int k) {
  auto it = values.begin() + (k - 1);
  std::nth_element(values.begin(), it, values.end(), std::greater<>());
  return *it;
}

Matrix normal_matrix(CounterRng& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix A(rows, cols);
  rng.fill_normal(std::span<double>(A.data(), static_cast<std::size_t>(rows * cols)));
  return A;
}

/// Per-replicate statistic: returns the exceedance indicator (0/1) for
/// frequency rows or the sampled value for mean rows.
using Sampler = std::function<double(CounterRng&)>;

struct Cell {
  Sampler sample;
  double bound = 0.0;
};

double pilot_mean_order_stat(int p, int k, std::uint64_t seed, int threads, double& se_out) {
  constexpr int kPilot = 100000;
  std::vector<double> vals(kPilot);
  const std::uint64_t key = hash_label("order_conc:pilot") ^ (static_cast<std::uint64_t>(p) << 20) ^
                            static_cast<std::uint64_t>(k);
  parallel_for(kPilot, threads, [&](std::size_t r) {
    CounterRng rng(SeedSpec{seed, r}, key);
    auto g = abs_normals(rng, p);
    vals[r] = kth_largest(g, k);
  });
  const MeanStderr ms = mean_stderr(vals);
  se_out = ms.stderr_;
  return ms.mean;
}

Cell make_cell(const std::string& id, const GridPoint& g, std::uint64_t seed, int threads) {
  if (id == "chi2_lower") {
    const int d = as_int(g, "d");
    const double tau = g.get("tau");
    if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("chi2_lower: tau must lie in (0, 1)");
    const double bound = std::exp(d / 2.0 * (tau + std::log(1.0 - tau)));
    return {[=](CounterRng& rng) {
              double s = 0.0;
              for (int i = 0; i < d; ++i) {
                const double v = rng.next_normal();
                s += v * v;
              }
              return s < d * (1.0 - tau) ? 1.0 : 0.0;
            },
            bound};
  }
  if (id == "gauss_max") {
    const int p = as_int(g, "p");
    const double u = g.get("u");
    if (p < 2 || u < 0.0) throw std::invalid_argument("gauss_max: require p >= 2, u >= 0");
    const double level = std::sqrt(2.0 * std::log(p)) + u;
    return {[=](CounterRng& rng) {
              double m = 0.0;
              for (int i = 0; i < p; ++i) m = std::max(m, std::abs(rng.next_normal()));
              return m >= level ? 1.0 : 0.0;
            },
            std::exp(-u * u / 2.0)};
  }
  if (id == "order_mean") {
    const int p = as_int(g, "p");
    const int k = as_int(g, "k");
    if (k < 2 || k > p) throw std::invalid_argument("order_mean: require 2 <= k <= p");
    return {[=](CounterRng& rng) {
              auto v = abs_normals(rng, p);
              return kth_largest(v, k);
            },
            std::sqrt(2.0 * std::log(2.0 * p / (k - 1.0)))};
  }
  if (id == "order_conc") {
    const int p = as_int(g, "p");
    const int k = as_int(g, "k");
    const double u = g.get("u");
    if (k > p || u <= 0.0) throw std::invalid_argument("order_conc: require k <= p, u > 0");
    double se = 0.0;
    const double mean = pilot_mean_order_stat(p, k, seed, threads, se);
    // Lowering the centre by the pilot's 3-sigma error can only add exceedances.
    const double level = mean - 3.0 * se + u;
    return {[=](CounterRng& rng) {
              auto v = abs_normals(rng, p);
              return kth_largest(v, k) >= level ? 1.0 : 0.0;
            },
            std::exp(-u * u / 2.0)};
  }
  if (id == "topk_avg") {
    const int p = as_int(g, "p");
    const int s = as_int(g, "s");
    const double t = g.get("t");
    if (s > p || t <= 0.0) throw std::invalid_argument("topk_avg: require s <= p, t > 0");
    const double level = t * std::log(2.0 * p / s);
    return {[=](CounterRng& rng) {
              auto v = abs_normals(rng, p);
              std::partial_sort(v.begin(), v.begin() + s, v.end(), std::greater<>());
              double sum = 0.0;
              for (int j = 0; j < s; ++j) sum += v[static_cast<std::size_t>(j)] * v[static_cast<std::size_t>(j)];
              return sum / s > level ? 1.0 : 0.0;
            },
            std::min(1.0, std::pow(2.0 * p / s, 1.0 - 3.0 * t / 8.0))};
  }
  if (id == "median_event") {
    const int p = as_int(g, "p");
    const int k = as_int(g, "k");
    const double d1 = g.get("delta1");
    if (k >= p || d1 <= 0.0) throw std::invalid_argument("median_event: require k < p, delta1 > 0");
    const double tail_level = (1.0 + d1) * std::sqrt(2.0 * std::log(static_cast<double>(p) / k));
    const double gap = tail_level - std::sqrt(2.0 * std::log(2.0 * p / k));
    if (gap <= 0.0) throw std::invalid_argument("median_event: delta1 too small for this p/k");
    const double bound = std::min(1.0, k / (2.0 * p) + std::exp(-0.5 * gap * gap));
    return {[=](CounterRng& rng) {
              auto v = abs_normals(rng, p);
              std::partial_sort(v.begin(), v.begin() + k + 1, v.end(), std::greater<>());
              bool ok = v[static_cast<std::size_t>(k)] <= tail_level;
              for (int j = 1; j <= k && ok; ++j) {
                ok = v[static_cast<std::size_t>(j - 1)] <= 4.0 * std::sqrt(std::log(2.0 * p / j));
              }
              return ok ? 0.0 : 1.0;
            },
            bound};
  }
  if (id == "gauss_sv") {
    const int N = as_int(g, "N");
    const int n = as_int(g, "n");
    const double t = g.get("t");
    if (N < n || t <= 0.0) throw std::invalid_argument("gauss_sv: require N >= n, t > 0");
    const double lo = std::sqrt(N) - std::sqrt(n) - t;
    const double hi = std::sqrt(N) + std::sqrt(n) + t;
    return {[=](CounterRng& rng) {
              const Matrix A = normal_matrix(rng, N, n);
              const Vector sv = Eigen::JacobiSVD<Matrix>(A).singularValues();
              return (sv.minCoeff() < lo || sv.maxCoeff() > hi) ? 1.0 : 0.0;
            },
            std::min(1.0, 2.0 * std::exp(-t * t / 2.0))};
  }
  if (id == "resolvent_sv") {
    const int n = as_int(g, "n");
    const int p = as_int(g, "p");
    const int k = as_int(g, "k");
    const int ks = as_int(g, "kstar");
    const double t = g.get("t");
    const bool upper = g.has("side") && g.get("side") != 0.0;
    if (!(k < ks && ks < std::min(n, p)) || t <= 0.0) {
      throw std::invalid_argument("resolvent_sv: require k < kstar < min(n, p), t > 0");
    }
    const double base = std::sqrt(1.0 - 1.0 / n) + (upper ? 1.0 : -1.0) * std::sqrt(static_cast<double>(ks) / n);
    const double level = upper ? base + std::sqrt(8.0 * ks * std::log(static_cast<double>(p) / ks) / n) + t
                               : base - t;
    double bound = std::exp(-n * t * t / 2.0);
    if (upper) bound += std::pow(std::sqrt(2.0) * std::exp(1.0) * ks / p, ks);
    std::vector<Eigen::Index> S(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) S[static_cast<std::size_t>(j)] = j;
    return {[=](CounterRng& rng) {
              const Matrix X = normal_matrix(rng, n, p);
              Vector z(n);
              for (int i = 0; i < n; ++i) z(i) = rng.next_normal();
              const auto star = resolvent_set(X, z, S, ks);
              Matrix XS(n, ks);
              for (int c = 0; c < ks; ++c) XS.col(c) = X.col(star[static_cast<std::size_t>(c)]);
              const Vector sv = Eigen::JacobiSVD<Matrix>(XS / std::sqrt(static_cast<double>(n))).singularValues();
              if (upper) return sv.maxCoeff() >= level ? 1.0 : 0.0;
              return sv.minCoeff() <= level ? 1.0 : 0.0;
            },
            std::min(1.0, bound)};
  }
  if (id == "sup_xtz") {
    const int n = as_int(g, "n");
    const int p = as_int(g, "p");
    const int ks = as_int(g, "kstar");
    if (ks >= p) throw std::invalid_argument("sup_xtz: require kstar < p");
    const double level = std::sqrt(32.0 * n * ks * std::log(static_cast<double>(p) / ks));
    const double bound = std::exp(-n / 2.0) + std::pow(std::sqrt(2.0) * std::exp(1.0) * ks / p, ks);
    return {[=](CounterRng& rng) {
              const Matrix X = normal_matrix(rng, n, p);
              Vector z(n);
              for (int i = 0; i < n; ++i) z(i) = rng.next_normal();
              const Vector v = X.transpose() * z;
              return sup_xtz_topk(std::vector<double>(v.data(), v.data() + v.size()), ks) > level ? 1.0 : 0.0;
            },
            std::min(1.0, bound)};
  }
  if (id == "sre_event") {
    const int n = as_int(g, "n");
    const int p = as_int(g, "p");
    const int k = as_int(g, "k");
    const double eps = g.get("eps");
    const double level = g.has("level") ? g.get("level") : 0.05;
    return {[=](CounterRng& rng) {
              const Matrix X = normal_matrix(rng, n, p);
              EventAOptions opts;
              opts.restarts = 4;
              opts.seed = rng.next_u64();
              return event_a_check(X, k, eps, opts).holds ? 0.0 : 1.0;
            },
            level};
  }
  throw std::invalid_argument("unregistered lemma id '" + id + "'");
}

std::vector<LemmaSpec> build_registry() {
  std::vector<LemmaSpec> r;
  auto add = [&](LemmaSpec s) { r.push_back(std::move(s)); };

  add({"chi2_lower", "P(sum_{i<=d} g_i^2 < d(1-tau)) <= exp((d/2)(tau + log(1-tau)))",
       "d i.i.d. N(0,1)", {"d", "tau"}, TailDirection::kFrequency, false, false,
       {gp({{"d", 10}, {"tau", 0.2}}), gp({{"d", 10}, {"tau", 0.5}}), gp({{"d", 50}, {"tau", 0.2}}),
        gp({{"d", 50}, {"tau", 0.5}})}});
  add({"gauss_max", "P(max_i |g_i| >= sqrt(2 log p) + u) <= exp(-u^2/2)", "p i.i.d. N(0,1)",
       {"p", "u"}, TailDirection::kFrequency, false, false,
       {gp({{"p", 10}, {"u", 0.0}}), gp({{"p", 10}, {"u", 0.5}}), gp({{"p", 10}, {"u", 1.0}}),
        gp({{"p", 10}, {"u", 2.0}}), gp({{"p", 100}, {"u", 0.5}}), gp({{"p", 100}, {"u", 1.0}}),
        gp({{"p", 100}, {"u", 2.0}}), gp({{"p", 1000}, {"u", 1.0}})}});
  add({"order_mean", "E |g|_(k) <= sqrt(2 log(2p/(k-1))), 2 <= k <= p", "p i.i.d. N(0,1)", {"p", "k"},
       TailDirection::kMean, false, false,
       {gp({{"p", 100}, {"k", 2}}), gp({{"p", 100}, {"k", 20}}), gp({{"p", 1000}, {"k", 10}})}});
  add({"order_conc", "P(|g|_(k) - E|g|_(k) >= u) <= exp(-u^2/2)", "p i.i.d. N(0,1); E|g|_(k) from a pilot run",
       {"p", "k", "u"}, TailDirection::kFrequency, false, false,
       {gp({{"p", 100}, {"k", 1}, {"u", 0.5}}), gp({{"p", 100}, {"k", 1}, {"u", 1.0}}),
        gp({{"p", 100}, {"k", 1}, {"u", 2.0}}), gp({{"p", 100}, {"k", 5}, {"u", 0.5}}),
        gp({{"p", 100}, {"k", 5}, {"u", 1.0}}), gp({{"p", 100}, {"k", 5}, {"u", 2.0}})}});
  add({"topk_avg", "P((1/s) sum_{j<=s} |g|_(j)^2 > t log(2p/s)) <= (2p/s)^(1-3t/8)", "p i.i.d. N(0,1)",
       {"p", "s", "t"}, TailDirection::kFrequency, false, false,
       {gp({{"p", 100}, {"s", 1}, {"t", 3.0}}), gp({{"p", 100}, {"s", 1}, {"t", 4.0}}),
        gp({{"p", 100}, {"s", 10}, {"t", 3.0}}), gp({{"p", 100}, {"s", 10}, {"t", 4.0}}),
        gp({{"p", 1000}, {"s", 10}, {"t", 3.0}})}});
  add({"median_event",
       "P(max_{j<=k} |g|_(j)/(4 sqrt(log(2p/j))) > 1 or |g|_(k+1) > (1+delta1) sqrt(2 log(p/k))) <= "
       "k/(2p) + exp(-((1+delta1) sqrt(2 log(p/k)) - sqrt(2 log(2p/k)))^2 / 2)",
       "p i.i.d. N(0,1)", {"p", "k", "delta1"}, TailDirection::kFrequency, false, false,
       {gp({{"p", 1000}, {"k", 10}, {"delta1", 0.5}}), gp({{"p", 1000}, {"k", 10}, {"delta1", 1.0}}),
        gp({{"p", 1000}, {"k", 1}, {"delta1", 0.5}})}});
  add({"gauss_sv",
       "P(sigma_min(A) < sqrt(N)-sqrt(n)-t or sigma_max(A) > sqrt(N)+sqrt(n)+t) <= 2 exp(-t^2/2)",
       "N x n matrix of i.i.d. N(0,1)", {"N", "n", "t"}, TailDirection::kFrequency, true, false,
       {gp({{"N", 100}, {"n", 10}, {"t", 0.5}}), gp({{"N", 100}, {"n", 10}, {"t", 1.0}}),
        gp({{"N", 100}, {"n", 10}, {"t", 2.0}}), gp({{"N", 400}, {"n", 40}, {"t", 1.0}})}});
  add({"resolvent_sv",
       "side 0: P(sigma_min(X_S*/sqrt(n)) <= sqrt(1-1/n) - sqrt(k*/n) - t) <= exp(-n t^2/2); "
       "side 1: P(sigma_max(X_S*/sqrt(n)) >= sqrt(1-1/n) + sqrt(k*/n) + sqrt(8 k* log(p/k*)/n) + t) "
       "<= exp(-n t^2/2) + (sqrt(2) e k*/p)^k*",
       "n x p Gaussian X, standard normal z, S = first k indices, S* its resolvent set",
       {"n", "p", "k", "kstar", "t", "side"}, TailDirection::kFrequency, true, false,
       {gp({{"n", 100}, {"p", 200}, {"k", 2}, {"kstar", 6}, {"t", 0.1}, {"side", 0}}),
        gp({{"n", 100}, {"p", 200}, {"k", 2}, {"kstar", 6}, {"t", 0.2}, {"side", 0}}),
        gp({{"n", 100}, {"p", 200}, {"k", 2}, {"kstar", 6}, {"t", 0.1}, {"side", 1}}),
        gp({{"n", 100}, {"p", 200}, {"k", 2}, {"kstar", 6}, {"t", 0.2}, {"side", 1}})}});
  add({"sup_xtz", "P(sup_{|T|=k*} ||X_T^T z||_2 > sqrt(32 n k* log(p/k*))) <= exp(-n/2) + (sqrt(2) e k*/p)^k*",
       "n x p Gaussian X, standard normal z; exact sup via the k* largest |X_j^T z|", {"n", "p", "kstar"},
       TailDirection::kFrequency, true, false,
       {gp({{"n", 100}, {"p", 400}, {"kstar", 2}}), gp({{"n", 100}, {"p", 400}, {"kstar", 4}})}});
  add({"sre_event",
       "P(event A(delta0, c0, k) fails) <= level (calibrated surrogate; the proven rate has unspecified constants)",
       "n x p Gaussian X; event checked by event_a_check", {"n", "p", "k", "eps", "level"},
       TailDirection::kFrequency, true, true,
       {gp({{"n", 5000}, {"p", 10}, {"k", 1}, {"eps", 0.5}, {"level", 0.05}})}});
  return r;
}

}  // namespace

double GridPoint::get(const std::string& name) const {
  for (const auto& [k, v] : params) {
    if (k == name) return v;
  }
  throw std::invalid_argument("grid point '" + describe() + "' lacks parameter " + name);
}

bool GridPoint::has(const std::string& name) const {
  return std::any_of(params.begin(), params.end(), [&](const auto& kv) { return kv.first == name; });
}

std::string GridPoint::describe() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i) out << ' ';
    out << params[i].first << '=' << params[i].second;
  }
  return out.str();
}

const std::vector<LemmaSpec>& lemma_registry() {
  static const std::vector<LemmaSpec> registry = build_registry();
  return registry;
}

const LemmaSpec& find_lemma(const std::string& id) {
  for (const auto& spec : lemma_registry()) {
    if (spec.id == id) return spec;
  }
  std::string known;
  for (const auto& spec : lemma_registry()) known += (known.empty() ? "" : ", ") + spec.id;
  throw std::invalid_argument("unregistered lemma id '" + id + "' (known: " + known + ")");
}

TailReport check_tail_bound(const std::string& lemma_id, const std::vector<GridPoint>& grid, int reps,
                            std::uint64_t seed, int threads) {
  const LemmaSpec& spec = find_lemma(lemma_id);
  if (reps < 100) throw std::invalid_argument("check_tail_bound: reps must be >= 100");
  const auto& points = grid.empty() ? spec.default_grid : grid;

  TailReport report;
  report.lemma_id = spec.id;
  report.surrogate = spec.surrogate;
  for (std::size_t c = 0; c < points.size(); ++c) {
    const Cell cell = make_cell(spec.id, points[c], seed, threads);
    const std::uint64_t key = hash_label(spec.id) ^ splitmix64(c + 1);
    std::vector<double> values(static_cast<std::size_t>(reps));
    parallel_for(values.size(), threads, [&](std::size_t r) {
      CounterRng rng(SeedSpec{seed, r}, key);
      values[r] = cell.sample(rng);
    });

    TailPoint tp;
    tp.point = points[c];
    tp.reps = reps;
    tp.bound = cell.bound;
    const MeanStderr ms = mean_stderr(values);
    tp.empirical = ms.mean;
    if (spec.direction == TailDirection::kMean) {
      tp.stderr_ = ms.stderr_;
      tp.margin = tp.bound - tp.empirical - 3.0 * tp.stderr_;
    } else {
      // Binomial standard error at the bound, i.e. under the null that the
      // bound is exact.
      const double b = std::clamp(tp.bound, 0.0, 1.0);
      tp.stderr_ = std::sqrt(b * (1.0 - b) / reps);
      tp.margin = tp.bound + 3.0 * tp.stderr_ - tp.empirical;
    }
    tp.pass = tp.margin >= 0.0;
    report.pass = report.pass && tp.pass;
    report.points.push_back(std::move(tp));
  }
  return report;
}

std::vector<GridPoint> parse_grid(const std::string& text) {
  std::vector<GridPoint> out;
  std::istringstream lines(text);
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string tok;
    GridPoint point;
    while (tokens >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == tok.size()) {
        throw std::invalid_argument("grid line " + std::to_string(lineno) + ": expected name=value, got '" + tok + "'");
      }
      std::size_t used = 0;
      double value = 0.0;
      try {
        value = std::stod(tok.substr(eq + 1), &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size() - eq - 1) {
        throw std::invalid_argument("grid line " + std::to_string(lineno) + ": bad number in '" + tok + "'");
      }
      point.params.emplace_back(tok.substr(0, eq), value);
    }
    if (!point.params.empty()) out.push_back(std::move(point));
  }
  return out;
}

BinomialCheck binom_bound_check(int p, int s) {
  if (s < 1 || s > p) throw std::invalid_argument("binom_bound_check: require 1 <= s <= p");
  using boost::multiprecision::cpp_int;
  using Float = boost::multiprecision::cpp_bin_float_50;
  cpp_int c = 1;
  for (int i = 1; i <= s; ++i) {
    c *= p - s + i;
    c /= i;  // exact: c is C(p - s + i, i) after this step
  }
  const Float bound = boost::multiprecision::pow(boost::math::constants::e<Float>() * Float(p) / Float(s), s);
  BinomialCheck out;
  out.exact = c.str();
  out.bound = static_cast<double>(bound);
  out.holds = Float(c) <= bound;
  return out;
}

double sup_xtz_topk(const std::vector<double>& xtz, int k_star) {
  if (k_star < 1 || static_cast<std::size_t>(k_star) > xtz.size()) {
    throw std::invalid_argument("sup_xtz_topk: require 1 <= k_star <= p");
  }
  std::vector<double> sq(xtz.size());
  std::transform(xtz.begin(), xtz.end(), sq.begin(), [](double v) { return v * v; });
  std::partial_sort(sq.begin(), sq.begin() + k_star, sq.end(), std::greater<>());
  double sum = 0.0;
  for (int j = 0; j < k_star; ++j) sum += sq[static_cast<std::size_t>(j)];
  return std::sqrt(sum);
}

}  // namespace sparse_minimax
