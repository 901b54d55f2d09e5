#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "sparse_minimax/design_diagnostics.hpp"
#include "sparse_minimax/estimators.hpp"
#include "sparse_minimax/proof_events.hpp"

namespace sm = sparse_minimax;
using sm::Matrix;
using sm::Vector;

namespace {

std::vector<Eigen::Index> naive_resolvent(const Matrix& X, const Vector& z, std::vector<Eigen::Index> S,
                                          Eigen::Index k_star) {
  const Vector score = (X.transpose() * z).cwiseAbs();
  std::vector<Eigen::Index> rest;
  for (Eigen::Index i = 0; i < X.cols(); ++i) {
    if (std::find(S.begin(), S.end(), i) == S.end()) rest.push_back(i);
  }
  std::stable_sort(rest.begin(), rest.end(), [&](auto a, auto b) { return score(a) > score(b); });
  for (std::size_t i = 0; S.size() < static_cast<std::size_t>(k_star); ++i) S.push_back(rest[i]);
  std::sort(S.begin(), S.end());
  return S;
}

double naive_h(const Vector& u, Eigen::Index k, Eigen::Index n, double sigma, double d1, double d2) {
  const auto p = u.size();
  std::vector<double> a(u.data(), u.data() + p);
  for (auto& x : a) x = std::abs(x);
  std::sort(a.begin(), a.end(), std::greater<>());
  double head = 0.0, tail = 0.0;
  for (Eigen::Index j = 1; j <= p; ++j) {
    if (j <= k) {
      head += a[j - 1] * 4.0 * std::sqrt(std::log(2.0 * p / j) / n);
    } else {
      tail += a[j - 1] * std::sqrt(2.0 * std::log(static_cast<double>(p) / k) / n);
    }
  }
  return sigma * (1 + d2) * (head + (1 + d1) * tail);
}

Vector random_vector(Eigen::Index p, std::uint64_t seed) {
  sm::CounterRng rng({seed, 0}, sm::StreamPurpose::kProbe);
  Vector v(p);
  for (Eigen::Index i = 0; i < p; ++i) v(i) = rng.next_normal();
  return v;
}

}  // namespace

TEST(Resolvent, ZeroNoiseTakesSmallestIndices) {
  const Matrix X = sm::gen_design(5, 8, {1, 0}).X;
  const auto s = sm::resolvent_set(X, Vector::Zero(5), {2, 6}, 5);
  EXPECT_EQ(s, (std::vector<Eigen::Index>{0, 1, 2, 3, 6}));
}

TEST(Resolvent, DirectDefinition) {
  Matrix X(1, 4);
  X << 7, 5, -1, -9;
  Vector z(1);
  z << 1;
  EXPECT_EQ(sm::resolvent_set(X, z, {0}, 2), (std::vector<Eigen::Index>{0, 3}));
}

TEST(Resolvent, MatchesSortOracle) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Matrix X = sm::gen_design(20, 50, {seed, 0}).X;
    const Vector z = sm::gen_noise(20, 1.0, {seed, 0}).z;
    const std::vector<Eigen::Index> S{3, 17, 40};
    EXPECT_EQ(sm::resolvent_set(X, z, S, 9), naive_resolvent(X, z, S, 9));
  }
}

TEST(Resolvent, Errors) {
  const Matrix X = sm::gen_design(5, 8, {1, 0}).X;
  EXPECT_THROW(sm::resolvent_set(X, Vector::Zero(5), {1, 2}, 2), std::invalid_argument);
  EXPECT_THROW(sm::resolvent_set(X, Vector::Zero(5), {1, 2}, 8), std::invalid_argument);
}

TEST(Resolvent, PermutationEquivariant) {
  const Matrix X = sm::gen_design(15, 30, {4, 0}).X;
  const Vector z = sm::gen_noise(15, 1.0, {4, 0}).z;
  std::vector<Eigen::Index> perm(30);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  std::rotate(perm.begin(), perm.begin() + 7, perm.end());
  Matrix Xp(15, 30);
  for (Eigen::Index j = 0; j < 30; ++j) Xp.col(perm[j]) = X.col(j);
  const std::vector<Eigen::Index> S{2, 11};
  auto base = sm::resolvent_set(X, z, S, 8);
  std::vector<Eigen::Index> Sp{perm[2], perm[11]};
  std::sort(Sp.begin(), Sp.end());
  auto moved = sm::resolvent_set(Xp, z, Sp, 8);
  std::vector<Eigen::Index> relabeled;
  for (auto i : base) relabeled.push_back(perm[i]);
  std::sort(relabeled.begin(), relabeled.end());
  EXPECT_EQ(moved, relabeled);
}

TEST(BDelta, NoiselessContainmentAndExactDelta) {
  const Eigen::Index n = 200, p = 50, k = 3;
  const auto inst = sm::synthesize(sm::gen_design(n, p, {2, 0}), sm::make_signal(p, k, 2.0, sm::FirstK{}), 0.0,
                                   {2, 0});
  const double lambda = 0.1;
  const auto lasso = sm::lasso_fit(inst.X(), inst.y, {lambda, 1e-10, 100000});
  const Vector oracle = sm::oracle_estimator(inst.signal.dense(), inst.X(), inst.noise.z, lambda);
  const auto r = sm::b_delta_check(inst, lasso.beta_hat, oracle, 6);
  EXPECT_TRUE(r.contains_all);
  EXPECT_EQ(static_cast<Eigen::Index>(r.s_star.size()), 6);
  Matrix Xs(n, 6);
  for (int c = 0; c < 6; ++c) Xs.col(c) = inst.X().col(r.s_star[c]);
  const Matrix dev = Xs.transpose() * Xs / static_cast<double>(n) - Matrix::Identity(6, 6);
  const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(dev).eigenvalues();
  EXPECT_NEAR(r.delta_emp, std::max(std::abs(ev(0)), std::abs(ev(5))), 1e-12);
}

TEST(BDelta, NearTotalSet) {
  const auto inst = sm::synthesize(sm::gen_design(30, 10, {3, 0}), sm::make_signal(10, 2, 1.0, sm::FirstK{}), 1.0,
                                   {3, 0});
  Vector bl = Vector::Zero(10);
  bl(0) = 1;
  bl(5) = 2;
  Vector bo = bl;
  const auto r = sm::b_delta_check(inst, bl, bo, 9);
  EXPECT_TRUE(r.contains_all);
}

TEST(Gap, IdenticalEstimatesHold) {
  sm::ResolventReport r;
  r.contains_all = true;
  r.delta_emp = 0.2;
  const Vector beta = Vector::Ones(5);
  const Vector b = 0.9 * beta;
  const auto g = sm::oracle_lasso_gap_check(beta, b, b, r, 1e-8);
  EXPECT_EQ(g.lhs, 0.0);
  EXPECT_EQ(g.status, sm::GapStatus::kHolds);
  EXPECT_NEAR(g.slack, 10 * 1e-8 * std::sqrt(5.0), 1e-20);
}

TEST(Gap, VacuousCases) {
  sm::ResolventReport r;
  r.contains_all = false;
  r.delta_emp = 0.1;
  const Vector v = Vector::Ones(3);
  EXPECT_EQ(sm::oracle_lasso_gap_check(v, v, v, r, 1e-8).status, sm::GapStatus::kVacuous);
  r.contains_all = true;
  r.delta_emp = 1.0;
  EXPECT_EQ(sm::oracle_lasso_gap_check(v, v, v, r, 1e-8).status, sm::GapStatus::kVacuous);
}

TEST(Gap, ZeroDeltaForcesEquality) {
  const Eigen::Index n = 12;
  sm::GaussianDesign d;
  d.X = std::sqrt(static_cast<double>(n)) * Matrix::Identity(n, n);
  const auto inst = sm::synthesize(d, sm::make_signal(n, 2, 1.0, sm::FirstK{}), 1.0, {5, 0});
  const double lambda = 0.4, tol = 1e-10;
  const auto lasso = sm::lasso_fit(inst.X(), inst.y, {lambda, tol, 10000});
  const Vector oracle = sm::oracle_estimator(inst.signal.dense(), inst.X(), inst.noise.z, lambda);
  const auto r = sm::b_delta_check(inst, lasso.beta_hat, oracle, 11);
  EXPECT_NEAR(r.delta_emp, 0.0, 1e-14);
  const auto g = sm::oracle_lasso_gap_check(inst.signal.dense(), lasso.beta_hat, oracle, r, tol);
  if (g.status != sm::GapStatus::kVacuous) {
    EXPECT_LE(g.lhs, g.slack);
    EXPECT_EQ(g.status, sm::GapStatus::kHolds);
  }
}

TEST(Gap, HoldsOnEveryNonVacuousReplicate) {
  sm::ProofRunConfig cfg;
  cfg.n = 400;
  cfg.p = 800;
  cfg.k = 4;
  cfg.reps = 30;
  cfg.seed = 17;
  const auto run = sm::run_gap_experiment(cfg);
  EXPECT_EQ(run.violated, 0);
  EXPECT_GT(run.non_vacuous, 0);
  EXPECT_LE(run.worst_excess, 0.0);
}

TEST(HFunc, Cases) {
  const Eigen::Index p = 50, n = 100, k = 3;
  EXPECT_EQ(sm::h_func(Vector::Zero(p), k, n, 1.0, 0.1, 0.1), 0.0);
  EXPECT_NEAR(sm::h_func(Vector::Unit(p, 7), k, n, 2.0, 0.1, 0.2), 2.0 * 1.2 * 4 * std::sqrt(std::log(2.0 * p) / n),
              1e-14);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Vector u = random_vector(p, s);
    EXPECT_NEAR(sm::h_func(u, k, n, 1.3, 0.1, 0.2), naive_h(u, k, n, 1.3, 0.1, 0.2), 1e-12);
  }
}

TEST(HFunc, HomogeneousAndPermutationInvariant) {
  const Vector u = random_vector(40, 3);
  const double h = sm::h_func(u, 4, 80, 1.0, 0.1, 0.1);
  EXPECT_NEAR(sm::h_func(-2.5 * u, 4, 80, 1.0, 0.1, 0.1), 2.5 * h, 1e-12);
  Vector r = u.reverse();
  r.head(5) = -r.head(5);
  EXPECT_NEAR(sm::h_func(r, 4, 80, 1.0, 0.1, 0.1), h, 1e-12);
}

TEST(GFunc, Formula) {
  const Matrix X = sm::gen_design(30, 10, {1, 0}).X;
  EXPECT_EQ(sm::g_func(Vector::Zero(10), X, 1.0, 0.1, 0.1, 0.05), 0.0);
  const Vector u = random_vector(10, 4);
  const double expect = 1.5 * 1.2 / 0.2 * std::sqrt(2 * std::log(1 / 0.05)) / (30 * 1.1) * (X * u).norm();
  EXPECT_NEAR(sm::g_func(u, X, 1.5, 0.1, 0.2, 0.05), expect, 1e-12);
}

TEST(StochasticError, ZeroNoiseAndZeroDirection) {
  const Matrix X = sm::gen_design(100, 200, {2, 0}).X;
  sm::StochasticErrorParams params;
  params.delta0 = 0.5;
  const auto probes = sm::stochastic_probe_directions(X, Vector::Zero(100), 2, 8, {2, 0});
  const auto c = sm::stochastic_error_event_check(X, Vector::Zero(100), 2, 1.0, params, probes);
  ASSERT_TRUE(c.applicable);
  EXPECT_EQ(c.holding, c.samples);
  const auto zc = sm::stochastic_error_event_check(X, sm::gen_noise(100, 1.0, {2, 0}).z, 2, 1.0, params,
                                                   {Vector::Zero(200)});
  EXPECT_EQ(zc.holding, 1);
}

TEST(StochasticError, MarginScalesLinearly) {
  const Matrix X = sm::gen_design(100, 200, {3, 0}).X;
  const Vector z = sm::gen_noise(100, 1.0, {3, 0}).z;
  sm::StochasticErrorParams params;
  params.delta0 = 0.5;
  auto probes = sm::stochastic_probe_directions(X, z, 2, 8, {3, 0});
  const auto a = sm::stochastic_error_event_check(X, z, 2, 1.0, params, probes);
  for (auto& u : probes) u *= 3.0;
  const auto b = sm::stochastic_error_event_check(X, z, 2, 1.0, params, probes);
  EXPECT_NEAR(b.worst_margin, 3.0 * a.worst_margin, 1e-10 * std::max(1.0, std::abs(a.worst_margin)));
  EXPECT_EQ(a.holding, b.holding);
}

TEST(StochasticError, HypothesisViolationFlagged) {
  Matrix X = sm::gen_design(100, 200, {4, 0}).X;
  X.col(0) *= 3.0;
  const auto c = sm::stochastic_error_event_check(X, Vector::Zero(100), 2, 1.0, {}, {Vector::Zero(200)});
  EXPECT_FALSE(c.applicable);
}

TEST(StochasticError, ProbesIncludeSignDirections) {
  const Matrix X = sm::gen_design(50, 100, {5, 0}).X;
  const Vector z = sm::gen_noise(50, 1.0, {5, 0}).z;
  const auto probes = sm::stochastic_probe_directions(X, z, 2, 4, {5, 0});
  const Vector g = X.transpose() * z;
  Eigen::Index top = 0;
  g.cwiseAbs().maxCoeff(&top);
  bool found = false;
  for (const auto& u : probes) {
    if ((u.array() != 0).count() == 1 && u(top) * g(top) > 0) found = true;
  }
  EXPECT_TRUE(found);
}

TEST(StochasticError, LevelAtDeskScale) {
  sm::ProofRunConfig cfg;
  cfg.n = 400;
  cfg.p = 1000;
  cfg.k = 2;
  cfg.reps = 200;
  cfg.u_random = 64;
  cfg.seed = 5;
  cfg.stochastic.delta0 = 0.25;
  cfg.stochastic.delta3 = 0.05;
  const auto run = sm::run_stochastic_error(cfg);
  ASSERT_TRUE(run.applicable);
  EXPECT_LE(run.failure_fraction, 0.05 + 3 * std::sqrt(0.05 * 0.95 / 200));
  EXPECT_TRUE(run.pass);
}

TEST(L2Bound, Constants) {
  const auto c = sm::lasso_l2_constants(0.0, 0.1, 0.0);
  EXPECT_NEAR(c.C1, 8 * 1.1 + std::sqrt(2.0), 1e-14);
  const auto d = sm::lasso_l2_constants(0.1, 0.2, 0.3);
  EXPECT_NEAR(d.C1, (8 * 1.1 * 1.2 + std::sqrt(2.0) * 1.3) / (0.9 * 0.9), 1e-13);
  EXPECT_NEAR(d.C2, (4 * std::sqrt(2.0) * 1.1 * 1.2 + 1.3) / (16 * std::sqrt(2.0) * 1.21 * 0.04), 1e-13);
}

TEST(L2Bound, CollapseAndLimits) {
  // delta0 = delta2 = 0, eps = 0: C1 = 8 + sqrt(2)
  EXPECT_NEAR(sm::lasso_l2_constants(0.0, 0.0, 0.0).C1, 8 + std::sqrt(2.0), 1e-14);
  sm::StochasticErrorParams params;
  params.delta0 = params.delta1 = params.delta2 = 0.01;
  params.delta3 = 1.0 - 1e-12;
  const auto c = sm::lasso_l2_constants(0.01, 0.01, 0.1);
  const double c1_term = c.C1 * std::sqrt(8 * std::log(1000.0) / 4000);
  EXPECT_NEAR(sm::lasso_l2_bound(8, 4000, 8000, 1.0, 0.1, params), c1_term, 1e-8);
  params.delta3 = 0.05;
  EXPECT_GT(sm::lasso_l2_bound(8, 4000, 8000, 1.0, 0.1, params), c1_term);
}

TEST(L2Bound, Preconditions) {
  sm::StochasticErrorParams params;
  EXPECT_THROW(sm::lasso_l2_bound(8, 100, 15, 1.0, 0.5, params), std::invalid_argument);
  EXPECT_THROW(sm::lasso_l2_bound(2, 100, 100, 1.0, 0.2, params), std::invalid_argument);
}

TEST(Moments, Constant) {
  EXPECT_DOUBLE_EQ(sm::moment_constant(2.0), 5.0);
  EXPECT_NEAR(sm::moment_constant(3.0), 1 + 3 * 2 * 3, 1e-12);
  EXPECT_THROW(sm::lasso_moment_bound(1.5, 8, 4000, 8000, 1.0, 0.1, 0.03, 0.03), std::invalid_argument);
}

TEST(Moments, IncreasingInQ) {
  const auto dc = sm::delta_consts(0.1);
  double prev = 0.0;
  for (double q : {2.0, 2.5, 3.0, 4.0, 6.0, 8.0}) {
    const double b = sm::lasso_moment_bound(q, 8, 4000, 8000, 1.0, 0.1, dc.delta0, dc.delta0);
    EXPECT_GT(b, prev) << "q=" << q;
    prev = b;
  }
}

TEST(Moments, TwoTermFormula) {
  const auto c = sm::lasso_l2_constants(0.05, 0.05, 0.1);
  const double a = std::sqrt(8 * std::log(1000.0) / 4000);
  const double b = 1.0 / std::sqrt(4000 * 8 * std::log(1000.0));
  const double expect = 5.0 * 4.0 * (std::pow(c.C1 * a, 2) + std::pow(c.C2 * b, 2));
  EXPECT_NEAR(sm::lasso_moment_bound(2.0, 8, 4000, 8000, 2.0, 0.1, 0.05, 0.05), expect, 1e-10 * expect);
}
