#include <gtest/gtest.h>

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

#include "sparse_minimax/design_diagnostics.hpp"
#include "sparse_minimax/estimators.hpp"

namespace sm = sparse_minimax;
using sm::Matrix;
using sm::Vector;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

sm::Instance random_instance(Eigen::Index n, Eigen::Index p, Eigen::Index k, double amp, std::uint64_t seed) {
  return sm::synthesize(sm::gen_design(n, p, {seed, 0}), sm::make_signal(p, k, amp, sm::FirstK{}), 1.0, {seed, 0});
}

// Independent best-subset oracle: all supports by bitmask, least squares via SVD.
double naive_best_rss(const Matrix& X, const Vector& y, int k) {
  const int p = static_cast<int>(X.cols());
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << p); ++mask) {
    if (__builtin_popcount(mask) != k) continue;
    Matrix Xs(X.rows(), k);
    int c = 0;
    for (int j = 0; j < p; ++j) {
      if (mask & (1u << j)) Xs.col(c++) = X.col(j);
    }
    const Vector b = Xs.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(y);
    best = std::min(best, (y - Xs * b).squaredNorm());
  }
  return best;
}

}  // namespace

TEST(SoftThreshold, ClosedForm) {
  EXPECT_EQ(sm::soft_threshold(vec({2, -3, 0.5}), 1.0), vec({1, -2, 0}));
  const Vector u = vec({0.3, -7, 2});
  EXPECT_EQ(sm::soft_threshold(u, 0.0), u);
  EXPECT_EQ(sm::soft_threshold(vec({5}), 10.0), vec({0}));
  EXPECT_THROW(sm::soft_threshold(u, -1.0), std::invalid_argument);
}

TEST(SoftThreshold, Nonexpansive) {
  sm::CounterRng rng({1, 0}, sm::StreamPurpose::kProbe);
  for (int t = 0; t < 500; ++t) {
    Vector a(6), b(6);
    for (int i = 0; i < 6; ++i) {
      a(i) = 3 * rng.next_normal();
      b(i) = 3 * rng.next_normal();
    }
    const double lam = 2 * rng.next_uniform();
    EXPECT_LE((sm::soft_threshold(a, lam) - sm::soft_threshold(b, lam)).norm(), (a - b).norm() + 1e-15);
  }
}

TEST(LambdaEps, Values) {
  EXPECT_NEAR(sm::lambda_eps(0.1, 2.0, 5000, 10000, 10), 2.2 * std::sqrt(2.0 * std::log(1000.0) / 5000.0), 1e-15);
  EXPECT_NEAR(sm::lambda_eps(0.1, 2.0, 5000, 10000, 10), 0.11565, 1e-5);
  // p / k close to e^2 with n = 4 gives sqrt(2 * 2 / 4) = 1 up to the rounding of p.
  EXPECT_NEAR(sm::lambda_eps(0.0, 1.0, 4, 7389056, 1000000), 1.0, 1e-7);
  const double lk = std::log(10000.0 / 10.0);
  EXPECT_NEAR(sm::lambda_eps(0.0, 1.0, static_cast<Eigen::Index>(4 * lk), 10000, 10),
              std::sqrt(2.0 * lk / static_cast<double>(static_cast<Eigen::Index>(4 * lk))), 1e-15);
  EXPECT_THROW(sm::lambda_eps(0.1, 1.0, 10, 5, 5), std::invalid_argument);
}

TEST(Lasso, OrthogonalDesignIsSoftThreshold) {
  const Eigen::Index n = 16;
  const double rn = std::sqrt(static_cast<double>(n));
  sm::GaussianDesign d;
  d.X = rn * Matrix::Identity(n, n);
  const auto inst = sm::synthesize(d, sm::make_signal(n, 3, 0.8, sm::FirstK{}), 1.0, {5, 0});
  const double lambda = 0.3;
  const auto fit = sm::lasso_fit(inst.X(), inst.y, {lambda, 1e-12, 10000});
  ASSERT_TRUE(fit.converged);
  const Vector expect = sm::soft_threshold(inst.X().transpose() * inst.y / n, lambda);
  EXPECT_LE((fit.beta_hat - expect).lpNorm<Eigen::Infinity>(), 1e-10);
  const Vector oracle = sm::oracle_estimator(inst.signal.dense(), inst.X(), inst.noise.z, lambda);
  EXPECT_LE((fit.beta_hat - oracle).lpNorm<Eigen::Infinity>(), 1e-8);
}

TEST(Lasso, NullSolutionAboveThreshold) {
  const auto inst = random_instance(40, 10, 2, 1.0, 3);
  const double lmax = (inst.X().transpose() * inst.y / 40.0).lpNorm<Eigen::Infinity>();
  const auto fit = sm::lasso_fit(inst.X(), inst.y, {lmax * 1.0001, 1e-10, 1000});
  EXPECT_EQ(fit.beta_hat, Vector::Zero(10));
  EXPECT_EQ(sm::lasso_kkt_residual(inst.X(), inst.y, Vector::Zero(10), lmax * 1.0001), 0.0);
}

TEST(Lasso, KktAndDominance) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = random_instance(40, 10, 3, 0.8, seed);
    const double lambda = 0.15;
    const double tol = 1e-9;
    const auto fit = sm::lasso_fit(inst.X(), inst.y, {lambda, tol, 100000});
    ASSERT_TRUE(fit.converged);
    EXPECT_LE(fit.kkt_residual, tol);
    EXPECT_LE(sm::lasso_kkt_residual(inst.X(), inst.y, fit.beta_hat, lambda), tol);
    EXPECT_LE(fit.objective, sm::lasso_objective(inst.X(), inst.y, inst.signal.dense(), lambda));
    EXPECT_LE(fit.objective, sm::lasso_objective(inst.X(), inst.y, Vector::Zero(10), lambda));
    // per-coordinate KKT from the definition
    const Vector g = inst.X().transpose() * (inst.y - inst.X() * fit.beta_hat) / 40.0;
    for (Eigen::Index j = 0; j < 10; ++j) {
      EXPECT_LE(std::abs(g(j)), lambda + tol);
      if (fit.beta_hat(j) != 0) EXPECT_LE(std::abs(g(j) - lambda * (fit.beta_hat(j) > 0 ? 1 : -1)), tol);
    }
  }
}

TEST(Lasso, ObjectiveMonotonePerSweep) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = random_instance(60, 150, 5, 0.6, seed);
    const auto fit = sm::lasso_fit(inst.X(), inst.y, {0.1, 1e-10, 100000});
    ASSERT_TRUE(fit.converged);
    ASSERT_GE(fit.objective_trace.size(), 1u);
    for (std::size_t i = 1; i < fit.objective_trace.size(); ++i) {
      EXPECT_LE(fit.objective_trace[i], fit.objective_trace[i - 1] + 1e-14 * std::abs(fit.objective_trace[i - 1]));
    }
  }
}

TEST(Lasso, KktResidualSensitive) {
  const auto inst = random_instance(40, 10, 3, 0.8, 1);
  auto fit = sm::lasso_fit(inst.X(), inst.y, {0.15, 1e-10, 100000});
  Vector b = fit.beta_hat;
  b(0) += 1.0;
  EXPECT_GT(sm::lasso_kkt_residual(inst.X(), inst.y, b, 0.15), 1e-3);
}

TEST(Lasso, NonConvergenceFlagged) {
  const auto inst = random_instance(60, 150, 5, 0.6, 2);
  const auto fit = sm::lasso_fit(inst.X(), inst.y, {0.01, 1e-14, 1});
  EXPECT_FALSE(fit.converged);
}

TEST(SlopeLambda, QuantileValues) {
  const Vector l = sm::slope_lambda_seq(0.0, 1.0, 1, 2, 0.5);
  EXPECT_NEAR(l(0), 1.1503493803760079, 1e-12);
  EXPECT_NEAR(l(1), 0.67448975019608171, 1e-12);  // quantile of 0.75
  const Vector s = sm::slope_lambda_seq(0.1, 1.0, 100, 500, 0.5);
  for (Eigen::Index i = 1; i < s.size(); ++i) EXPECT_LT(s(i), s(i - 1));
  EXPECT_GT(s(s.size() - 1), 0.0);
  EXPECT_THROW(sm::slope_lambda_seq(0.1, 1.0, 100, 500, 1.0), std::invalid_argument);
  EXPECT_THROW(sm::slope_lambda_seq(0.1, 1.0, 100, 500, 0.0), std::invalid_argument);
}

TEST(SortedL1, ProxMatchesGridSearch) {
  const Vector u = vec({3, 1});
  const Vector lam = vec({2, 0.5});
  const Vector prox = sm::prox_sorted_l1(u, lam);
  double best = std::numeric_limits<double>::infinity();
  double bx = 0, by = 0;
  const double h = 1e-3;
  for (int i = -1000; i <= 4000; ++i) {
    for (int j = -1000; j <= 4000; ++j) {
      const double x = i * h, y = j * h;
      const double hi = std::max(std::abs(x), std::abs(y)), lo = std::min(std::abs(x), std::abs(y));
      const double f = 0.5 * ((x - 3) * (x - 3) + (y - 1) * (y - 1)) + 2 * hi + 0.5 * lo;
      if (f < best) {
        best = f;
        bx = x;
        by = y;
      }
    }
  }
  EXPECT_NEAR(prox(0), bx, 2 * h);
  EXPECT_NEAR(prox(1), by, 2 * h);
}

TEST(SortedL1, ProxPoolsWhenOrderingBreaks) {
  // u - lambda would be (1.5, 2): the pair is pooled to the mean 1.75.
  const Vector prox = sm::prox_sorted_l1(vec({3.5, 2.5}), vec({2, 0.5}));
  EXPECT_NEAR(prox(0), 1.75, 1e-15);
  EXPECT_NEAR(prox(1), 1.75, 1e-15);
}

TEST(SortedL1, ProxWithConstantWeightsIsSoftThreshold) {
  sm::CounterRng rng({4, 0}, sm::StreamPurpose::kProbe);
  Vector u(30);
  for (Eigen::Index i = 0; i < 30; ++i) u(i) = 2 * rng.next_normal();
  const Vector lam = Vector::Constant(30, 0.7);
  EXPECT_LE((sm::prox_sorted_l1(u, lam) - sm::soft_threshold(u, 0.7)).lpNorm<Eigen::Infinity>(), 1e-14);
}

TEST(SortedL1, ProxIsOptimalAgainstPerturbations) {
  sm::CounterRng rng({5, 0}, sm::StreamPurpose::kProbe);
  for (int t = 0; t < 50; ++t) {
    Vector u(8);
    Vector lam(8);
    for (Eigen::Index i = 0; i < 8; ++i) {
      u(i) = 2 * rng.next_normal();
      lam(i) = 2 * rng.next_uniform();
    }
    std::sort(lam.data(), lam.data() + 8, std::greater<>());
    const Vector x = sm::prox_sorted_l1(u, lam);
    auto f = [&](const Vector& v) { return 0.5 * (v - u).squaredNorm() + sm::sorted_l1_norm(v, lam); };
    const double fx = f(x);
    for (int s = 0; s < 200; ++s) {
      Vector d(8);
      for (Eigen::Index i = 0; i < 8; ++i) d(i) = 1e-3 * rng.next_normal();
      EXPECT_GE(f(x + d), fx - 1e-12);
    }
  }
}

TEST(SortedL1, NormUsesSortedMagnitudes) {
  EXPECT_DOUBLE_EQ(sm::sorted_l1_norm(vec({-1, 3, 2}), vec({3, 2, 1})), 3 * 3 + 2 * 2 + 1 * 1);
}

TEST(Slope, ConstantWeightsReduceToLasso) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = random_instance(100, 60, 4, 0.5, seed);
    const double lambda = 0.12;
    const double tol = 1e-9;
    const auto lasso = sm::lasso_fit(inst.X(), inst.y, {lambda, tol, 100000});
    const auto slope = sm::slope_fit(inst.X(), inst.y, {Vector::Constant(60, lambda), tol, 100000});
    ASSERT_TRUE(lasso.converged);
    ASSERT_TRUE(slope.converged);
    EXPECT_LE((lasso.beta_hat - slope.beta_hat).lpNorm<Eigen::Infinity>(), 10 * tol);
  }
}

TEST(Slope, ZeroPenaltyIsLeastSquares) {
  const auto inst = random_instance(80, 10, 3, 1.0, 7);
  const double tol = 1e-9;
  const auto fit = sm::slope_fit(inst.X(), inst.y, {Vector::Zero(10), tol, 100000});
  ASSERT_TRUE(fit.converged);
  const Vector g = inst.X().transpose() * (inst.y - inst.X() * fit.beta_hat) / 80.0;
  EXPECT_LE(g.lpNorm<Eigen::Infinity>(), tol);
}

TEST(Slope, KktOnSlopeSequence) {
  const auto inst = random_instance(200, 400, 4, 0.4, 8);
  const Vector lam = sm::slope_lambda_seq(0.1, 1.0, 200, 400, 0.5);
  const auto fit = sm::slope_fit(inst.X(), inst.y, {lam, 1e-9, 100000});
  ASSERT_TRUE(fit.converged);
  EXPECT_LE(sm::slope_kkt_residual(inst.X(), inst.y, fit.beta_hat, lam), 1e-9);
  EXPECT_LE(fit.objective, sm::slope_objective(inst.X(), inst.y, inst.signal.dense(), lam));
}

TEST(Slope, RejectsIncreasingSequence) {
  const auto inst = random_instance(20, 5, 1, 1.0, 1);
  EXPECT_THROW(sm::slope_fit(inst.X(), inst.y, {vec({0.1, 0.2, 0.1, 0.1, 0.1}), 1e-8, 100}),
               std::invalid_argument);
}

TEST(Mle, NoiselessRecovery) {
  auto inst = sm::synthesize(sm::gen_design(20, 8, {3, 0}), sm::make_signal(8, 2, 1.3, sm::RandomSupport{{3, 0}}),
                             0.0, {3, 0});
  const auto mle = sm::mle_best_subset(inst.X(), inst.y, 2);
  std::vector<int> truth(inst.signal.support.begin(), inst.signal.support.end());
  EXPECT_EQ(mle.support, truth);
  EXPECT_LE((mle.fit.beta_hat - inst.signal.dense()).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(Mle, FullSupportIsOls) {
  const auto inst = random_instance(30, 4, 2, 1.0, 4);
  const auto mle = sm::mle_best_subset(inst.X(), inst.y, 4);
  const Vector ols = inst.X().colPivHouseholderQr().solve(inst.y);
  EXPECT_LE((mle.fit.beta_hat - ols).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(Mle, MatchesNaiveEnumerator) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto inst = random_instance(30, 10, 2, 0.5, seed);
    const auto mle = sm::mle_best_subset(inst.X(), inst.y, 2);
    const double naive = naive_best_rss(inst.X(), inst.y, 2);
    EXPECT_NEAR(mle.rss, naive, 1e-10 * std::max(1.0, naive));
    EXPECT_NEAR((inst.y - inst.X() * mle.fit.beta_hat).squaredNorm(), mle.rss, 1e-10 * std::max(1.0, naive));
    // basic inequality against the truth
    EXPECT_LE(mle.rss, (inst.y - inst.X() * inst.signal.dense()).squaredNorm() + 1e-10);
  }
}

TEST(Mle, TiesGoToSmallestSupport) {
  // columns 0 and 1 identical, y along them: both singletons fit equally well
  Matrix X = Matrix::Zero(4, 3);
  X(0, 0) = X(0, 1) = 1;
  X(1, 2) = 1;
  Vector y = Vector::Zero(4);
  y(0) = 2;
  const auto mle = sm::mle_best_subset(X, y, 1);
  EXPECT_EQ(mle.support, (std::vector<int>{0}));
}

TEST(Mle, CapacityError) {
  const auto inst = random_instance(30, 40, 2, 0.5, 1);
  EXPECT_THROW(sm::mle_best_subset(inst.X(), inst.y, 10), sm::CapacityError);
}

TEST(Oracle, Formula) {
  const auto inst = random_instance(30, 10, 2, 2.0, 2);
  const Vector beta = inst.signal.dense();
  EXPECT_EQ(sm::oracle_estimator(beta, inst.X(), Vector::Zero(30), 0.5), sm::soft_threshold(beta, 0.5));
  EXPECT_EQ(sm::oracle_estimator(Vector::Zero(10), inst.X(), inst.noise.z, 1e6), Vector::Zero(10));
  const Vector expect = sm::soft_threshold(beta + inst.X().transpose() * inst.noise.z / 30.0, 0.3);
  EXPECT_LE((sm::oracle_estimator(beta, inst.X(), inst.noise.z, 0.3) - expect).lpNorm<Eigen::Infinity>(), 1e-15);
}

TEST(Aggregated, WellConditionedTakesLasso) {
  const auto inst = random_instance(5000, 10, 1, 0.2, 6);
  const auto agg = sm::aggregated_estimate(inst, 1, 0.5);
  EXPECT_EQ(agg.branch, sm::AggregatedBranch::kLasso);
  EXPECT_TRUE(agg.event_is_proxy);
  const auto lasso = sm::lasso_fit(inst.X(), inst.y,
                                   {agg.lambda, sm::default_lasso_tol(inst.X(), inst.y, 1.0), 100000});
  EXPECT_EQ(agg.fit.beta_hat, lasso.beta_hat);
}

TEST(Aggregated, DuplicatedColumnTakesMle) {
  auto design = sm::gen_design(200, 8, {7, 0});
  design.X.col(1) = design.X.col(0);
  const auto inst = sm::synthesize(design, sm::make_signal(8, 2, 0.5, sm::FirstK{}), 1.0, {7, 0});
  const auto agg = sm::aggregated_estimate(inst, 2, 0.5);
  EXPECT_EQ(agg.branch, sm::AggregatedBranch::kMle);
  EXPECT_EQ(agg.fit.beta_hat, sm::mle_best_subset(inst.X(), inst.y, 2).fit.beta_hat);
}
