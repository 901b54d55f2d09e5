#include <gtest/gtest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <cstring>

#include "sparse_minimax/estimators.hpp"
#include "sparse_minimax/risk_lab.hpp"

namespace sm = sparse_minimax;

namespace {

const std::vector<double> kMu{0, 0.5, 1, 2, 5, 10, 50};
const std::vector<double> kTau{0, 0.5, 1, 2, 4};

// r(0; tau) = 2 int_tau^inf (w - tau)^2 phi(w) dw + P(|w| <= tau) * 0, by a
// different quadrature family than the library's reference.
double zero_mean_risk(double tau) {
  boost::math::quadrature::exp_sinh<double> integrator;
  auto f = [tau](double t) {
    const double w = tau + t;
    return t * t * std::exp(-0.5 * w * w) / std::sqrt(2 * M_PI);
  };
  return 2.0 * integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity());
}

sm::ExperimentConfig small_config() {
  sm::ExperimentConfig c;
  c.n = 150;
  c.p = 300;
  c.k = 3;
  c.reps = 24;
  c.master_seed = 9;
  c.estimators = {sm::EstimatorId::kOracle, sm::EstimatorId::kLasso, sm::EstimatorId::kSlope};
  return c;
}

}  // namespace

TEST(StRisk, MatchesQuadratureOnGrid) {
  for (double mu : kMu) {
    for (double tau : kTau) {
      EXPECT_NEAR(sm::st_risk_exact(mu, tau), sm::st_risk_quadrature(mu, tau), 1e-8) << mu << " " << tau;
    }
  }
}

TEST(StRisk, TrivialValues) {
  EXPECT_NEAR(sm::st_risk_exact(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(sm::st_risk_exact(5, 0), 1.0, 1e-15);
  const double r03 = sm::st_risk_exact(0, 3);
  EXPECT_LE(r03, std::exp(-4.5));
  EXPECT_NEAR(r03, zero_mean_risk(3.0), 1e-12);
  for (double tau : kTau) EXPECT_NEAR(sm::st_risk_exact(0, tau), zero_mean_risk(tau), 1e-12);
}

TEST(StRisk, Symmetric) {
  for (double mu : kMu) {
    for (double tau : kTau) EXPECT_EQ(sm::st_risk_exact(mu, tau), sm::st_risk_exact(-mu, tau));
  }
}

TEST(StRisk, MonotoneTowardCap) {
  for (double tau : {0.5, 1.0, 2.0, 4.0}) {
    double prev = sm::st_risk_exact(0, tau);
    for (double mu = 0.05; mu <= 50; mu += 0.05) {
      const double r = sm::st_risk_exact(mu, tau);
      EXPECT_GE(r, prev - 1e-13) << mu << " " << tau;
      EXPECT_LE(r, 1 + tau * tau);
      prev = r;
    }
    EXPECT_NEAR(sm::st_risk_exact(50, tau), 1 + tau * tau, 1e-10);
  }
}

TEST(StRisk, BoundsCheckReport) {
  std::vector<std::pair<double, double>> grid;
  for (double mu : kMu) {
    for (double tau : kTau) grid.emplace_back(mu, tau);
  }
  const auto report = sm::st_risk_bounds_check(grid);
  EXPECT_TRUE(report.all_ok);
  ASSERT_EQ(report.rows.size(), grid.size());
  for (const auto& row : report.rows) {
    EXPECT_EQ(row.zero_bound.has_value(), row.mu == 0.0);
    if (row.mu == 0.0 && row.tau > 0) EXPECT_LT(row.risk, *row.zero_bound);
    if (row.tau == 0.0) EXPECT_NEAR(row.risk, 1.0, 1e-15);
  }
}

TEST(Prediction, Values) {
  EXPECT_NEAR(sm::minimax_denominator(4000, 8000, 8, 1.0), 2.0 * 8 * std::log(1000.0) / 4000, 1e-17);
  EXPECT_NEAR(sm::minimax_denominator(4000, 8000, 8, 1.0), 0.027631, 1e-6);
  EXPECT_NEAR(sm::oracle_ratio_prediction(4000, 8000, 8, 0.1), 1.21 + 1 / (2 * std::log(1000.0)), 1e-14);
  EXPECT_NEAR(sm::oracle_ratio_prediction(4000, 8000, 8, 0.1), 1.2824, 5e-5);
  EXPECT_NEAR(sm::oracle_risk_prediction(4000, 8000, 8, 1.0, 0.1) / sm::minimax_denominator(4000, 8000, 8, 1.0),
              sm::oracle_ratio_prediction(4000, 8000, 8, 0.1), 1e-14);
  for (double eps : {0.0, 0.1, 0.5}) {
    EXPECT_GE(sm::oracle_ratio_prediction(100, 1000, 5, eps), (1 + eps) * (1 + eps));
  }
  // ratio approaches (1+eps)^2 as p/k grows
  EXPECT_LT(sm::oracle_ratio_prediction(100, 1000000000, 1, 0.0), 1.025);
}

TEST(Config, Validation) {
  auto c = small_config();
  EXPECT_NO_THROW(c.validate());
  c.k = c.p;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = small_config();
  c.reps = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = small_config();
  c.estimators.clear();
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_EQ(sm::parse_estimator("slope"), sm::EstimatorId::kSlope);
  EXPECT_THROW(sm::parse_estimator("ridge"), std::invalid_argument);
}

TEST(EmpiricalRisk, DefaultAmplitudeGrid) {
  const auto a = sm::default_amplitudes(400, 800, 4, 2.0);
  const double unit = 2.0 * std::sqrt(2 * std::log(200.0) / 400);
  ASSERT_EQ(a.size(), 6u);
  const double m[] = {0.25, 0.5, 1, 2, 4, 8};
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(a[i], m[i] * unit, 1e-15);
}

TEST(EmpiricalRisk, ThreadCountIndependent) {
  auto c = small_config();
  c.threads = 1;
  const auto a = sm::empirical_risk(c);
  c.threads = 4;
  const auto b = sm::empirical_risk(c);
  for (std::size_t e = 0; e < a.estimators.size(); ++e) {
    EXPECT_EQ(a.estimators[e].minimax_ratio, b.estimators[e].minimax_ratio);
    for (std::size_t i = 0; i < a.amplitudes.size(); ++i) {
      for (std::size_t r = 0; r < a.estimators[e].sq_errors[i].size(); ++r) {
        EXPECT_EQ(std::memcmp(&a.estimators[e].sq_errors[i][r], &b.estimators[e].sq_errors[i][r], sizeof(double)),
                  0);
      }
    }
  }
}

TEST(EmpiricalRisk, NoiselessOracleIsKLambdaSquared) {
  auto c = small_config();
  c.noiseless = true;
  c.estimators = {sm::EstimatorId::kOracle};
  const auto report = sm::empirical_risk(c);
  const double lambda = sm::lambda_eps(c.eps, c.sigma, c.n, c.p, c.k);
  const auto& est = report.get(sm::EstimatorId::kOracle);
  for (std::size_t i = 0; i < report.amplitudes.size(); ++i) {
    if (report.amplitudes[i] <= lambda) continue;
    for (double v : est.sq_errors[i]) EXPECT_NEAR(v, c.k * lambda * lambda, 1e-12);
  }
  EXPECT_NEAR(est.minimax_ratio, (1 + c.eps) * (1 + c.eps), 1e-10);
}

TEST(EmpiricalRisk, ZeroSignalOracleMatchesClosedForm) {
  sm::ExperimentConfig c;
  c.n = 400;
  c.p = 800;
  c.k = 4;
  c.reps = 200;
  c.amplitudes = {0.0};
  c.master_seed = 3;
  const auto report = sm::empirical_risk(c);
  const auto& a = report.get(sm::EstimatorId::kOracle).per_amplitude.front();
  const double tau = sm::lambda_eps(c.eps, c.sigma, c.n, c.p, c.k) * std::sqrt(static_cast<double>(c.n));
  const double predicted = c.p * sm::st_risk_exact(0.0, tau) / c.n;
  EXPECT_NEAR(a.stats.mean, predicted, 5 * a.stats.stderr_ + 0.05 * predicted);
  EXPECT_LE(a.stats.mean, report.denominator);
}

TEST(EmpiricalRisk, LassoTracksOracle) {
  sm::ExperimentConfig c;
  c.n = 500;
  c.p = 1000;
  c.k = 4;
  c.reps = 40;
  c.master_seed = 21;
  c.estimators = {sm::EstimatorId::kOracle, sm::EstimatorId::kLasso};
  const auto report = sm::empirical_risk(c);
  const auto& o = report.get(sm::EstimatorId::kOracle);
  const auto& l = report.get(sm::EstimatorId::kLasso);
  EXPECT_EQ(l.flagged, 0);
  for (std::size_t i = 0; i < report.amplitudes.size(); ++i) {
    EXPECT_NEAR(l.per_amplitude[i].stats.mean, o.per_amplitude[i].stats.mean, 3 * o.per_amplitude[i].stats.stderr_)
        << "amplitude " << report.amplitudes[i];
  }
}

TEST(EmpiricalRisk, MinimaxRatioIsSupOverAmplitudes) {
  const auto report = sm::empirical_risk(small_config());
  for (const auto& e : report.estimators) {
    double sup = 0;
    for (const auto& a : e.per_amplitude) sup = std::max(sup, a.stats.mean);
    EXPECT_DOUBLE_EQ(sm::minimax_ratio(report, e.id), sup / report.denominator);
    EXPECT_DOUBLE_EQ(e.minimax_ratio, sup / report.denominator);
    EXPECT_GT(e.minimax_ratio, 0.0);
    for (const auto& a : e.per_amplitude) {
      EXPECT_EQ(a.stats.count, static_cast<std::size_t>(report.config.reps));
    }
  }
}

TEST(EmpiricalRisk, RandomSupportDiffersButReproduces) {
  auto c = small_config();
  c.estimators = {sm::EstimatorId::kOracle};
  c.random_support = true;
  const auto a = sm::empirical_risk(c);
  const auto b = sm::empirical_risk(c);
  EXPECT_EQ(a.estimators[0].sq_errors, b.estimators[0].sq_errors);
}

TEST(SlopeHighProb, HugeThresholdNeverExceeded) {
  sm::ExperimentConfig c;
  c.n = 200;
  c.p = 400;
  c.k = 4;
  c.reps = 20;
  c.eps = 10.0;
  c.amplitudes = {2 * std::sqrt(2 * std::log(100.0) / 200)};
  const auto r = sm::slope_highprob_check(c, 0.5);
  EXPECT_EQ(r.exceed, 0);
  EXPECT_EQ(r.fraction, 0.0);
  EXPECT_NEAR(r.threshold, 62.0 * 4 * std::log(100.0) / 200, 1e-12);
}

TEST(Moments, SecondMomentIsNormalizedRisk) {
  sm::ExperimentConfig c;
  c.n = 50;
  c.p = 12;
  c.k = 2;
  c.reps = 30;
  c.estimators = {sm::EstimatorId::kMle};
  const auto report = sm::empirical_risk(c);
  const auto m2 = sm::moment_from_errors(report, sm::EstimatorId::kMle, 2.0);
  const double unit = 2 * std::log(6.0) / 50;
  for (std::size_t i = 0; i < report.amplitudes.size(); ++i) {
    EXPECT_NEAR(m2.normalized[i], report.estimators[0].per_amplitude[i].stats.mean / unit, 1e-12);
  }
}

TEST(Moments, NoiselessMleIsExact) {
  sm::ExperimentConfig c;
  c.n = 40;
  c.p = 10;
  c.k = 2;
  c.reps = 10;
  c.noiseless = true;
  c.amplitudes = {1.0};
  const auto m = sm::mle_moment_estimate(c, 4.0);
  EXPECT_LT(m.sup, 1e-20);
}
