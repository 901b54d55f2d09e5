#include <gtest/gtest.h>

#include <cmath>

#include "sparse_minimax/config.hpp"

namespace sm = sparse_minimax;

TEST(KeyValue, ParsesCommentsAndOverrides) {
  const auto kv = sm::parse_key_values("# header\nn = 10\n\np=20 # trailing\n n = 30 \n");
  EXPECT_EQ(kv.get("n").value(), "30");
  EXPECT_EQ(kv.get("p").value(), "20");
  EXPECT_FALSE(kv.get("k").has_value());
}

TEST(KeyValue, RejectsMalformedLines) {
  EXPECT_THROW(sm::parse_key_values("n 10\n"), sm::ConfigError);
  EXPECT_THROW(sm::parse_key_values("n =\n"), sm::ConfigError);
  EXPECT_THROW(sm::parse_key_values("= 4\n"), sm::ConfigError);
}

TEST(Experiment, ReadsAllFields) {
  const auto c = sm::experiment_from(sm::parse_key_values(
      "n = 50\np = 16\nk = 2\nsigma = 0.5\neps = 0.2\nestimators = mle, oracle\namplitudes = 0.1, 1\nreps = 7\n"
      "master_seed = 99\nslope_q = 0.3\nrandom_support = true\nnoiseless = yes\nenumeration_cap = 5000\n"
      "sre_restarts = 8\nthreads = 2\nmax_flagged_share = 0.05\n"));
  EXPECT_EQ(c.n, 50);
  EXPECT_EQ(c.p, 16);
  EXPECT_EQ(c.k, 2);
  EXPECT_EQ(c.sigma, 0.5);
  EXPECT_EQ(c.eps, 0.2);
  EXPECT_EQ(c.estimators, (std::vector<sm::EstimatorId>{sm::EstimatorId::kMle, sm::EstimatorId::kOracle}));
  EXPECT_EQ(c.amplitudes, (std::vector<double>{0.1, 1.0}));
  EXPECT_EQ(c.reps, 7);
  EXPECT_EQ(c.master_seed, 99u);
  EXPECT_EQ(c.slope_q, 0.3);
  EXPECT_TRUE(c.random_support);
  EXPECT_TRUE(c.noiseless);
  EXPECT_EQ(c.enumeration_cap, 5000);
  EXPECT_EQ(c.sre_restarts, 8);
  EXPECT_EQ(c.threads, 2);
  EXPECT_EQ(c.max_flagged_share, 0.05);
}

TEST(Experiment, Errors) {
  EXPECT_THROW(sm::experiment_from(sm::parse_key_values("bogus = 1\n")), sm::ConfigError);
  EXPECT_THROW(sm::experiment_from(sm::parse_key_values("n = ten\n")), sm::ConfigError);
  EXPECT_THROW(sm::experiment_from(sm::parse_key_values("estimator = ridge\n")), sm::ConfigError);
  EXPECT_THROW(sm::experiment_from(sm::parse_key_values("noiseless = maybe\n")), sm::ConfigError);
  EXPECT_THROW(sm::experiment_from(sm::parse_key_values("amplitudes = 1\namplitude_multipliers = 2\n")),
               sm::ConfigError);
}

TEST(Experiment, AmplitudeMultipliers) {
  const auto c = sm::experiment_from(sm::parse_key_values("n = 100\np = 1000\nk = 10\namplitude_multipliers = 1, 2\n"));
  const double unit = std::sqrt(2 * std::log(100.0) / 100);
  ASSERT_EQ(c.amplitudes.size(), 2u);
  EXPECT_NEAR(c.amplitudes[0], unit, 1e-15);
  EXPECT_NEAR(c.amplitudes[1], 2 * unit, 1e-15);
}

TEST(Experiment, CanonicalTextRoundTrips) {
  sm::ExperimentConfig c;
  c.n = 123;
  c.p = 456;
  c.k = 7;
  c.sigma = 0.1 + 0.2;
  c.eps = 1.0 / 3.0;
  c.estimators = {sm::EstimatorId::kLasso, sm::EstimatorId::kSlope};
  c.reps = 11;
  c.master_seed = 18446744073709551615ull;
  c.noiseless = true;
  const std::string text = sm::to_config_text(c);
  const auto back = sm::experiment_from(sm::parse_key_values(text));
  EXPECT_EQ(back.sigma, c.sigma);
  EXPECT_EQ(back.eps, c.eps);
  EXPECT_EQ(back.master_seed, c.master_seed);
  EXPECT_EQ(back.estimators, c.estimators);
  EXPECT_EQ(back.amplitudes, c.resolved_amplitudes());
  EXPECT_EQ(sm::to_config_text(back), text);
}

TEST(ProofRun, ReadsKeysAndRejectsUnknown) {
  const auto c = sm::proof_run_from(
      sm::parse_key_values("n = 400\np = 1000\nk = 2\ndelta0 = 0.25\ndelta3 = 0.01\nk_star = 6\nu_random = 3\n"));
  EXPECT_EQ(c.n, 400);
  EXPECT_EQ(c.stochastic.delta0, 0.25);
  EXPECT_EQ(c.stochastic.delta3, 0.01);
  EXPECT_EQ(c.resolved_k_star(), 6);
  EXPECT_EQ(c.u_random, 3);
  EXPECT_THROW(sm::proof_run_from(sm::parse_key_values("estimators = lasso\n")), sm::ConfigError);
  const auto back = sm::proof_run_from(sm::parse_key_values(sm::to_config_text(c)));
  EXPECT_EQ(sm::to_config_text(back), sm::to_config_text(c));
}

TEST(FormatDouble, ShortestRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5}) {
    EXPECT_EQ(std::stod(sm::format_double(v)), v);
  }
  EXPECT_EQ(sm::format_double(0.1), "0.1");
  EXPECT_EQ(sm::format_double(NAN), "nan");
}
