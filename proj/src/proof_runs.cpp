#include <cmath>
#include <stdexcept>

#include "sparse_minimax/design_diagnostics.hpp"
#include "sparse_minimax/estimators.hpp"
#include "sparse_minimax/numerics.hpp"
#include "sparse_minimax/parallel.hpp"
#include "sparse_minimax/proof_events.hpp"

namespace sparse_minimax {

void ProofRunConfig::validate() const {
  if (n < 1 || k < 1 || p <= k) throw std::invalid_argument("proof run: require n >= 1 and 1 <= k < p");
  if (!(sigma > 0.0)) throw std::invalid_argument("proof run: sigma must be > 0");
  if (!(eps > 0.0)) throw std::invalid_argument("proof run: eps must be > 0");
  if (reps < 1) throw std::invalid_argument("proof run: reps must be >= 1");
  if (threads < 1) throw std::invalid_argument("proof run: threads must be >= 1");
  if (resolved_k_star() <= k || resolved_k_star() >= p) {
    throw std::invalid_argument("proof run: require k < k_star < p");
  }
  stochastic.validate();
}

double ProofRunConfig::amplitude() const {
  return amplitude_multiplier * sigma *
         std::sqrt(2.0 * std::log(static_cast<double>(p) / static_cast<double>(k)) / static_cast<double>(n));
}

namespace {

struct LassoDraw {
  Instance inst;
  Vector beta;
  EstimatorResult lasso;
  double lambda = 0.0;
  double tol = 0.0;
};

LassoDraw draw_and_fit(const ProofRunConfig& cfg, std::size_t r) {
  const SeedSpec seed{cfg.seed, static_cast<std::uint64_t>(r)};
  LassoDraw d;
  d.inst = synthesize(gen_design(cfg.n, cfg.p, seed), make_signal(cfg.p, cfg.k, cfg.amplitude(), FirstK{}),
                      cfg.sigma, seed);
  d.beta = d.inst.signal.dense();
  d.lambda = lambda_eps(cfg.eps, cfg.sigma, cfg.n, cfg.p, cfg.k);
  d.tol = default_lasso_tol(d.inst.X(), d.inst.y, cfg.sigma);
  d.lasso = lasso_fit(d.inst.X(), d.inst.y, LassoConfig{d.lambda, d.tol, 100000});
  return d;
}

}  // namespace

GapRun run_gap_experiment(const ProofRunConfig& config) {
  config.validate();
  struct Slot {
    bool converged = false;
    ResolventReport report;
    GapCheck gap;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(config.reps));
  parallel_for(slots.size(), config.threads, [&](std::size_t r) {
    const LassoDraw d = draw_and_fit(config, r);
    const Vector beta_o = oracle_estimator(d.beta, d.inst.X(), d.inst.noise.z, d.lambda);
    slots[r].converged = d.lasso.converged;
    slots[r].report = b_delta_check(d.inst, d.lasso.beta_hat, beta_o, config.resolved_k_star());
    slots[r].gap = oracle_lasso_gap_check(d.beta, d.lasso.beta_hat, beta_o, slots[r].report, d.tol);
  });

  GapRun out;
  out.reps = config.reps;
  out.worst_excess = -std::numeric_limits<double>::infinity();
  std::vector<double> deltas;
  for (const auto& s : slots) {
    deltas.push_back(s.report.delta_emp);
    if (!s.converged) ++out.not_converged;
    if (s.report.contains_all) ++out.contained;
    if (s.gap.status == GapStatus::kVacuous) continue;
    ++out.non_vacuous;
    out.worst_excess = std::max(out.worst_excess, s.gap.lhs - s.gap.rhs - s.gap.slack);
    if (s.gap.status == GapStatus::kHolds) {
      ++out.holds;
    } else {
      ++out.violated;
    }
  }
  if (out.non_vacuous == 0) out.worst_excess = 0.0;
  out.containment_rate = static_cast<double>(out.contained) / out.reps;
  out.mean_delta_emp = mean_stderr(deltas).mean;
  return out;
}

StochasticRun run_stochastic_error(const ProofRunConfig& config) {
  config.validate();
  const auto& params = config.stochastic;
  const Matrix X = gen_design(config.n, config.p, SeedSpec{config.seed, 0}).X;

  StochasticRun out;
  out.reps = config.reps;
  out.tolerated = params.delta3 + 3.0 * std::sqrt(params.delta3 * (1.0 - params.delta3) / config.reps);
  out.applicable = max_column_norm(X) <= (1.0 + params.delta0) * std::sqrt(static_cast<double>(config.n));
  if (!out.applicable) return out;

  std::vector<StochasticCheck> checks(static_cast<std::size_t>(config.reps));
  parallel_for(checks.size(), config.threads, [&](std::size_t r) {
    const SeedSpec seed{config.seed, static_cast<std::uint64_t>(r)};
    const Vector z = gen_noise(config.n, config.sigma, seed).z;
    const auto probes = stochastic_probe_directions(X, z, config.k, config.u_random, seed);
    checks[r] = stochastic_error_event_check(X, z, config.k, config.sigma, params, probes);
  });
  out.worst_margin = -std::numeric_limits<double>::infinity();
  for (const auto& c : checks) {
    if (c.holding < c.samples) ++out.failures;
    out.worst_margin = std::max(out.worst_margin, c.worst_margin);
  }
  out.failure_fraction = static_cast<double>(out.failures) / out.reps;
  out.pass = out.failure_fraction <= out.tolerated;
  return out;
}

LassoErrorRun run_lasso_error_bounds(const ProofRunConfig& config) {
  config.validate();
  const DeltaConsts dc = delta_consts(config.eps);
  StochasticErrorParams params;
  params.delta0 = params.delta1 = params.delta2 = dc.delta0;
  params.delta3 = config.stochastic.delta3;

  struct Slot {
    bool converged = false;
    bool event = false;
    double err = 0.0;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(config.reps));
  parallel_for(slots.size(), config.threads, [&](std::size_t r) {
    const LassoDraw d = draw_and_fit(config, r);
    EventAOptions opts;
    opts.seed = config.seed ^ static_cast<std::uint64_t>(r);
    opts.skip_theta_when_norms_fail = true;
    slots[r].event = event_a_check(d.inst.X(), static_cast<int>(config.k), config.eps, opts).holds;
    slots[r].converged = d.lasso.converged;
    slots[r].err = (d.lasso.beta_hat - d.beta).norm();
  });

  LassoErrorRun out;
  out.reps = config.reps;
  out.l2_bound = lasso_l2_bound(config.k, config.n, config.p, config.sigma, config.eps, params);
  out.moment_bound = lasso_moment_bound(2.0, config.k, config.n, config.p, config.sigma, config.eps,
                                        params.delta0, params.delta2);
  std::vector<double> sq, sq_event;
  for (const auto& s : slots) {
    if (!s.converged) ++out.not_converged;
    if (s.event) ++out.event_a_holds;
    if (s.err <= out.l2_bound) ++out.below_bound;
    out.max_error = std::max(out.max_error, s.err);
    sq.push_back(s.err * s.err);
    sq_event.push_back(s.event ? s.err * s.err : 0.0);
  }
  out.mean_sq_error = mean_stderr(sq).mean;
  out.mean_sq_error_on_event = mean_stderr(sq_event).mean;
  return out;
}

}  // namespace sparse_minimax
