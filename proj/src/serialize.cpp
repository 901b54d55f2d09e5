#include "sparse_minimax/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "sparse_minimax/config.hpp"

namespace sparse_minimax {

namespace {

// nlohmann writes non-finite doubles as null; keep them readable instead.
json num(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

json to_json(const ExperimentConfig& c) {
  json est = json::array();
  for (auto id : c.estimators) est.push_back(to_string(id));
  json amps = json::array();
  for (double a : c.resolved_amplitudes()) amps.push_back(num(a));
  return {{"n", c.n},
          {"p", c.p},
          {"k", c.k},
          {"sigma", num(c.sigma)},
          {"eps", num(c.eps)},
          {"estimators", est},
          {"amplitudes", amps},
          {"reps", c.reps},
          {"master_seed", c.master_seed},
          {"slope_q", num(c.slope_q)},
          {"random_support", c.random_support},
          {"noiseless", c.noiseless},
          {"enumeration_cap", num(c.enumeration_cap)},
          {"sre_restarts", c.sre_restarts},
          {"max_flagged_share", num(c.max_flagged_share)},
          {"config_text", to_config_text(c)}};
}

json to_json(const ProofRunConfig& c) {
  return {{"n", c.n},
          {"p", c.p},
          {"k", c.k},
          {"sigma", num(c.sigma)},
          {"eps", num(c.eps)},
          {"amplitude_multiplier", num(c.amplitude_multiplier)},
          {"amplitude", num(c.amplitude())},
          {"k_star", c.resolved_k_star()},
          {"reps", c.reps},
          {"seed", c.seed},
          {"delta0", num(c.stochastic.delta0)},
          {"delta1", num(c.stochastic.delta1)},
          {"delta2", num(c.stochastic.delta2)},
          {"delta3", num(c.stochastic.delta3)},
          {"u_random", c.u_random},
          {"config_text", to_config_text(c)}};
}

json to_json(const EventAReport& r) {
  return {{"delta0", num(r.delta0)},
          {"c0", num(r.c0)},
          {"max_col_norm", num(r.max_col_norm)},
          {"col_norm_limit", num(r.col_norm_limit)},
          {"max_col_norm_ok", r.max_col_norm_ok},
          {"theta_upper", num(r.theta_upper)},
          {"theta_threshold", num(r.theta_threshold)},
          {"theta_evaluated", r.theta_evaluated},
          {"theta_exact", r.theta_exact},
          {"theta_ok", r.theta_ok},
          {"holds", r.holds}};
}

json to_json(const SreEstimate& e, bool with_vector) {
  json out = {{"theta_upper", num(e.theta_upper)}, {"restarts", e.restarts}, {"exact", e.exact}};
  if (with_vector) {
    json v = json::array();
    for (Eigen::Index i = 0; i < e.argmin_vector.size(); ++i) v.push_back(num(e.argmin_vector(i)));
    out["argmin_vector"] = v;
  }
  return out;
}

json to_json(const TailReport& r) {
  json points = json::array();
  for (const auto& t : r.points) {
    json params = json::object();
    for (const auto& [name, value] : t.point.params) params[name] = num(value);
    points.push_back({{"params", params},
                      {"reps", t.reps},
                      {"empirical", num(t.empirical)},
                      {"bound", num(t.bound)},
                      {"stderr", num(t.stderr_)},
                      {"margin", num(t.margin)},
                      {"pass", t.pass}});
  }
  int passed = 0;
  for (const auto& t : r.points) passed += t.pass ? 1 : 0;
  return {{"lemma_id", r.lemma_id},
          {"surrogate", r.surrogate},
          {"points", points},
          {"passed", passed},
          {"failed", static_cast<int>(r.points.size()) - passed},
          {"pass", r.pass}};
}

json to_json(const BinomialCheck& c) {
  return {{"exact", c.exact}, {"bound", num(c.bound)}, {"holds", c.holds}};
}

json to_json(const GapRun& r) {
  return {{"reps", r.reps},
          {"contained", r.contained},
          {"non_vacuous", r.non_vacuous},
          {"holds", r.holds},
          {"violated", r.violated},
          {"not_converged", r.not_converged},
          {"containment_rate", num(r.containment_rate)},
          {"mean_delta_emp", num(r.mean_delta_emp)},
          {"worst_excess", num(r.worst_excess)}};
}

json to_json(const StochasticRun& r) {
  return {{"applicable", r.applicable},
          {"reps", r.reps},
          {"failures", r.failures},
          {"failure_fraction", num(r.failure_fraction)},
          {"tolerated", num(r.tolerated)},
          {"worst_margin", num(r.worst_margin)},
          {"pass", r.pass}};
}

json to_json(const LassoErrorRun& r) {
  return {{"reps", r.reps},
          {"not_converged", r.not_converged},
          {"event_a_holds", r.event_a_holds},
          {"l2_bound", num(r.l2_bound)},
          {"below_bound", r.below_bound},
          {"max_error", num(r.max_error)},
          {"moment_bound", num(r.moment_bound)},
          {"mean_sq_error", num(r.mean_sq_error)},
          {"mean_sq_error_on_event", num(r.mean_sq_error_on_event)}};
}

json risk_summary(const RiskReport& report) {
  json ests = json::array();
  for (const auto& e : report.estimators) {
    json per = json::array();
    for (const auto& a : e.per_amplitude) {
      per.push_back({{"amplitude", num(a.amplitude)},
                     {"mean", num(a.stats.mean)},
                     {"stderr", num(a.stats.stderr_)},
                     {"count", a.stats.count},
                     {"flagged", a.flagged}});
    }
    ests.push_back({{"estimator", to_string(e.id)},
                    {"minimax_ratio", num(e.minimax_ratio)},
                    {"sup_amplitude", num(e.sup_amplitude)},
                    {"flagged", e.flagged},
                    {"failed", e.failed},
                    {"per_amplitude", per}});
  }
  json out = {{"denominator", num(report.denominator)},
              {"oracle_ratio_prediction",
               num(oracle_ratio_prediction(report.config.n, report.config.p, report.config.k, report.config.eps))},
              {"estimators", ests},
              {"failed", report.failed}};
  if (report.failed) out["failure"] = report.failure;
  return out;
}

std::string risk_csv(const RiskReport& report) {
  std::ostringstream out;
  out << "amplitude,replicate,sq_error,estimator,seed\n";
  const std::string seed = std::to_string(report.config.master_seed);
  for (const auto& e : report.estimators) {
    const std::string name = to_string(e.id);
    for (std::size_t a = 0; a < report.amplitudes.size(); ++a) {
      const std::string amp = g17(report.amplitudes[a]);
      for (std::size_t r = 0; r < e.sq_errors[a].size(); ++r) {
        out << amp << ',' << r << ',' << g17(e.sq_errors[a][r]) << ',' << name << ',' << seed << '\n';
      }
    }
  }
  return out.str();
}

std::string risk_tsv(const RiskReport& report, const std::string& manifest_name) {
  std::ostringstream out;
  out << "# manifest=" << manifest_name << '\n' << "amplitude";
  for (const auto& e : report.estimators) {
    out << '\t' << to_string(e.id) << "_mean\t" << to_string(e.id) << "_stderr";
  }
  out << '\n';
  for (std::size_t a = 0; a < report.amplitudes.size(); ++a) {
    out << g17(report.amplitudes[a]);
    for (const auto& e : report.estimators) {
      out << '\t' << g17(e.per_amplitude[a].stats.mean) << '\t' << g17(e.per_amplitude[a].stats.stderr_);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace sparse_minimax
