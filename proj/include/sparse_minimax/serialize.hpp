#pragma once

#include <json.hpp>

#include "sparse_minimax/concentration_suite.hpp"
#include "sparse_minimax/design_diagnostics.hpp"
#include "sparse_minimax/proof_events.hpp"
#include "sparse_minimax/risk_lab.hpp"

namespace sparse_minimax {

using nlohmann::json;

json to_json(const ExperimentConfig& config);
json to_json(const ProofRunConfig& config);
json to_json(const EventAReport& report);
/// The argmin vector is included only when `with_vector` is set; it is p long.
json to_json(const SreEstimate& estimate, bool with_vector = false);
json to_json(const TailReport& report);
json to_json(const BinomialCheck& check);
json to_json(const GapRun& run);
json to_json(const StochasticRun& run);
json to_json(const LassoErrorRun& run);

/// Per estimator: minimax ratio, sup amplitude, flagged count and the
/// per-amplitude mean and stderr. Raw errors are left to the CSV.
json risk_summary(const RiskReport& report);

/// Rows `amplitude,replicate,sq_error,estimator,seed`, doubles in %.17g.
std::string risk_csv(const RiskReport& report);
/// Plot-ready table: amplitude, then mean and stderr per estimator.
std::string risk_tsv(const RiskReport& report, const std::string& manifest_name);

}  // namespace sparse_minimax
