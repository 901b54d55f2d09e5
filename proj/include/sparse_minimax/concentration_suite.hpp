#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace sparse_minimax {

/// Named parameters of one grid cell, e.g. {{"d", 50}, {"tau", 0.5}}.
struct GridPoint {
  std::vector<std::pair<std::string, double>> params;

  double get(const std::string& name) const;
  bool has(const std::string& name) const;
  std::string describe() const;
};

enum class TailDirection {
  /// empirical frequency <= bound + 3 binomial stderr
  kFrequency,
  /// empirical mean + 3 stderr <= bound
  kMean,
};

struct LemmaSpec {
  std::string id;
  std::string statement;
  std::string sampler;
  std::vector<std::string> param_names;
  TailDirection direction = TailDirection::kFrequency;
  /// Matrix lemmas default to 10^3 replicates, scalar ones to 10^5.
  bool matrix = false;
  /// The bound is a calibrated level rather than a proven one.
  bool surrogate = false;
  std::vector<GridPoint> default_grid;

  int default_reps() const { return matrix ? 1000 : 100000; }
};

const std::vector<LemmaSpec>& lemma_registry();
/// Throws std::invalid_argument for an unregistered id.
const LemmaSpec& find_lemma(const std::string& id);

struct TailPoint {
  GridPoint point;
  int reps = 0;
  /// Exceedance frequency, or the sample mean for kMean rows.
  double empirical = 0.0;
  double bound = 0.0;
  double stderr_ = 0.0;
  /// bound + 3 stderr - empirical (kFrequency) or bound - empirical - 3 stderr (kMean).
  double margin = 0.0;
  bool pass = false;
};

struct TailReport {
  std::string lemma_id;
  bool surrogate = false;
  std::vector<TailPoint> points;
  bool pass = true;
};

/// An empty grid means the registry default. Requires reps >= 100.
TailReport check_tail_bound(const std::string& lemma_id, const std::vector<GridPoint>& grid, int reps,
                            std::uint64_t seed, int threads = 1);

/// One grid point per non-empty line, written as whitespace-separated
/// name=value pairs; '#' starts a comment.
std::vector<GridPoint> parse_grid(const std::string& text);

struct BinomialCheck {
  std::string exact;  // C(p, s) in decimal
  double bound = 0.0; // (e p / s)^s
  bool holds = false;
};

/// Exact C(p, s) against (e p / s)^s evaluated in 50-digit arithmetic.
BinomialCheck binom_bound_check(int p, int s);

/// sqrt of the sum of the k_star largest (X_j^T z)^2, which is
/// sup_{|T| = k_star} ||X_T^T z||_2.
double sup_xtz_topk(const std::vector<double>& xtz, int k_star);

}  // namespace sparse_minimax
