#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "sparse_minimax/rng.hpp"

namespace sparse_minimax {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// n x p matrix of i.i.d. N(0,1) entries. Entries are drawn in column-major
/// order from the design stream of `seed`.
struct GaussianDesign {
  Matrix X;
  SeedSpec seed;

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index p() const { return X.cols(); }
};

struct NoiseVector {
  Vector z;
  double sigma = 1.0;
};

/// A k-sparse coefficient vector stored by its support.
struct SparseSignal {
  Eigen::Index p = 0;
  std::vector<Eigen::Index> support;  // strictly increasing
  std::vector<double> values;         // nonzero, aligned with support
  /// Set when the signal was requested with amplitude 0; the support is then empty.
  bool zero_signal = false;

  Vector dense() const;
  std::size_t sparsity() const { return support.size(); }
};

struct Instance {
  GaussianDesign design;
  NoiseVector noise;
  SparseSignal signal;
  Vector y;

  const Matrix& X() const { return design.X; }
};

struct FirstK {};
struct RandomSupport {
  SeedSpec seed;
};
using SupportRule = std::variant<FirstK, RandomSupport>;

GaussianDesign gen_design(Eigen::Index n, Eigen::Index p, SeedSpec seed);

/// Equal-magnitude signal with exactly k entries equal to `amplitude`.
SparseSignal make_signal(Eigen::Index p, Eigen::Index k, double amplitude, const SupportRule& rule);

/// Support-only helper shared by make_signal and the risk loops.
std::vector<Eigen::Index> draw_support(Eigen::Index p, Eigen::Index k, const SupportRule& rule);

/// Noise z = sigma * g with g drawn from the noise stream of `seed`.
NoiseVector gen_noise(Eigen::Index n, double sigma, SeedSpec seed);

/// X beta + z, accumulated over the support in increasing index order.
Vector model_response(const Matrix& X, const SparseSignal& signal, const Vector& z);

Instance synthesize(GaussianDesign design, SparseSignal signal, double sigma, SeedSpec seed);

/// Binary dump for cross-language replay. Layout (little-endian):
///   char[8]  magic "SMINST01"
///   u64 n, u64 p, f64 sigma, u64 master_seed, u64 stream_id
///   f64[n*p] X row-major, f64[n] z, f64[p] beta, f64[n] y
void write_instance(std::ostream& out, const Instance& instance);
Instance read_instance(std::istream& in);
void save_instance(const std::string& path, const Instance& instance);
Instance load_instance(const std::string& path);

}  // namespace sparse_minimax
