#include "sparse_minimax/design_gen.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace sparse_minimax {

namespace {

constexpr char kInstanceMagic[8] = {'S', 'M', 'I', 'N', 'S', 'T', '0', '1'};

static_assert(std::endian::native == std::endian::little,
              "instance dumps assume a little-endian host");

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw std::runtime_error("read_instance: truncated input");
  return value;
}

}  // namespace

Vector SparseSignal::dense() const {
  Vector beta = Vector::Zero(p);
  for (std::size_t i = 0; i < support.size(); ++i) beta(support[i]) = values[i];
  return beta;
}

GaussianDesign gen_design(Eigen::Index n, Eigen::Index p, SeedSpec seed) {
  if (n < 1 || p < 1) throw std::invalid_argument("gen_design: n and p must be positive");
  GaussianDesign design{Matrix(n, p), seed};
  CounterRng rng(seed, StreamPurpose::kDesign);
  rng.fill_normal(std::span<double>(design.X.data(), static_cast<std::size_t>(n * p)));
  return design;
}

std::vector<Eigen::Index> draw_support(Eigen::Index p, Eigen::Index k, const SupportRule& rule) {
  if (k < 1 || k > p) throw std::invalid_argument("make_signal: require 1 <= k <= p");
  std::vector<Eigen::Index> support;
  if (std::holds_alternative<FirstK>(rule)) {
    support.resize(static_cast<std::size_t>(k));
    std::iota(support.begin(), support.end(), Eigen::Index{0});
    return support;
  }
  // Partial Fisher-Yates over {0..p-1}; the first k slots form the support.
  CounterRng rng(std::get<RandomSupport>(rule).seed, StreamPurpose::kSupport);
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(p));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto j = i + static_cast<Eigen::Index>(rng.next_below(static_cast<std::uint64_t>(p - i)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  support.assign(perm.begin(), perm.begin() + k);
  std::sort(support.begin(), support.end());
  return support;
}

SparseSignal make_signal(Eigen::Index p, Eigen::Index k, double amplitude, const SupportRule& rule) {
  if (!std::isfinite(amplitude)) throw std::invalid_argument("make_signal: amplitude must be finite");
  SparseSignal signal;
  signal.p = p;
  auto support = draw_support(p, k, rule);
  if (amplitude == 0.0) {
    signal.zero_signal = true;
    return signal;
  }
  signal.support = std::move(support);
  signal.values.assign(signal.support.size(), amplitude);
  return signal;
}

NoiseVector gen_noise(Eigen::Index n, double sigma, SeedSpec seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("gen_noise: sigma must be finite and nonnegative");
  }
  NoiseVector noise{Vector(n), sigma};
  CounterRng rng(seed, StreamPurpose::kNoise);
  for (Eigen::Index i = 0; i < n; ++i) noise.z(i) = sigma * rng.next_normal();
  return noise;
}

Vector model_response(const Matrix& X, const SparseSignal& signal, const Vector& z) {
  if (X.cols() != signal.p || X.rows() != z.size()) {
    throw std::invalid_argument("model_response: dimension mismatch");
  }
  Vector y = Vector::Zero(X.rows());
  for (std::size_t i = 0; i < signal.support.size(); ++i) {
    y.noalias() += signal.values[i] * X.col(signal.support[i]);
  }
  y += z;
  return y;
}

Instance synthesize(GaussianDesign design, SparseSignal signal, double sigma, SeedSpec seed) {
  if (design.p() != signal.p) throw std::invalid_argument("synthesize: signal length != p");
  Instance inst;
  inst.noise = gen_noise(design.n(), sigma, seed);
  inst.y = model_response(design.X, signal, inst.noise.z);
  inst.design = std::move(design);
  inst.signal = std::move(signal);
  return inst;
}

void write_instance(std::ostream& out, const Instance& inst) {
  const auto n = inst.design.n();
  const auto p = inst.design.p();
  out.write(kInstanceMagic, sizeof(kInstanceMagic));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(n));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(p));
  put<double>(out, inst.noise.sigma);
  put<std::uint64_t>(out, inst.design.seed.master_seed);
  put<std::uint64_t>(out, inst.design.seed.stream_id);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) put<double>(out, inst.design.X(i, j));
  }
  for (Eigen::Index i = 0; i < n; ++i) put<double>(out, inst.noise.z(i));
  const Vector beta = inst.signal.dense();
  for (Eigen::Index j = 0; j < p; ++j) put<double>(out, beta(j));
  for (Eigen::Index i = 0; i < n; ++i) put<double>(out, inst.y(i));
}

Instance read_instance(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kInstanceMagic, sizeof(magic)) != 0) {
    throw std::runtime_error("read_instance: bad magic");
  }
  const auto n = static_cast<Eigen::Index>(get<std::uint64_t>(in));
  const auto p = static_cast<Eigen::Index>(get<std::uint64_t>(in));
  if (n < 1 || p < 1) throw std::runtime_error("read_instance: bad dimensions");
  Instance inst;
  inst.noise.sigma = get<double>(in);
  inst.design.seed.master_seed = get<std::uint64_t>(in);
  inst.design.seed.stream_id = get<std::uint64_t>(in);
  inst.design.X.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) inst.design.X(i, j) = get<double>(in);
  }
  inst.noise.z.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) inst.noise.z(i) = get<double>(in);
  inst.signal.p = p;
  for (Eigen::Index j = 0; j < p; ++j) {
    const double b = get<double>(in);
    if (b != 0.0) {
      inst.signal.support.push_back(j);
      inst.signal.values.push_back(b);
    }
  }
  inst.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) inst.y(i) = get<double>(in);
  return inst;
}

void save_instance(const std::string& path, const Instance& instance) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_instance: cannot open " + path);
  write_instance(out, instance);
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_instance: cannot open " + path);
  return read_instance(in);
}

}  // namespace sparse_minimax
