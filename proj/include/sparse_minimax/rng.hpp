#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

namespace sparse_minimax {

/// Addresses one reproducible random stream: the master seed of a run and a
/// stream index (the replicate index in Monte Carlo loops).
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;

  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

/// What a stream is used for. Each purpose gets its own key so that the design,
/// the noise and the support draw of one replicate never share random words.
enum class StreamPurpose : std::uint64_t {
  kDesign = 1,
  kNoise = 2,
  kSupport = 3,
  kSreStart = 4,
  kProbe = 5,
  kLemma = 6,
};

std::uint64_t splitmix64(std::uint64_t x);

/// 64-bit FNV-1a, used to turn lemma ids and similar labels into key material.
std::uint64_t hash_label(std::string_view label);

/// Philox4x32-10 block function (Salmon et al. 2011).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

/// Counter-based generator. The key is derived from (master_seed, purpose), the
/// upper half of the 128-bit counter holds stream_id and the lower half counts
/// blocks, so any block of any stream can be computed in isolation.
///
/// Normal variates use the Box-Muller transform on pairs of 53-bit uniforms in
/// (0, 1]; this method is fixed so that seeds reproduce across versions.
class CounterRng {
 public:
  CounterRng(SeedSpec seed, StreamPurpose purpose);
  CounterRng(SeedSpec seed, std::uint64_t purpose_key);

  std::uint64_t next_u64();
  /// Uniform on (0, 1].
  double next_uniform();
  /// Uniform integer in [0, bound).
  std::uint64_t next_below(std::uint64_t bound);
  double next_normal();
  void fill_normal(std::span<double> out);

 private:
  void refill();

  std::array<std::uint32_t, 2> key_{};
  std::uint64_t stream_id_ = 0;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_words_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace sparse_minimax
