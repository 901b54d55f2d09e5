#include "sparse_minimax/rng.hpp"

#include <cmath>
#include <numbers>

namespace sparse_minimax {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(prod >> 32);
  lo = static_cast<std::uint32_t>(prod);
}

std::array<std::uint32_t, 2> derive_key(std::uint64_t master_seed, std::uint64_t purpose_key) {
  const std::uint64_t k = splitmix64(master_seed ^ splitmix64(purpose_key));
  return {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t hash_label(std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

CounterRng::CounterRng(SeedSpec seed, StreamPurpose purpose)
    : CounterRng(seed, static_cast<std::uint64_t>(purpose)) {}

CounterRng::CounterRng(SeedSpec seed, std::uint64_t purpose_key)
    : key_(derive_key(seed.master_seed, purpose_key)), stream_id_(seed.stream_id) {}

void CounterRng::refill() {
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
      static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32)};
  buffer_ = philox4x32(ctr, key_);
  ++block_;
  buffered_words_ = 4;
}

std::uint64_t CounterRng::next_u64() {
  if (buffered_words_ < 2) refill();
  const int at = 4 - buffered_words_;
  buffered_words_ -= 2;
  return static_cast<std::uint64_t>(buffer_[at]) |
         (static_cast<std::uint64_t>(buffer_[at + 1]) << 32);
}

double CounterRng::next_uniform() {
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

std::uint64_t CounterRng::next_below(std::uint64_t bound) {
  // Rejection on the top of the range keeps the draw exactly uniform.
  const std::uint64_t limit = bound * (UINT64_MAX / bound);
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % bound;
}

double CounterRng::next_normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  const double u1 = next_uniform();
  const double u2 = next_uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_normal_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

void CounterRng::fill_normal(std::span<double> out) {
  for (double& v : out) v = next_normal();
}

}  // namespace sparse_minimax
