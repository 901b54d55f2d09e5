#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sparse_minimax {

/// Raised when an exact enumeration would exceed its configured cap.
class CapacityError : public std::runtime_error {
 public:
  CapacityError(const std::string& what, double count, double cap)
      : std::runtime_error(what), count_(count), cap_(cap) {}
  double count() const { return count_; }
  double cap() const { return cap_; }

 private:
  double count_;
  double cap_;
};

inline constexpr double kDefaultEnumerationCap = 1e6;

double normal_pdf(double x);
double normal_cdf(double x);
/// Upper tail 1 - Phi(x), accurate for large x.
double normal_sf(double x);
double normal_quantile(double prob);

/// Neumaier-compensated sum; the result does not depend on how the inputs were
/// produced, only on their order.
double stable_sum(std::span<const double> values);

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t count = 0;
};
MeanStderr mean_stderr(std::span<const double> values);

/// C(p, s) as a double (exact while below 2^53).
double binomial_count(std::int64_t p, std::int64_t s);

/// Calls visit(indices) for every size-s subset of {0..p-1} in lexicographic
/// order. Throws CapacityError when C(p, s) > cap.
void for_each_subset(int p, int s, double cap, const std::string& what,
                     const std::function<void(const std::vector<int>&)>& visit);

}  // namespace sparse_minimax
