#include "sparse_minimax/numerics.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

namespace sparse_minimax {

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double normal_quantile(double prob) {
  if (!(prob > 0.0 && prob < 1.0)) {
    throw std::invalid_argument("normal_quantile: probability must lie in (0, 1)");
  }
  return boost::math::quantile(boost::math::normal_distribution<double>(), prob);
}

double stable_sum(std::span<const double> values) {
  double sum = 0.0;
  double compensation = 0.0;
  for (const double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      compensation += (sum - t) + v;
    } else {
      compensation += (v - t) + sum;
    }
    sum = t;
  }
  return sum + compensation;
}

MeanStderr mean_stderr(std::span<const double> values) {
  MeanStderr out;
  out.count = values.size();
  if (values.empty()) return out;
  out.mean = stable_sum(values) / static_cast<double>(values.size());
  if (values.size() < 2) return out;
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - out.mean;
    sq[i] = d * d;
  }
  const double var = stable_sum(sq) / static_cast<double>(values.size() - 1);
  out.stderr_ = std::sqrt(var / static_cast<double>(values.size()));
  return out;
}

double binomial_count(std::int64_t p, std::int64_t s) {
  if (s < 0 || s > p) return 0.0;
  s = std::min(s, p - s);
  double c = 1.0;
  for (std::int64_t i = 1; i <= s; ++i) {
    c = c * static_cast<double>(p - s + i) / static_cast<double>(i);
  }
  return std::round(c);
}

void for_each_subset(int p, int s, double cap, const std::string& what,
                     const std::function<void(const std::vector<int>&)>& visit) {
  const double count = binomial_count(p, s);
  if (count > cap) {
    std::ostringstream msg;
    msg << what << ": C(" << p << ", " << s << ") = " << count << " exceeds enumeration cap "
        << cap;
    throw CapacityError(msg.str(), count, cap);
  }
  if (s < 0 || s > p) return;
  std::vector<int> idx(static_cast<std::size_t>(s));
  for (int i = 0; i < s; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    visit(idx);
    int i = s - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == p - s + i) --i;
    if (i < 0) return;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < s; ++j) {
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
}

}  // namespace sparse_minimax
