#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "fcbias/rng.hpp"

namespace fcbias {

struct Interval {
  double lo = 0;
  double hi = 0;
  double width() const { return hi - lo; }
  bool contains(double x) const { return lo <= x && x <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct BootstrapParams {
  int resamples = 10000;
  double fraction = 0.2;  // resample size = ceil(fraction * n)
  double level = 0.95;
  std::uint64_t seed = 0;
};

/// Median of `v` (mean of the two middle elements for even sizes). Reorders `v`.
inline double median_inplace(std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("median of empty sample");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return lower + (upper - lower) / 2;
}

inline double median(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  return median_inplace(v);
}

/// Quantile of sorted data by linear interpolation between order statistics
/// at position q * (n - 1).
inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(i);
  return sorted[i] + (sorted[i + 1] - sorted[i]) * frac;
}

inline std::size_t bootstrap_sample_size(std::size_t n, double fraction) {
  // The epsilon absorbs products like 0.2 * 35 = 7.000000000000001.
  const auto m = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  return std::max<std::size_t>(m, 1);
}

/// Percentile bootstrap interval for the median.
///
/// Draws `resamples` samples of size ceil(fraction * n) with replacement; the
/// b-th resample uses its own mt19937_64 stream seeded from
/// derive_seed(derive_seed(seed, "bootstrap"), b). Returns the
/// ((1-level)/2, (1+level)/2) quantiles of the resample medians.
inline std::vector<double> bootstrap_medians(std::span<const double> values, const BootstrapParams& p) {
  if (values.empty()) throw std::invalid_argument("bootstrap: empty sample");
  if (p.resamples < 1) throw std::invalid_argument("bootstrap: resamples must be >= 1");
  if (!(p.fraction > 0 && p.fraction <= 1)) throw std::invalid_argument("bootstrap: fraction must be in (0, 1]");
  const std::size_t m = bootstrap_sample_size(values.size(), p.fraction);
  const std::uint64_t base = derive_seed(p.seed, "bootstrap");
  std::vector<double> medians(static_cast<std::size_t>(p.resamples));
  std::vector<double> sample(m);
  for (std::size_t b = 0; b < medians.size(); ++b) {
    Rng rng(derive_seed(base, static_cast<std::uint64_t>(b)));
    for (auto& s : sample) s = values[uniform_index(rng, values.size())];
    medians[b] = median_inplace(sample);
  }
  return medians;
}

inline Interval bootstrap_median_ci(std::span<const double> values, const BootstrapParams& p) {
  if (!(p.level > 0 && p.level < 1)) throw std::invalid_argument("bootstrap: level must be in (0, 1)");
  auto medians = bootstrap_medians(values, p);
  std::sort(medians.begin(), medians.end());
  const double alpha = 1 - p.level;
  return {quantile_sorted(medians, alpha / 2), quantile_sorted(medians, 1 - alpha / 2)};
}

}  // namespace fcbias
