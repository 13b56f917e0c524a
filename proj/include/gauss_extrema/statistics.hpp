#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "gauss_extrema/error.hpp"
#include "gauss_extrema/rng.hpp"

namespace gauss_extrema {

// Linear-interpolation quantile (Hyndman-Fan type 7) of unsorted data.
inline double quantile(std::span<const double> data, double p) {
  require(!data.empty(), ErrorCode::EmptyInput, "quantile of empty sample");
  std::vector<double> v(data.begin(), data.end());
  std::sort(v.begin(), v.end());
  const double h = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double median(std::span<const double> data) { return quantile(data, 0.5); }

inline double mean(std::span<const double> data) {
  require(!data.empty(), ErrorCode::EmptyInput, "mean of empty sample");
  return std::accumulate(data.begin(), data.end(), 0.0) / static_cast<double>(data.size());
}

inline double sample_variance(std::span<const double> data) {
  require(data.size() >= 2, ErrorCode::EmptyInput, "variance needs two samples");
  const double m = mean(data);
  double s = 0.0;
  for (double x : data) s += (x - m) * (x - m);
  return s / static_cast<double>(data.size() - 1);
}

// Standard error of the sample mean.
inline double standard_error(std::span<const double> data) {
  return std::sqrt(sample_variance(data) / static_cast<double>(data.size()));
}

inline constexpr std::size_t kBootstrapResamples = 1000;

// Bootstrap standard error of the median.
inline double bootstrap_median_se(std::span<const double> data, RngStream stream,
                                  std::size_t resamples = kBootstrapResamples) {
  require(data.size() >= 2, ErrorCode::EmptyInput, "bootstrap needs two samples");
  const std::size_t n = data.size();
  std::vector<double> medians(resamples);
  std::vector<double> buf(n);
  for (std::size_t b = 0; b < resamples; ++b) {
    for (std::size_t i = 0; i < n; ++i) buf[i] = data[stream.next_u64() % n];
    const auto mid = buf.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(buf.begin(), mid, buf.end());
    double med = *mid;
    if (n % 2 == 0) med = 0.5 * (med + *std::max_element(buf.begin(), mid));
    medians[b] = med;
  }
  return std::sqrt(sample_variance(medians));
}

// Kolmogorov-Smirnov distance between the empirical CDF of `sorted` and cdf.
inline double ks_statistic(std::span<const double> sorted, const std::function<double(double)>& cdf) {
  require(!sorted.empty(), ErrorCode::EmptyInput, "ks_statistic of empty sample");
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, std::abs(static_cast<double>(i + 1) / n - f), std::abs(static_cast<double>(i) / n - f)});
  }
  return d;
}

struct SummaryRow {
  double median = 0.0;
  double q10 = 0.0;
  double q90 = 0.0;
  double se = 0.0;  // bootstrap SE of the median
  std::size_t count = 0;
};

inline SummaryRow summarize(std::span<const double> data, RngStream stream) {
  SummaryRow row;
  row.count = data.size();
  row.median = median(data);
  row.q10 = quantile(data, 0.1);
  row.q90 = quantile(data, 0.9);
  row.se = data.size() >= 2 ? bootstrap_median_se(data, stream) : 0.0;
  return row;
}

}  // namespace gauss_extrema
