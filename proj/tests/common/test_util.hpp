#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "bbo/errors.hpp"

namespace bbo_test {

template <typename F>
std::optional<bbo::ErrorCode> error_code_of(F&& f) {
  try {
    f();
  } catch (const bbo::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Kolmogorov-Smirnov distance between samples and a CDF.
inline double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double c = cdf(samples[i]);
    d = std::max(d, std::fabs((i + 1) / n - c));
    d = std::max(d, std::fabs(i / n - c));
  }
  return d;
}

}  // namespace bbo_test
