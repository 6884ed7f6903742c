#pragma once

#include <cmath>
#include <vector>

#include "smi/types.hpp"

namespace test_support {

inline double normal_logpdf(double x, double mean, double sd) {
  const double r = (x - mean) / sd;
  return -0.5 * std::log(2.0 * M_PI) - std::log(sd) - 0.5 * r * r;
}

/// k equally spaced nodes on [lo, hi].
inline std::vector<double> nodes(double lo, double hi, int k) {
  std::vector<double> x(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i)
    x[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (k - 1);
  return x;
}

/// Trapezoid weights for nodes(lo, hi, k).
inline std::vector<double> trapezoid(double lo, double hi, int k) {
  std::vector<double> w(static_cast<std::size_t>(k), (hi - lo) / (k - 1));
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

inline smi::Observations column(const std::vector<double>& v) {
  smi::Observations o(static_cast<smi::Index>(v.size()), 1);
  for (std::size_t i = 0; i < v.size(); ++i)
    o(static_cast<smi::Index>(i), 0) = v[i];
  return o;
}

inline double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v)
    s += x;
  return s / static_cast<double>(v.size());
}

} // namespace test_support
