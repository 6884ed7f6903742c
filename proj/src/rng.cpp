#include "smi/rng.hpp"

#include <cmath>

#include "smi/errors.hpp"

namespace smi {

double Rng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_normal_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  cached_normal_ = v * f;
  has_cached_ = true;
  return u * f;
}

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  if (n == 0) throw contract_error("uniform_index: n must be positive");
  // rejection to avoid modulo bias
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

std::int64_t Rng::poisson(double mu) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw contract_error("poisson: mean must be finite and >= 0");
  if (mu == 0.0) return 0;
  if (mu < 10.0) {
    const double limit = std::exp(-mu);
    std::int64_t k = 0;
    double prod = uniform_pos();
    while (prod > limit) {
      ++k;
      prod *= uniform_pos();
    }
    return k;
  }
  // PTRS: transformed rejection with squeeze
  const double slam = std::sqrt(mu);
  const double loglam = std::log(mu);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = uniform() - 0.5;
    const double v = uniform_pos();
    const double us = 0.5 - std::fabs(u);
    const auto k = static_cast<std::int64_t>(std::floor((2.0 * a / us + b) * u + mu + 0.43));
    if (us >= 0.07 && v <= vr) return k;
    if (k < 0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        -mu + static_cast<double>(k) * loglam - std::lgamma(static_cast<double>(k) + 1.0))
      return k;
  }
}

std::int64_t Rng::binomial(std::int64_t n, double p) {
  if (n < 0 || !(p >= 0.0 && p <= 1.0)) throw contract_error("binomial: need n >= 0 and p in [0, 1]");
  if (n == 0 || p == 0.0) return 0;
  if (p == 1.0) return n;
  const bool flip = p > 0.5;
  const double q = flip ? 1.0 - p : p;
  std::int64_t k = 0;
  if (static_cast<double>(n) * q < 30.0) {
    // sequential inversion on the pmf recursion
    const double odds = q / (1.0 - q);
    double pmf = std::pow(1.0 - q, static_cast<double>(n));
    double u = uniform();
    while (u > pmf && k < n) {
      u -= pmf;
      pmf *= odds * static_cast<double>(n - k) / static_cast<double>(k + 1);
      ++k;
    }
  } else {
    for (std::int64_t i = 0; i < n; ++i)
      k += uniform() < q ? 1 : 0;
  }
  return flip ? n - k : k;
}

} // namespace smi
