#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace smi {

/// SplitMix64 finalizer. Used to derive independent stream seeds from a master seed.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  return mix64(mix64(master) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

/// FNV-1a, so streams can be named ("stage2", "elpd", ...).
constexpr std::uint64_t stream_id(std::string_view name) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view name) noexcept {
  return derive_seed(master, stream_id(name));
}

/** Portable random number generator.
 *
 * The engine is std::mt19937_64, whose output sequence is fixed by the C++ standard. All
 * distributions are implemented here rather than taken from <random>, whose distribution
 * algorithms are implementation-defined; this keeps seeded output identical across
 * standard libraries.
 *
 *   uniform  : top 53 bits of one engine draw, scaled to [0, 1)
 *   normal   : Marsaglia polar method, second variate cached
 *   poisson  : multiplication method for mu < 10, PTRS (Hormann 1993) otherwise
 *   binomial : inversion when n*min(p,1-p) < 30, Bernoulli summation otherwise
 */
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on the open interval (0, 1).
  double uniform_pos() {
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return u;
  }

  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n);

  std::int64_t poisson(double mu);
  std::int64_t binomial(std::int64_t n, double p);

private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

} // namespace smi
