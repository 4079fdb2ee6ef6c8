#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>

namespace hosim::rng {

// splitmix64 step; used only to mix seeds, never as a simulation stream.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Derives the seed of a named substream from a scenario master seed.
/// Streams with different labels (or indices) are statistically independent,
/// which is what makes common-random-number comparisons across schemes work:
/// consuming the "failure" stream faster never perturbs the "mobility" one.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                                 std::uint64_t index = 0) {
  std::uint64_t s = master ^ fnv1a(label) ^ (0x9E3779B97F4A7C15ULL * (index + 1));
  splitmix64(s);
  return splitmix64(s);
}

/// A named random stream. Wraps std::mt19937_64 but samples all
/// distributions itself so that a given (seed, call sequence) produces the
/// same draws on every standard library implementation.
class Stream {
 public:
  Stream(std::uint64_t master, std::string_view label, std::uint64_t index = 0)
      : gen_(derive_seed(master, label, index)) {}

  explicit Stream(std::uint64_t raw_seed) : gen_(raw_seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t uniform_int(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("rng: uniform_int bound must be positive");
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t v;
    do {
      v = gen_();
    } while (v >= limit);
    return v % bound;
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Poisson draw by Knuth's product method, chunked so that exp(-lambda)
  /// stays well inside double range for any mean used by the simulator.
  std::uint64_t poisson(double mean) {
    if (mean < 0) throw std::invalid_argument("rng: poisson mean must be non-negative");
    std::uint64_t total = 0;
    while (mean > 30.0) {
      total += poisson_small(30.0);
      mean -= 30.0;
    }
    if (mean > 0) total += poisson_small(mean);
    return total;
  }

 private:
  std::uint64_t poisson_small(double mean) {
    const double floor_p = std::exp(-mean);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > floor_p);
    return k - 1;
  }

  std::mt19937_64 gen_;
};

}  // namespace hosim::rng
