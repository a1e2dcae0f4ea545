#ifndef RBAL_RNG_HPP
#define RBAL_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace rbal {

// Deterministic random source. The engine is std::mt19937_64 (bit-exact output
// is mandated by the standard); all variate mappings are implemented here
// rather than with std::*_distribution, whose algorithms are
// implementation-defined. Reruns from the same seed therefore reproduce
// streams exactly.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1]; safe as a log() argument.
  double uniform_pos() { return 1.0 - uniform(); }

  // Unbiased integer in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // Standard normal via Box-Muller (no state cached between calls).
  double normal() {
    const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    const double theta = 2.0 * M_PI * uniform();
    return r * std::cos(theta);
  }

  double gamma(double shape) {
    // Marsaglia-Tsang for shape >= 1, boosted for shape < 1.
    if (shape < 1.0) {
      const double u = uniform_pos();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x;
      double v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_pos();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double chi_squared(double dof) { return 2.0 * gamma(0.5 * dof); }

  // Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

  // k distinct indices drawn from [0, n), returned in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                      std::size_t k) {
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    std::vector<std::size_t> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k && i < n; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(below(n - i));
      std::swap(pool[i], pool[j]);
      out.push_back(pool[i]);
    }
    return out;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rbal

#endif  // RBAL_RNG_HPP
