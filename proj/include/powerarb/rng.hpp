#ifndef POWERARB_RNG_HPP
#define POWERARB_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace powerarb {

// mt19937_64 with hand-written uniform, normal and exponential transforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Unbiased integer in [0, n).
  std::uint64_t UniformInt(std::uint64_t n) {
    const std::uint64_t limit = -n % n;  // 2^64 mod n
    std::uint64_t x = engine_();
    while (x < limit) x = engine_();
    return x % n;
  }

  bool Bernoulli(double p) { return Uniform() < p; }

  // Box-Muller; the second variate is cached.
  double Normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = Uniform();
    while (u1 <= 0.0) u1 = Uniform();
    const double u2 = Uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double Normal(double mean, double stddev) { return mean + stddev * Normal(); }

  double Exponential(double mean) { return -mean * std::log1p(-Uniform()); }

  // Derives an independent child seed; used to give each component its own stream.
  std::uint64_t Fork() { return SplitMix(engine_()); }

  static std::uint64_t SplitMix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace powerarb

#endif  // POWERARB_RNG_HPP
