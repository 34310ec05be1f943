#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace adasdbo {

/// Deterministic random stream. mt19937_64 output is fully specified by the
/// standard, and the normal transform is hand-rolled (Marsaglia polar) so a
/// given (seed, stream) pair yields the same draws on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::string_view stream = {})
      : eng_(mix_seed(seed, stream)) {}

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  /// Uniform index in [0, n), unbiased via rejection.
  std::size_t index(std::size_t n) {
    const std::uint64_t bound = n;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
  }

  static std::uint64_t mix_seed(std::uint64_t seed, std::string_view stream) {
    // FNV-1a over the stream tag folded into the numeric seed, then one
    // splitmix64 round to spread low-entropy seeds.
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : stream) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ull;
    }
    std::uint64_t z = seed ^ h;
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct RngSpec {
  std::uint64_t seed = 1;
  std::string stream;

  Rng make() const { return Rng(seed, stream); }
  Rng make(std::string_view substream) const {
    return Rng(seed, stream + "/" + std::string(substream));
  }
};

}  // namespace adasdbo
