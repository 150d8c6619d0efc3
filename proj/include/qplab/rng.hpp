#pragma once

#include <cstdint>
#include <random>

namespace qp {

// Seedable generator with distribution code pinned here rather than in the
// standard library, so streams are identical across toolchains.
class Rng {
public:
  explicit Rng(std::uint64_t seed = 0) : eng_(seed) {}

  std::uint64_t bits() { return eng_(); }
  // uniform on [0, 1)
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  // uniform integer on [a, b]
  long integer(long a, long b) {
    const auto span = static_cast<std::uint64_t>(b - a) + 1;
    return a + static_cast<long>(eng_() % span);
  }
  double normal() {
    // Box-Muller; one draw per call keeps the stream position simple
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

private:
  std::mt19937_64 eng_;
};

} // namespace qp
