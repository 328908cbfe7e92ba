#pragma once

// Seeded RNG helpers.  We draw raw bits from std::mt19937_64 and map them
// ourselves so that streams are reproducible byte-for-byte across platforms
// (the standard distributions are not pinned by the standard).

#include <complex>
#include <random>

namespace tll {

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform(double a = 0.0, double b = 1.0) {
        double u = (gen_() >> 11) * 0x1.0p-53;  // [0, 1)
        return a + (b - a) * u;
    }
    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(gen_() % static_cast<std::uint64_t>(hi - lo + 1));
    }
    std::complex<double> complex_in_disc(double radius = 1.0) {
        // rejection sampling keeps the distribution rotation-invariant
        for (;;) {
            double x = uniform(-1.0, 1.0), y = uniform(-1.0, 1.0);
            if (x * x + y * y <= 1.0) return {radius * x, radius * y};
        }
    }
    double gaussian() {
        // Box-Muller on our own uniforms (deterministic across platforms)
        double u1 = uniform(1e-300, 1.0), u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }
    std::uint64_t bits() { return gen_(); }

  private:
    std::mt19937_64 gen_;
};

}  // namespace tll
