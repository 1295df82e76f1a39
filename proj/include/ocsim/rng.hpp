#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "ocsim/types.hpp"

namespace ocsim {

/// splitmix64 step; used to derive well-separated stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Mix a master seed with stream labels into one substream seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t s = master;
    std::uint64_t h = splitmix64(s);
    s ^= a * 0x9e3779b97f4a7c15ull;
    h ^= splitmix64(s);
    s ^= b * 0xd1b54a32d192ed03ull;
    h ^= splitmix64(s);
    return h;
}

/// Deterministic random source. The engine is std::mt19937_64 (fully
/// specified by the standard); all value conversions are implemented here
/// rather than with std::*_distribution so that streams replay bit-exactly
/// on any platform.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t bits() { return eng_(); }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller (cached second value).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Circularly symmetric complex Gaussian with E|z|^2 = var.
    cxd cnormal(double var = 1.0) {
        const double s = std::sqrt(var / 2.0);
        return cxd(s * normal(), s * normal());
    }

    VectorXcd cnormal_vector(int n, double var = 1.0) {
        VectorXcd v(n);
        for (int i = 0; i < n; ++i) v(i) = cnormal(var);
        return v;
    }

    /// Uniformly chosen QPSK constellation point.
    cxd qpsk() { return qpsk_constellation()[bits() & 3]; }

    /// Integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // modulo bias is negligible for the small n used here
        return bits() % n;
    }

  private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace ocsim
