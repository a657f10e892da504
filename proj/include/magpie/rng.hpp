#pragma once

// Deterministic randomness for simulation and solver sweeps.
//
// The generator is std::mt19937_64, whose output sequence is fixed by the
// C++ standard, so a (seed, draw order) pair reproduces bit-identically on
// any conforming implementation. Everything layered on top (bounded draws,
// shuffles, Gaussian and Poisson sampling) is hand-specified here rather
// than taken from <random> distributions, because the standard does NOT fix
// distribution algorithms and reproducible logs are part of the contract.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace magpie {

// splitmix64 finalizer; used to derive independent stream seeds (for example
// one noise stream per scanning region) from a master seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // uniform in [0, 1) with 53 random bits
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in (0, 1]; never returns 0 (safe as a log argument)
    double uniform01_open() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    // unbiased integer in [0, n) by rejection
    std::uint64_t bounded(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::bounded: n must be positive");
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // standard normal via Box-Muller (the spare value is cached)
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01_open();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

    // Poisson draw: exact inversion (Knuth product form) for small means,
    // rounded clamped Gaussian above, where the approximation error is far
    // below the statistical noise.
    std::uint64_t poisson(double lambda) {
        if (!(lambda >= 0.0)) throw std::domain_error("Rng::poisson: mean must be >= 0");
        if (lambda == 0.0) return 0;
        if (lambda < 30.0) {
            const double limit = std::exp(-lambda);
            std::uint64_t k = 0;
            double p = 1.0;
            do {
                ++k;
                p *= uniform01_open();
            } while (p > limit);
            return k - 1;
        }
        const double g = lambda + std::sqrt(lambda) * gaussian();
        if (g <= 0.0) return 0;
        return static_cast<std::uint64_t>(std::llround(g));
    }

    // Fisher-Yates shuffle (descending form)
    template <typename T>
    void shuffle(std::vector<T> &v) {
        for (std::size_t j = v.size(); j > 1; --j) {
            const std::size_t i = static_cast<std::size_t>(bounded(j));
            std::swap(v[i], v[j - 1]);
        }
    }

  private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace magpie
