#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace causalflow {

// Seeded generator with hand-rolled distribution transforms so that every
// sequence is reproducible bit-for-bit (std::uniform_real_distribution and
// std::shuffle are implementation-defined and would tie results to one
// standard library).
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1) with 53 bits of precision.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard Laplace (location 0, scale 1) via the inverse CDF:
    // u in (-1/2, 1/2), x = -sign(u) * ln(1 - 2|u|).
    double laplace() {
        const double u = uniform() - 0.5;
        const double mag = std::log1p(-2.0 * std::abs(u));
        return u < 0.0 ? mag : -mag;
    }

    // Standard normal via Box-Muller.
    double gaussian() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    // Uniform integer in [0, n). Rejection sampling keeps it unbiased.
    uint64_t below(uint64_t n) {
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v = gen_();
        while (v >= limit) v = gen_();
        return v % n;
    }

    // Fisher-Yates.
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

    // Derives an independent stream seed (splitmix64 finalizer).
    static uint64_t derive(uint64_t base, uint64_t stream) {
        uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace causalflow
