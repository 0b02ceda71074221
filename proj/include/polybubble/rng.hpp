#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace polybubble {

// Deterministic randomness: mt19937_64 gives a bit-stream fixed by the
// standard, and all distribution transforms are spelled out here because the
// std:: distribution objects are allowed to differ between library vendors.
// Same seed => same samples on every toolchain, which the report-determinism
// contract relies on.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed), seed_(seed) {}

    // sub-stream with a reproducible seed derived from (seed, id)
    Rng fork(uint64_t id) const { return Rng(splitmix64(seed_ ^ splitmix64(id))); }

    uint64_t next_u64() { return eng_(); }

    double uniform() { // in (0,1)
        return (double(eng_() >> 11) + 0.5) * 0x1.0p-53;
    }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = uniform(-1.0, 1.0);
            v = uniform(-1.0, 1.0);
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    // Marsaglia-Tsang, any shape > 0, unit scale
    double gamma(double shape) {
        if (shape < 1.0) {
            const double g = gamma(shape + 1.0);
            return g * std::pow(uniform(), 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double beta(double a, double b) {
        const double x = gamma(a);
        const double y = gamma(b);
        return x / (x + y);
    }

    std::vector<double> unit_vector(size_t n) {
        std::vector<double> v(n);
        double s2;
        do {
            s2 = 0.0;
            for (auto& c : v) {
                c = normal();
                s2 += c * c;
            }
        } while (s2 == 0.0);
        const double inv = 1.0 / std::sqrt(s2);
        for (auto& c : v) c *= inv;
        return v;
    }

private:
    std::mt19937_64 eng_;
    uint64_t seed_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace polybubble
