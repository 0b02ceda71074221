#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace polybubble {

// Dimension/order bookkeeping for the critical polyharmonic problem
//
//     (-Delta)^m u + V(|y'|, y'') u = u^{m*-1},   m* = 2N/(N-2m),
//
// together with the derived decay exponents used by the doubled-circle
// construction.  Bubble-level operations need N > 2m; the interaction
// machinery (regimes, weighted norms, reduced equations) needs N > 4m+1.
struct SpaceParams {
    int N = 0;
    int m = 0;

    // m* = 2N/(N-2m) kept exactly as a fraction and as a double.
    int64_t m_star_num = 0;
    int64_t m_star_den = 0;
    double m_star = 0.0;

    // Free decay-splitting parameter iota in (0, N-4m) and its derived set:
    //   alpha     = N - 4m - iota
    //   tau1      = (N-4m-alpha)/(N-2m-alpha) = iota/(2m+iota)   (shrinking-gap regime)
    //   tau23     = (N-4m)/(N-2m)                                 (separated regimes)
    //   beta1     = alpha/(N-2m)
    //   beta2     = (N-4m)/(N-2m)
    double iota = 0.0;
    double alpha = 0.0;
    double tau1 = 0.0;
    double tau23 = 0.0;
    double beta1 = 0.0;
    double beta2 = 0.0;

    SpaceParams() = default;
    SpaceParams(int N_, int m_, double iota_ = 0.5);

    // True when the interaction/regime exponents above are all admissible.
    bool full_pipeline() const { return N > 4 * m + 1; }

    void require_full_pipeline(const char* what) const {
        if (!full_pipeline())
            throw std::invalid_argument(std::string(what) +
                                        ": requires N > 4m+1, got N=" + std::to_string(N) +
                                        " m=" + std::to_string(m));
    }
};

inline SpaceParams::SpaceParams(int N_, int m_, double iota_) : N(N_), m(m_), iota(iota_) {
    if (m < 1) throw std::invalid_argument("SpaceParams: m must be >= 1");
    if (N <= 2 * m) throw std::invalid_argument("SpaceParams: need N > 2m");
    const int64_t den = N - 2 * m;
    m_star_num = 2LL * N;
    m_star_den = den;
    m_star = double(m_star_num) / double(m_star_den);
    alpha = tau1 = tau23 = beta1 = beta2 = 0.0;
    if (full_pipeline()) {
        if (!(iota > 0.0 && iota < double(N - 4 * m)))
            throw std::invalid_argument("SpaceParams: iota must lie in (0, N-4m)");
        alpha = double(N - 4 * m) - iota;
        tau1 = (double(N - 4 * m) - alpha) / (double(N - 2 * m) - alpha);
        tau23 = double(N - 4 * m) / double(N - 2 * m);
        beta1 = alpha / double(N - 2 * m);
        beta2 = tau23;
    }
}

} // namespace polybubble
