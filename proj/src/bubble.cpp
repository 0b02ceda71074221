#include "polybubble/bubble.hpp"

#include <cassert>
#include <stdexcept>

namespace polybubble {

double dist2(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double bubble_log_value_r2(const SpaceParams& sp, double lambda, double r2) {
    const double c = double(sp.N - 2 * sp.m) / double(4 * sp.m);
    const double p = 0.5 * double(sp.N - 2 * sp.m);
    const double logP = std::log(bubble_normalization(sp));
    return c * logP + p * (std::log(lambda) - std::log1p(lambda * lambda * r2));
}

double bubble_value_r2(const SpaceParams& sp, double lambda, double r2) {
    return std::exp(bubble_log_value_r2(sp, lambda, r2));
}

double bubble_value(const SpaceParams& sp, const Bubble& b, std::span<const double> y) {
    return bubble_value_r2(sp, b.lambda, dist2(y, b.center));
}

double bubble_log_value(const SpaceParams& sp, const Bubble& b, std::span<const double> y) {
    return bubble_log_value_r2(sp, b.lambda, dist2(y, b.center));
}

double bubble_dlambda(const SpaceParams& sp, const Bubble& b, std::span<const double> y) {
    const double p = 0.5 * double(sp.N - 2 * sp.m);
    const double r2 = dist2(y, b.center);
    const double t = b.lambda * b.lambda * r2;
    const double u = bubble_value_r2(sp, b.lambda, r2);
    return p / b.lambda * u * (1.0 - t) / (1.0 + t);
}

Vec bubble_gradient(const SpaceParams& sp, const Bubble& b, std::span<const double> y) {
    const double r2 = dist2(y, b.center);
    const double t = b.lambda * b.lambda * r2;
    const double u = bubble_value_r2(sp, b.lambda, r2);
    const double f = -double(sp.N - 2 * sp.m) * b.lambda * b.lambda / (1.0 + t) * u;
    Vec g(y.size());
    for (size_t i = 0; i < y.size(); ++i) g[i] = f * (y[i] - b.center[i]);
    return g;
}

double polylaplacian_bubble_log_r2(const SpaceParams& sp, const CoeffTables& ct, double lambda,
                                   double r2, int l) {
    if (l < 0 || l > sp.m) throw std::invalid_argument("polylaplacian_bubble: need 0 <= l <= m");
    const double c = double(sp.N - 2 * sp.m) / double(4 * sp.m);
    const double p = 0.5 * double(sp.N - 2 * sp.m) + 2.0 * l;
    const double logP = std::log(bubble_normalization(sp));
    const double t = lambda * lambda * r2; // (lam r)^2
    double poly = 0.0;                     // sum_i G(i,l) t^i, all coefficients >= 0
    for (int i = l; i >= 0; --i) poly = poly * t + double(ct.g(i, l));
    return c * logP + p * (std::log(lambda) - std::log1p(t)) + std::log(poly);
}

double polylaplacian_bubble(const SpaceParams& sp, const CoeffTables& ct, const Bubble& b, int l,
                            std::span<const double> y) {
    return std::exp(polylaplacian_bubble_log_r2(sp, ct, b.lambda, dist2(y, b.center), l));
}

} // namespace polybubble
