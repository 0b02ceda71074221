#include "polybubble/tables.hpp"

#include <stdexcept>

namespace polybubble {

int64_t binomial_int(int n, int k) {
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    int64_t r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i; // exact: r*(n-k+i) divisible by i at each step
    }
    return r;
}

int64_t bubble_normalization_int(const SpaceParams& sp) {
    int64_t p = 1;
    for (int h = -sp.m; h <= sp.m - 1; ++h) p *= int64_t(sp.N + 2 * h);
    return p;
}

double bubble_normalization(const SpaceParams& sp) {
    return double(bubble_normalization_int(sp));
}

CoeffTables::CoeffTables(const SpaceParams& sp) : N(sp.N), m(sp.m) {
    const int M = m;
    K.assign(size_t(M) + 1, 1);
    for (int j = 1; j <= M; ++j) K[size_t(j)] = K[size_t(j - 1)] * int64_t(N - 2 * m + 2 * (j - 1));

    auto table = [&](auto) {
        return std::vector<std::vector<int64_t>>(size_t(M) + 1, std::vector<int64_t>(size_t(M) + 1, 0));
    };
    D = table(0);
    E = table(0);
    G = table(0);

    for (int j = 0; j <= M; ++j) {
        for (int i = 0; i <= M; ++i) {
            // D
            if (i == 0) {
                D[size_t(i)][size_t(j)] = 1;
            } else if (i <= j) {
                int64_t d = 1;
                for (int h = j - i + 1; h <= j; ++h) d *= int64_t(m - h);
                D[size_t(i)][size_t(j)] = d;
            } // i > j stays 0 (those entries never multiply a nonzero binomial)
            // E
            if (i <= j - 1) {
                int64_t e = 1;
                for (int h = i; h <= j - 1; ++h) e *= int64_t(N + 2 * h);
                E[size_t(i)][size_t(j)] = e;
            } else if (i == j) {
                E[size_t(i)][size_t(j)] = 1;
            }
        }
    }
    for (int j = 0; j <= M; ++j) {
        for (int i = 0; i <= j; ++i) {
            int64_t two_i = int64_t(1) << i;
            G[size_t(i)][size_t(j)] =
                two_i * binomial_int(j, i) * K[size_t(j)] * D[size_t(i)][size_t(j)] * E[size_t(i)][size_t(j)];
        }
    }
}

} // namespace polybubble
