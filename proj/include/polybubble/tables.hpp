#pragma once

#include <cstdint>
#include <vector>

#include "polybubble/space.hpp"

namespace polybubble {

// Integer coefficient tables behind the iterated-Laplacian closed form
//
//   (-Delta)^l [ (lam/(1+lam^2 r^2))^{(N-2m)/2} ]
//       = lam^{(N-2m)/2+2l} / (1+lam^2 r^2)^{(N-2m)/2+2l} * sum_i G(i,l) (lam r)^{2i},
//
// with
//   D(i,j) = 1 (i=0),  prod_{h=j-i+1}^{j} (m-h) (1<=i<=j),  0 (i<0)
//   E(i,j) = prod_{h=i}^{j-1} (N+2h) (i<=j-1),  1 (i=j),  0 (i>j)
//   K_j    = prod_{h=0}^{j-1} (N-2m+2h)
//   G(i,j) = 2^i * C(j,i) * K_j * D(i,j) * E(i,j)
//
// Everything is exact in int64 for m <= 4, N <= 20.  At the top order the
// polynomial collapses: G(i,m) = 0 for i >= 1 and G(0,m) equals the constant
//   P = prod_{h=-m}^{m-1} (N+2h),
// which is what makes the normalized profile an exact solution of
// (-Delta)^m u = u^{m*-1}.
struct CoeffTables {
    int N = 0;
    int m = 0;
    std::vector<int64_t> K;              // K[j], 0 <= j <= m
    std::vector<std::vector<int64_t>> D; // D[i][j], 0 <= i,j <= m
    std::vector<std::vector<int64_t>> E; // E[i][j]
    std::vector<std::vector<int64_t>> G; // G[i][j]

    CoeffTables() = default;
    CoeffTables(const SpaceParams& sp);

    int64_t g(int i, int j) const { return G.at(size_t(i)).at(size_t(j)); }
};

int64_t binomial_int(int n, int k);

// P = prod_{h=-m}^{m-1}(N+2h), exact.
int64_t bubble_normalization_int(const SpaceParams& sp);

// P as a double (the value raised to (N-2m)/(4m) in the profile).
double bubble_normalization(const SpaceParams& sp);

} // namespace polybubble
