#pragma once

// Polynomial smoothstep of prescribed smoothness and a minimal dense
// polynomial type. smoothstep_poly(q) returns the degree-(2q+1) polynomial
// S with S(0) = 0, S(1) = 1 and q vanishing derivatives at both ends, so
// the clamped extension by 0 and 1 is C^q. Coefficients are exact integers.

#include <vector>

namespace polybubble {

struct Poly {
  std::vector<double> c;  // c[i] * x^i

  double eval(double x) const {
    double v = 0.0;
    for (size_t i = c.size(); i-- > 0;) v = v * x + c[i];
    return v;
  }
  Poly derivative() const {
    Poly d;
    if (c.size() <= 1) {
      d.c = {0.0};
      return d;
    }
    d.c.resize(c.size() - 1);
    for (size_t i = 1; i < c.size(); ++i) d.c[i - 1] = double(i) * c[i];
    return d;
  }
};

Poly smoothstep_poly(int q);

// Clamped evaluation: 0 below 0, 1 above 1, S(x) between.
double smoothstep(const Poly& s, double x);

}  // namespace polybubble
