#include "polybubble/smoothstep.hpp"

#include <stdexcept>

#include "polybubble/tables.hpp"

namespace polybubble {

Poly smoothstep_poly(int q) {
  if (q < 0 || q > 12)
    throw std::invalid_argument("smoothstep_poly: q must be in 0..12");
  Poly p;
  p.c.assign(size_t(2 * q + 2), 0.0);
  for (int n = 0; n <= q; ++n) {
    const std::int64_t coeff =
        binomial_int(q + n, n) * binomial_int(2 * q + 1, q - n);
    const double sgn = (n % 2 == 0) ? 1.0 : -1.0;
    p.c[size_t(q + 1 + n)] = sgn * double(coeff);
  }
  return p;
}

double smoothstep(const Poly& s, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return s.eval(x);
}

}  // namespace polybubble
