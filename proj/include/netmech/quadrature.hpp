#pragma once

#include <cmath>

namespace netmech {

// Adaptive Simpson on a smooth integrand. Recursion splits until the
// Richardson estimate of the local error drops below tol (absolute).
template <typename F>
double adaptive_simpson(F&& f, double a, double b, double tol = 1e-12) {
  auto simpson = [](double fa, double fm, double fb, double h) {
    return h / 6.0 * (fa + 4.0 * fm + fb);
  };
  struct Rec {
    static double go(const F& f, double a, double b, double fa, double fm, double fb,
                     double whole, double tol, int depth) {
      const double m = 0.5 * (a + b);
      const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
      const double flm = f(lm), frm = f(rm);
      const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
      const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
      if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
      return go(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1) +
             go(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1);
    }
  };
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  return Rec::go(f, a, b, fa, fm, fb, simpson(fa, fm, fb, b - a), tol, 48);
}

}  // namespace netmech
