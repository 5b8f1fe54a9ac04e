#pragma once

#include <cmath>

namespace decaylab {

// e^{-1/x} for x > 0, 0 otherwise
inline double mollifier_f(double x) { return x > 0 ? std::exp(-1.0 / x) : 0.0; }

// C-infinity step: exactly 0 for x <= 0, exactly 1 for x >= 1
inline double smooth_step(double x) {
  if (x <= 0) return 0.0;
  if (x >= 1) return 1.0;
  double a = mollifier_f(x), b = mollifier_f(1 - x);
  return a / (a + b);
}

// bump on (0, 1), maximal (= 1) at 1/2, exactly 0 outside
inline double smooth_bump(double u) {
  if (u <= 0 || u >= 1) return 0.0;
  return smooth_step(2 * u) * smooth_step(2 - 2 * u);
}

}  // namespace decaylab
