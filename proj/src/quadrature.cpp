#include "decaylab/quadrature.hpp"

#include <stdexcept>

namespace decaylab::quad {

Rule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  Rule r;
  r.x.resize(n);
  r.w.resize(n);
  const long double lpi = 3.141592653589793238462643383279502884L;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    long double z = std::cos(lpi * (i + 0.75L) / (n + 0.5L));
    long double dp = 0;
    for (int it = 0; it < 100; ++it) {
      long double p0 = 1, p1 = z;
      for (int k = 2; k <= n; ++k) {
        long double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1);
      long double dz = p1 / dp;
      z -= dz;
      if (std::fabs(dz) < 1e-19L) break;
    }
    long double p0 = 1, p1 = z;
    for (int k = 2; k <= n; ++k) {
      long double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (z * p1 - p0) / (z * z - 1);
    long double w = 2 / ((1 - z * z) * dp * dp);
    r.x[i] = -static_cast<double>(z);
    r.x[n - 1 - i] = static_cast<double>(z);
    r.w[i] = r.w[n - 1 - i] = static_cast<double>(w);
  }
  if (n % 2 == 1) r.x[n / 2] = 0.0;
  return r;
}

const Rule& gl15() {
  static const Rule r = gauss_legendre(15);
  return r;
}

}  // namespace decaylab::quad
