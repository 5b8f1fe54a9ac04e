#pragma once

// Scalar-generic kernels behind eigensystem.hpp.  R is the real type, C the
// matching complex type; both double and the 113-bit boost types go through
// the same code so the extended-precision residual checks test exactly the
// formulas used in production.

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

namespace decaylab::detail {

enum class RegimeT { Low, Degenerate, High };

template <class C>
struct EigT {
  C plus, minus;
  RegimeT regime;
};

template <class R, class C>
EigT<C> eigenvalues_t(const R& rho) {
  using std::sqrt;
  EigT<C> e;
  if (rho < 2) {
    // lambda_{+/-} = -rho^2/2 -/+ i (rho/2) sqrt(4 - rho^2)
    R w = rho * sqrt((R(2) - rho) * (R(2) + rho)) / 2;
    R re = -rho * rho / 2;
    e.plus = C(re, -w);
    e.minus = C(re, w);
    e.regime = RegimeT::Low;
  } else if (rho == 2) {
    e.plus = e.minus = C(R(-2), R(0));
    e.regime = RegimeT::Degenerate;
  } else {
    R q = sqrt((rho - R(2)) * (rho + R(2))) / rho;
    e.plus = C(-rho * rho * (R(1) + q) / 2, R(0));
    e.minus = C(R(-2) / (R(1) + q), R(0));  // = -rho^2/2 (1 - q) without cancellation
    e.regime = RegimeT::High;
  }
  return e;
}

// (e^z - 1)/z
template <class R, class C>
C phi1_t(const C& z) {
  using std::abs;
  using std::cos;
  using std::exp;
  using std::expm1;
  using std::sin;
  R az = abs(z);
  if (az < R(1e-3)) {
    const R eps = std::numeric_limits<R>::epsilon();
    C term(R(1), R(0)), sum(R(1), R(0));
    for (int k = 2; k < 40; ++k) {
      term *= z / R(k);
      sum += term;
      if (abs(term) < eps * R(1e-2)) break;
    }
    return sum;
  }
  R x = z.real(), y = z.imag();
  R s = sin(y / 2);
  // expm1(x + iy) without cancellation near the origin
  C em(expm1(x) * cos(y) - 2 * s * s, exp(x) * sin(y));
  return em / z;
}

template <class R, class C>
C divided_exp_t(C a, C b, const R& t) {
  using std::exp;
  if ((a - b).real() > 0) std::swap(a, b);
  return C(t, R(0)) * exp(b * t) * phi1_t<R, C>((a - b) * t);
}

// {g_aa, g_av, g_va, g_vv}; everything hangs off e^{t lambda_+} and the
// divided difference D so no entry divides by lambda_+ - lambda_-.
template <class R, class C>
std::array<C, 4> propagator_t(const R& rho, const R& t) {
  using std::exp;
  EigT<C> e = eigenvalues_t<R, C>(rho);
  if (e.regime == RegimeT::Degenerate) {
    R E = exp(R(-2) * t);
    return {C(E * (1 + 2 * t), R(0)), C(-2 * t * E, R(0)), C(2 * t * E, R(0)),
            C(E * (1 - 2 * t), R(0))};
  }
  C D = divided_exp_t<R, C>(e.plus, e.minus, t);
  C Ep = exp(e.plus * t);
  C r(rho, R(0));
  return {Ep - e.plus * D, -r * D, r * D, Ep + e.minus * D};
}

}  // namespace decaylab::detail
