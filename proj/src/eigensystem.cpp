#include "decaylab/eigensystem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "decaylab/eigensystem_impl.hpp"

namespace decaylab {

namespace {

constexpr double kClamp = 1e-300;

void check_rho(double rho, const char* who) {
  if (!std::isfinite(rho) || rho < 0)
    throw std::invalid_argument(std::string(who) + ": rho must be finite and >= 0");
}

void check_t(double t, const char* who) {
  if (!std::isfinite(t) || t < 0)
    throw std::invalid_argument(std::string(who) + ": t must be finite and >= 0");
}

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

void clamp(cplx& z, bool& flag) {
  if (z != cplx{} && std::abs(z) < kClamp) {
    z = cplx{};
    flag = true;
  }
}

}  // namespace

const char* to_string(Regime r) {
  switch (r) {
    case Regime::LowFreq: return "LowFreq";
    case Regime::Degenerate: return "Degenerate";
    case Regime::HighFreq: return "HighFreq";
  }
  return "?";
}

double PropagatorMatrix::max_abs() const {
  return std::max({std::abs(g_aa), std::abs(g_av), std::abs(g_va), std::abs(g_vv)});
}

EigenPair eigenvalues(double rho) {
  check_rho(rho, "eigenvalues");
  auto e = detail::eigenvalues_t<double, cplx>(rho);
  Regime r = e.regime == detail::RegimeT::Low        ? Regime::LowFreq
             : e.regime == detail::RegimeT::Degenerate ? Regime::Degenerate
                                                       : Regime::HighFreq;
  return {e.plus, e.minus, r};
}

double frequency_variation(double rho) {
  if (rho >= 2) return 2.0;
  double w = 0.5 * rho * std::sqrt((2 - rho) * (2 + rho));
  return rho <= std::sqrt(2.0) ? w : 2.0 - w;
}

cplx divided_exp(cplx lambda_a, cplx lambda_b, double t) {
  if (!finite(lambda_a) || !finite(lambda_b) || !std::isfinite(t))
    throw std::invalid_argument("divided_exp: non-finite input");
  if (t < 0) throw std::invalid_argument("divided_exp: t must be >= 0");
  return detail::divided_exp_t<double, cplx>(lambda_a, lambda_b, t);
}

PropagatorMatrix propagator(double rho, double t) {
  check_rho(rho, "propagator");
  check_t(t, "propagator");
  auto g = detail::propagator_t<double, cplx>(rho, t);
  PropagatorMatrix m{g[0], g[1], g[2], g[3], rho, t, false};
  clamp(m.g_aa, m.underflow);
  clamp(m.g_av, m.underflow);
  clamp(m.g_va, m.underflow);
  clamp(m.g_vv, m.underflow);
  return m;
}

PropagatorMatrix expm_oracle(double rho, double t) {
  check_rho(rho, "expm_oracle");
  check_t(t, "expm_oracle");
  using L = long double;
  L r = rho;
  L A[2][2] = {{0, -r * t}, {r * t, -r * r * t}};
  L n1 = std::max(std::fabs(A[0][0]) + std::fabs(A[1][0]), std::fabs(A[0][1]) + std::fabs(A[1][1]));
  int s = 0;
  while (n1 > 0.5L) {
    n1 /= 2;
    ++s;
  }
  L sc = std::ldexp(1.0L, -s);
  for (auto& row : A)
    for (auto& x : row) x *= sc;

  L E[2][2] = {{1, 0}, {0, 1}};
  L T[2][2] = {{1, 0}, {0, 1}};
  for (int k = 1; k < 200; ++k) {
    L N[2][2];
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) N[i][j] = (T[i][0] * A[0][j] + T[i][1] * A[1][j]) / k;
    L tn = 0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        T[i][j] = N[i][j];
        E[i][j] += N[i][j];
        tn = std::max(tn, std::fabs(N[i][j]));
      }
    if (tn < 1e-18L) break;
  }
  for (int k = 0; k < s; ++k) {
    L S[2][2];
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) S[i][j] = E[i][0] * E[0][j] + E[i][1] * E[1][j];
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) E[i][j] = S[i][j];
  }
  PropagatorMatrix m;
  m.rho = rho;
  m.t = t;
  m.g_aa = static_cast<double>(E[0][0]);
  m.g_av = static_cast<double>(E[0][1]);
  m.g_va = static_cast<double>(E[1][0]);
  m.g_vv = static_cast<double>(E[1][1]);
  // the determinant e^{-t rho^2} is not representable; entries themselves
  // usually are (they decay like e^{t lambda_-}), so they are kept
  if (t * rho * rho > 708.0) m.underflow = true;
  clamp(m.g_aa, m.underflow);
  clamp(m.g_av, m.underflow);
  clamp(m.g_va, m.underflow);
  clamp(m.g_vv, m.underflow);
  return m;
}

PropagatorMatrix multiply(const PropagatorMatrix& x, const PropagatorMatrix& y) {
  PropagatorMatrix m;
  m.rho = x.rho;
  m.t = x.t + y.t;
  m.g_aa = x.g_aa * y.g_aa + x.g_av * y.g_va;
  m.g_av = x.g_aa * y.g_av + x.g_av * y.g_vv;
  m.g_va = x.g_va * y.g_aa + x.g_vv * y.g_va;
  m.g_vv = x.g_va * y.g_av + x.g_vv * y.g_vv;
  m.underflow = x.underflow || y.underflow;
  return m;
}

double max_relative_error(const PropagatorMatrix& g, const PropagatorMatrix& ref) {
  double scale = ref.max_abs();
  double e = std::max({std::abs(g.g_aa - ref.g_aa), std::abs(g.g_av - ref.g_av),
                       std::abs(g.g_va - ref.g_va), std::abs(g.g_vv - ref.g_vv)});
  if (scale == 0.0) return e == 0.0 ? 0.0 : inf;
  return e / scale;
}

}  // namespace decaylab
