#pragma once

#include "decaylab/types.hpp"

namespace decaylab {

enum class Regime { LowFreq, Degenerate, HighFreq };

const char* to_string(Regime r);

struct EigenPair {
  cplx lambda_plus;
  cplx lambda_minus;
  Regime regime;
};

// Entries of e^{t M_rho}, M_rho = [[0, -rho], [rho, -rho^2]].
struct PropagatorMatrix {
  cplx g_aa{1.0}, g_av{}, g_va{}, g_vv{1.0};
  double rho = 0.0;
  double t = 0.0;
  bool underflow = false;  // some entry was clamped, or e^{-t rho^2} underflowed (oracle)

  Pair apply(const Pair& u) const {
    return {g_aa * u[0] + g_av * u[1], g_va * u[0] + g_vv * u[1]};
  }
  cplx determinant() const { return g_aa * g_vv - g_av * g_va; }
  double max_abs() const;
};

EigenPair eigenvalues(double rho);

// Accumulated variation of Im lambda_+ from 0 to rho: omega rises to 1 at
// sqrt 2, falls back to 0 at 2 and stays 0 beyond.
double frequency_variation(double rho);

// (e^{t a} - e^{t b}) / (a - b), with the confluent limit t e^{t a}
cplx divided_exp(cplx lambda_a, cplx lambda_b, double t);

PropagatorMatrix propagator(double rho, double t);

// Scaling and squaring on a Taylor series in long double; independent of
// the eigenvalue formulas.
PropagatorMatrix expm_oracle(double rho, double t);

PropagatorMatrix multiply(const PropagatorMatrix& x, const PropagatorMatrix& y);

// max_k |g_k - ref_k| / max_k |ref_k|
double max_relative_error(const PropagatorMatrix& g, const PropagatorMatrix& ref);

}  // namespace decaylab
