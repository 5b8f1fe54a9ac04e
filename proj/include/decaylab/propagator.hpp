#pragma once

#include <functional>
#include <memory>
#include <utility>

#include "decaylab/eigensystem.hpp"
#include "decaylab/spectral_state.hpp"

namespace decaylab {

// e^{t M_|xi|} applied to a base state, still lazy.  The structural
// metadata (symmetry, zonal terms, support) carries over; the effective
// support is trimmed where the propagator is below 1e-20.
struct EvolvedState : SpectralState {
  std::shared_ptr<const SpectralState> base;
  double t = 0.0;
};

EvolvedState evolve(const SpectralState& s, double t);

// Past this radius every propagator entry is below e^{-46} at time t
// (inf if no such radius below 2 exists).
double propagator_cutoff(double t);

double default_fd_step(double t);

// |central difference of |a|^2 + |v|^2 in t + 2 rho^2 |v(t)|^2|, data taken
// from s at |xi| = rho on the xi1 axis.  Evaluated in 113-bit arithmetic so
// only the O(h^2) truncation is visible.
double energy_flux_residual(const SpectralState& s, double rho, double t, double h);

// second-order wave forms:
//   |a'' + rho^2 a - rho^3 v|  and  |v'' + rho^2 v + rho^2 v'|
std::pair<double, double> wave_residuals(const SpectralState& s, double rho, double t, double h);

using ScalarField = std::function<double(double t, const Vec3& x)>;
using VectorField = std::function<Vec3(double t, const Vec3& x)>;

struct ScaledFields {
  ScalarField a;
  VectorField u;
};

// a(t, x) = a~(alpha t / nu, sqrt(alpha) x / nu),
// u(t, x) = sqrt(alpha) u~(alpha t / nu, sqrt(alpha) x / nu).
// The inverse map is rescale(., 1/alpha, 1/nu).
ScaledFields rescale(ScalarField a, VectorField u, double alpha, double nu);

}  // namespace decaylab
