#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "decaylab/quadrature.hpp"
#include "decaylab/types.hpp"

namespace decaylab {

enum class Symmetry { General, Axisymmetric, Radial };

const char* to_string(Symmetry s);

// One term f(rho) * P_ell(xi1/|xi|) of the part of a state that survives at
// on-axis points x = (x1, 0, 0).  Only ell in {0, 1}.
struct ZonalTerm {
  int ell = 0;
  std::function<Pair(double rho)> radial;
};

// (a_hat, v_hat) as lazy functions of frequency.
//
// Optional reductions, used when present:
//   axis_mean(xi1, r)  mean of the state over the circle of radius r about
//                      the xi1 axis; this is all an on-axis transform sees
//   axis_zonal         the same thing written as a sum of zonal terms
//   radial_phase(rho)  unwrapped phase when the state is one oscillating
//                      exponential times a smooth amplitude
//   phase_variation    monotone bound on accumulated phase; sizes cells
//                      when radial_phase does not apply
struct SpectralState {
  std::function<Pair(const Vec3&)> at;
  std::function<Pair(double, double)> axis_mean;
  std::vector<ZonalTerm> axis_zonal;
  std::function<double(double)> radial_phase;
  std::function<double(double)> phase_variation;  // monotone bound on accumulated |phase| from rho = 0

  Symmetry symmetry = Symmetry::General;
  double rho_min = 0.0;
  double rho_max = inf;  // support; beyond it the state is zero or below round-off
  // Where the state has become negligible against its bulk (set by time
  // evolution).  Integrals stop here; localising strictly beyond it clears it.
  double rho_cut = inf;
  // tighter axisymmetric box, if known: |xi1| in [xi1_abs_min, xi1_abs_max], r <= r_max
  double xi1_abs_min = 0.0;
  double xi1_abs_max = inf;
  double r_max = inf;

  bool zero = false;
  std::array<bool, 2> component_zero{false, false};
  bool real_field = true;  // physical fields real, so f(-xi) = conj f(xi)
  std::string tag;
  std::uint64_t id = 0;

  Pair mean_about_axis(double xi1, double r) const;
  double variation_at(double rho) const { return phase_variation ? phase_variation(rho) : 0.0; }
  double rho_hi() const { return std::min(rho_max, rho_cut); }
  double xi1_max() const;
  double r_limit() const;
};

std::uint64_t next_state_id();

SpectralState zero_state();

// Multiply by a real radial weight m(|xi|) supported in [lo, hi].
SpectralState multiply_radial(const SpectralState& s, std::function<double(double)> m, double lo,
                              double hi, const std::string& tag);

struct SpectralIntegral {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
};

// Integral over R^3 of F(a_hat, v_hat); reduced according to the symmetry
// tag (radial: 1D, axisymmetric: (xi1, r) plane, general: radial rule times
// a spherical product rule).
SpectralIntegral integrate_spectral(const SpectralState& s, const std::function<double(const Pair&)>& F,
                                    const quad::Options& opt);

// Plancherel: physical L^2 norm of (a, v) as sqrt(|a|^2 + |v|^2)
SpectralIntegral l2_norm(const SpectralState& s, const quad::Options& opt);

// (2 pi)^{-3/2} * int |(a_hat, v_hat)|, an upper bound for the sup norm
SpectralIntegral linf_upper_bound(const SpectralState& s, const quad::Options& opt);

}  // namespace decaylab
