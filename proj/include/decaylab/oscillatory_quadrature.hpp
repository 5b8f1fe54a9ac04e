#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "decaylab/quadrature.hpp"
#include "decaylab/spectral_state.hpp"
#include "decaylab/types.hpp"

namespace decaylab {

struct BumpPsi;

// g(xi1, r), r = sqrt(xi2^2 + xi3^2).  phase(xi1, r) is only used to size
// cells; when phase_is_bound it is a monotone total-variation bound rather
// than the actual phase of g.
struct AxisymmetricIntegrand {
  std::function<cplx(double, double)> g;
  double xi1_lo = 0.0, xi1_hi = 0.0;
  double r_lo = 0.0, r_hi = 0.0;
  std::function<double(double, double)> phase;
  bool phase_is_bound = false;
  std::function<bool(const quad::Box&)> empty;
  double t = 0.0;   // metadata
  int branch = 0;   // metadata: +1 / -1 for e^{+-i ...}, 0 if none
};

quad::Options default_transform_options();

struct TransformResult {
  cplx value{};
  double error = 0.0;
  bool converged = true;
  std::size_t cells = 0;
};

// (2 pi)^{-3/2} 2 pi int int e^{i x1 xi1} g(xi1, r) r dr dxi1
TransformResult inverse_ft_axis(const AxisymmetricIntegrand& m, double x1,
                                const quad::Options& opt = default_transform_options());

// A multiplier split into its axisymmetric part and parts odd in xi2 or xi3.
// The odd parts integrate to zero against e^{i x1 xi1} and are dropped.
struct DecomposedMultiplier {
  AxisymmetricIntegrand even;
  bool has_even = true;
  std::vector<std::function<cplx(const Vec3&)>> odd_parts;
};

TransformResult inverse_ft_axis(const DecomposedMultiplier& m, double x1,
                                const quad::Options& opt = default_transform_options());

// Slow cross-check: full 3D transform at an arbitrary x of a multiplier
// supported in |xi| <= R (spherical coordinates, product angular rule).
TransformResult inverse_ft_3d(const std::function<cplx(const Vec3&)>& m, const Vec3& x, double R,
                              const quad::Options& opt);

// One component (0 = a, 1 = v) of a state as an axisymmetric integrand.
AxisymmetricIntegrand axis_integrand(const SpectralState& s, int component);

// Both components at x = (x1, 0, 0); zonal states go through a 1D radial
// integral with j_0 / j_1, the rest through inverse_ft_axis.
struct PairTransform {
  Pair value{};
  double error = 0.0;
  bool converged = true;
};
PairTransform transform_on_axis(const SpectralState& s, double x1,
                                const quad::Options& opt = default_transform_options());

double sph_j0(double z);
double sph_j1(double z);

// Precomputed x1 -> F^{-1}[s](x1, 0, 0) valid for |x1| <= x_max, for fast
// scanning.  Accuracy is not certified here; sup_on_axis re-evaluates the
// maximiser with transform_on_axis.
class AxisProfile {
 public:
  AxisProfile(const SpectralState& s, double x_max, const quad::Options& opt);
  Pair operator()(double x1) const;
  double norm(double x1) const;
  double bandwidth() const { return bandwidth_; }
  double x_max() const { return x_max_; }
  bool zonal() const { return zonal_; }
  std::size_t nodes() const { return nodes_.size(); }

 private:
  bool zonal_ = false;
  double bandwidth_ = 0.0;
  double x_max_ = 0.0;
  std::vector<double> nodes_;
  std::vector<int> ell_;
  std::vector<Pair> coef_;
};

struct SupResult {
  double value = 0.0;        // |(a, v)| at the certified maximiser: a lower bound for the sup
  double x1 = 0.0;
  double error = 0.0;
  bool converged = true;
  double upper_bound = 0.0;  // (2 pi)^{-3/2} || f_hat ||_1
  double profile_value = 0.0;
  std::size_t candidates = 0;
};

// Candidate set {0} and +-x on a grid geometric near 0 with spacing capped
// at a quarter of the Nyquist step, out to 2 t_context (plus a few
// wavelengths); golden-section refinement around the best candidate, then a
// full-accuracy evaluation there.  converged also requires the profile to
// agree with that evaluation to 1e-6 relative.
SupResult sup_on_axis(const SpectralState& s, double t_context,
                      const quad::Options& opt = default_transform_options(), bool with_upper = true);

// ---- square regions about the xi1 axis and the half-space witness integrals ----

enum class RegionTag { B1, B2, B3, B4, WholeSpace, HalfSpaceXiNeg, HalfSpaceXiPos };

const char* to_string(RegionTag r);

// Angular measure of {theta : (r cos theta, r sin theta) in region} for the
// square regions with threshold s = t^{-1/4}.
double region_angle(RegionTag tag, double r, double s);

struct RegionResult {
  cplx value{};
  double error = 0.0;
  bool converged = true;
  std::size_t cells = 0;
  double x1 = 0.0;  // physical x1 the integral corresponds to
};

// Rescaled integral over the region of
//   e^{i t^{-1/2} x1 xi1} e^{i branch t^{1/2} |xi| sqrt(1 - |xi|^2/4t)} e^{-|xi|^2/2} phi0(2^{-j} t^{-1/2} xi)
// with x1 = branch * t unless given.  Equals (2 pi)^{3/2} t^{3/2} F^{-1}[e^{t lambda} phi_j](x1),
// lambda = lambda_- for branch +1 and lambda_+ for branch -1.
RegionResult region_integral(RegionTag tag, double t, int branch, int j, double transition_width = 0.25,
                             const quad::Options& opt = {1e-11, 0.0, pi / 4, 2000000},
                             double x1 = std::numeric_limits<double>::quiet_NaN());

// The same physical quantity computed directly from the eigensystem.
TransformResult dyadic_kernel_on_axis(double t, int branch, int j, double transition_width, double x1,
                                      const quad::Options& opt = {1e-11, 0.0, pi / 4, 2000000});

struct HalfSpaceResult {
  cplx raw{};     // the integral in the rescaled variables
  cplx scaled{};  // t^{1/2} * raw
  double error = 0.0;  // on scaled
  bool converged = true;
};

// int_{xi1 <> 0} e^{i sign t^{1/2} (xi1 + |xi| sqrt(1 - |xi|^2/4t))} e^{-|xi|^2/2} Psi(xi_t) dxi
HalfSpaceResult halfspace_witness_integral(const BumpPsi& psi, double t, int sign, RegionTag half,
                                           const quad::Options& opt = {1e-11, 0.0, pi / 4, 2000000});

// Integrand of the scaled XiNeg / XiPos integral after xi -> xi_{t^{-1}}, in
// (xi1, r), without the 2 pi r measure.
cplx halfspace_integrand(const BumpPsi& psi, double t, int sign, double xi1, double r);
// Its t -> infinity limit for xi1 < 0.
cplx halfspace_limit_integrand(const BumpPsi& psi, int sign, double xi1, double r);

// L = int_{xi1 < 0} e^{i sign r^2 / 2|xi1|} e^{-xi1^2/2} Psi(xi) dxi
TransformResult halfspace_limit_constant(const BumpPsi& psi, int sign,
                                         const quad::Options& opt = {1e-11, 0.0, pi / 4, 2000000});

}  // namespace decaylab
