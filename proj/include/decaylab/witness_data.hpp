#pragma once

#include "decaylab/littlewood_paley.hpp"
#include "decaylab/oscillatory_quadrature.hpp"
#include "decaylab/spectral_state.hpp"

namespace decaylab {

// Psi(xi) = eta(|xi|) zeta(xi1^2) / N, both factors smooth bumps with
// support (a, b) resp. (a^2, b^2), a = 1/2 + margin, b = 1 - margin, and N
// the maximum of the product.
struct BumpPsi {
  double margin = 0.02;
  double a = 0.52, b = 0.98;
  double norm = 1.0;

  double operator()(double xi1, double r) const;
  double operator()(const Vec3& xi) const { return (*this)(xi[0], std::hypot(xi[1], xi[2])); }
  double r_max() const { return std::sqrt(b * b - a * a); }
};

BumpPsi make_psi(double inner_margin = 0.02);

// int Psi dxi
double psi_integral(const BumpPsi& psi, double rel_tol = 1e-12);

// xi_t = (xi1, t^{1/4} xi2, t^{1/4} xi3)
struct AnisotropicScaling {
  double t;
  Vec3 forward(const Vec3& xi) const;  // xi -> xi_t
  Vec3 inverse(const Vec3& xi) const;  // xi -> xi_{t^{-1}}
};

// xi -> Psi(t^{1/2} xi1, t^{3/4} xi2, t^{3/4} xi3)
AxisymmetricIntegrand scaled_psi_multiplier(const BumpPsi& psi, double t);
// support of the scaled multiplier inside {|xi| < 1/2}
bool scaled_psi_low_frequency(const BumpPsi& psi, double t);
double scaled_psi_support_radius(const BumpPsi& psi, double t);

// || F^{-1}[Psi(t^{1/2} xi_t)] ||_{L^1(R^3)}, computed on a physical-space
// grid laid out from the multiplier's own support box.
struct L1Estimate {
  double value = 0.0;
  double tail = 0.0;  // mass in the outer quarter of the box
};
// The bump's transform decays only like e^{-c sqrt|x|}, hence the large box.
L1Estimate scaled_psi_physical_l1(const BumpPsi& psi, double t, int n_freq = 192, int n_space = 1920,
                                  double extent = 240.0);

struct GaussianConstants {
  double c1 = 0.35355339059327376;  // 2^{-3/2}
  double c2 = 0.25;
};

// a0 = 0, v0_hat = i c1 (xi1 + xi2 + xi3) e^{-c2 |xi|^2} / |xi|
SpectralState gaussian_v0(const GaussianConstants& c = {});

// (a_hat, v_hat) = (e^{t lambda_+} Psi(t^{1/2} xi_t), 0)
SpectralState psi_witness_state(const BumpPsi& psi, double t);

// (a_hat, v_hat) = f(|xi|) on lo <= |xi| <= hi
SpectralState radial_state(std::function<Pair(double)> f, double lo, double hi, std::array<bool, 2> zero,
                           const std::string& tag);

// a_hat = e^{-t |xi|^2 / 2}, v_hat = 0
SpectralState heat_state(double t);

// a_hat = v_hat = phi_j
SpectralState dyadic_block_data(const PartitionProfile& lp, int j);

// a_hat = phi_j, v_hat = 0
SpectralState dyadic_density_data(const PartitionProfile& lp, int j);

// a_hat = e^{t lambda} phi_j, v_hat = 0, lambda = lambda_- for branch +1
// and lambda_+ for branch -1: one branch of the dyadic kernel.
SpectralState dyadic_kernel_state(const PartitionProfile& lp, int j, double t, int branch);

// a_hat = e^{t lambda} sum_{j <= 2} phi_j, v_hat = 0: the low-frequency kernel.
SpectralState low_band_kernel_state(const PartitionProfile& lp, double t, int branch);

// The cosine form of the Psi-localised Gaussian solution at x = (-t, 0, 0):
// F^{-1}[g_av v0_hat Psi(t^{1/2} xi_t)](-t e1), with the e^{t lambda_+/-}
// halves folded into one cosine integral; returned multiplied by t^2.
TransformResult gaussian_cosine_form(const BumpPsi& psi, double t, const GaussianConstants& c = {},
                                     const quad::Options& opt = {1e-11, 0.0, pi / 4, 2000000});

// The same quantity straight from inverse_ft_axis, times t^2.
TransformResult gaussian_psi_localised_direct(const BumpPsi& psi, double t, const GaussianConstants& c = {},
                                              const quad::Options& opt = {1e-11, 0.0, pi / 4, 2000000});

}  // namespace decaylab
