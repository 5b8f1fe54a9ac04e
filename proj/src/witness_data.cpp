#include "decaylab/witness_data.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

#include "decaylab/eigensystem.hpp"
#include "decaylab/mollifier.hpp"
#include "decaylab/propagator.hpp"

namespace decaylab {

double BumpPsi::operator()(double xi1, double r) const {
  double x2 = xi1 * xi1;
  if (x2 <= a * a || x2 >= b * b) return 0.0;
  double rho = std::hypot(xi1, r);
  if (rho <= a || rho >= b) return 0.0;
  return smooth_bump((rho - a) / (b - a)) * smooth_bump((x2 - a * a) / (b * b - a * a)) / norm;
}

BumpPsi make_psi(double inner_margin) {
  if (!(inner_margin > 0.0) || !(inner_margin < 0.1))
    throw std::invalid_argument("make_psi: inner_margin must lie in (0, 0.1)");
  BumpPsi p;
  p.margin = inner_margin;
  p.a = 0.5 + inner_margin;
  p.b = 1.0 - inner_margin;
  p.norm = 1.0;
  // For fixed xi1 the radial bump is best at rho = max(|xi1|, (a + b)/2),
  // which leaves a 1D maximisation in xi1.
  double mid = 0.5 * (p.a + p.b);
  auto prof = [&](double x) {
    double rho = std::max(x, mid);
    return p(x, std::sqrt(std::max(0.0, rho * rho - x * x)));
  };
  constexpr int n = 4000;
  double best = 0.0, xb = p.a;
  for (int i = 1; i < n; ++i) {
    double x = p.a + (p.b - p.a) * i / n;
    double v = prof(x);
    if (v > best) {
      best = v;
      xb = x;
    }
  }
  double lo = std::max(p.a, xb - (p.b - p.a) / n), hi = std::min(p.b, xb + (p.b - p.a) / n);
  const double g = (std::sqrt(5.0) - 1) / 2;
  double c = hi - g * (hi - lo), d = lo + g * (hi - lo), fc = prof(c), fd = prof(d);
  for (int it = 0; it < 100; ++it) {
    if (fc > fd) {
      hi = d, d = c, fd = fc, c = hi - g * (hi - lo), fc = prof(c);
    } else {
      lo = c, c = d, fc = fd, d = lo + g * (hi - lo), fd = prof(d);
    }
  }
  best = std::max({best, fc, fd});
  if (!(best > 0.0)) throw std::invalid_argument("make_psi: margins leave an empty support");
  p.norm = best;
  return p;
}

double psi_integral(const BumpPsi& psi, double rel_tol) {
  quad::Options o{rel_tol, 0.0, pi / 4, 400000};
  auto f = [&](double xi1, double r) { return 2 * pi * r * psi(xi1, r); };
  auto r = quad::integrate_2d(f, {psi.a, psi.b, 0.0, psi.r_max()}, o);
  return 2.0 * r.value.real();  // even in xi1
}

Vec3 AnisotropicScaling::forward(const Vec3& xi) const {
  double q = std::pow(t, 0.25);
  return {xi[0], q * xi[1], q * xi[2]};
}

Vec3 AnisotropicScaling::inverse(const Vec3& xi) const {
  double q = std::pow(t, -0.25);
  return {xi[0], q * xi[1], q * xi[2]};
}

AxisymmetricIntegrand scaled_psi_multiplier(const BumpPsi& psi, double t) {
  if (!(t > 0)) throw std::invalid_argument("scaled_psi_multiplier: t must be positive");
  double s1 = std::sqrt(t), s3 = std::pow(t, 0.75);
  AxisymmetricIntegrand m;
  m.g = [psi, s1, s3](double xi1, double r) -> cplx { return psi(s1 * xi1, s3 * r); };
  m.xi1_lo = -psi.b / s1;
  m.xi1_hi = psi.b / s1;
  m.r_lo = 0.0;
  m.r_hi = psi.r_max() / s3;
  double lo = psi.a / s1, hi = psi.b / s1;
  m.empty = [lo, hi](const quad::Box& b) {
    double ax0 = std::abs(b.x0), ax1 = std::abs(b.x1);
    double near1 = (b.x0 <= 0 && b.x1 >= 0) ? 0.0 : std::min(ax0, ax1);
    return std::max(ax0, ax1) <= lo || near1 >= hi;
  };
  m.t = t;
  return m;
}

double scaled_psi_support_radius(const BumpPsi& psi, double t) {
  // |xi|^2 < xi1^2 (1 - t^{-1/2}) + b^2 t^{-3/2} on the support, linear in
  // xi1^2 in [a^2/t, b^2/t]; take the larger end
  double k = 1.0 - 1.0 / std::sqrt(t), c = psi.b * psi.b * std::pow(t, -1.5);
  double e1 = psi.a * psi.a / t * k + c, e2 = psi.b * psi.b / t * k + c;
  return std::sqrt(std::max(e1, e2));
}

bool scaled_psi_low_frequency(const BumpPsi& psi, double t) { return scaled_psi_support_radius(psi, t) < 0.5; }

L1Estimate scaled_psi_physical_l1(const BumpPsi& psi, double t, int n_freq, int n_space, double extent) {
  if (!(t > 0)) throw std::invalid_argument("scaled_psi_physical_l1: t must be positive");
  double s1 = std::sqrt(t), s3 = std::pow(t, 0.75);
  // frequency nodes over the support box (xi1 > 0 half; the field is even in xi1)
  quad::Rule gf = quad::gauss_legendre(n_freq);
  double x_lo = psi.a / s1, x_hi = psi.b / s1, r_hi = psi.r_max() / s3;
  std::vector<double> xi(n_freq), wx(n_freq), rr(n_freq), wr(n_freq);
  for (int i = 0; i < n_freq; ++i) {
    xi[i] = 0.5 * (x_lo + x_hi) + 0.5 * (x_hi - x_lo) * gf.x[i];
    wx[i] = 0.5 * (x_hi - x_lo) * gf.w[i];
    rr[i] = 0.5 * r_hi * (1 + gf.x[i]);
    wr[i] = 0.5 * r_hi * gf.w[i];
  }
  // physical box scaled by the reciprocal support widths
  double X = extent * s1, P = extent * s3;
  quad::Rule gs = quad::gauss_legendre(n_space);
  std::vector<double> x1(n_space), wx1(n_space), rho(n_space), wrho(n_space);
  for (int i = 0; i < n_space; ++i) {
    x1[i] = 0.5 * X * (1 + gs.x[i]);
    wx1[i] = 0.5 * X * gs.w[i];
    rho[i] = 0.5 * P * (1 + gs.x[i]);
    wrho[i] = 0.5 * P * gs.w[i];
  }
  // psi(x1, rho) = 2 (2 pi)^{-3/2} 2 pi sum_i sum_k cos(x1 xi_i) J0(rho r_k) r_k G_ik
  std::vector<double> G(std::size_t(n_freq) * n_freq);
  for (int i = 0; i < n_freq; ++i)
    for (int k = 0; k < n_freq; ++k) G[i * n_freq + k] = wx[i] * wr[k] * rr[k] * psi(s1 * xi[i], s3 * rr[k]);
  std::vector<double> J(std::size_t(n_space) * n_freq);
  for (int p = 0; p < n_space; ++p)
    for (int k = 0; k < n_freq; ++k) J[p * n_freq + k] = std::cyl_bessel_j(0.0, rho[p] * rr[k]);
  // H = G J^T : n_freq x n_space
  std::vector<double> H(std::size_t(n_freq) * n_space, 0.0);
  for (int i = 0; i < n_freq; ++i)
    for (int p = 0; p < n_space; ++p) {
      double acc = 0.0;
      for (int k = 0; k < n_freq; ++k) acc += G[i * n_freq + k] * J[p * n_freq + k];
      H[i * n_space + p] = acc;
    }
  double fac = 2 * kFourierNorm * 2 * pi;
  double total = 0.0, shell = 0.0;
  for (int q = 0; q < n_space; ++q) {
    std::vector<double> c(n_freq);
    for (int i = 0; i < n_freq; ++i) c[i] = std::cos(x1[q] * xi[i]);
    for (int p = 0; p < n_space; ++p) {
      double v = 0.0;
      for (int i = 0; i < n_freq; ++i) v += c[i] * H[i * n_space + p];
      double a = std::abs(fac * v) * 2 * pi * rho[p] * wx1[q] * wrho[p] * 2;  // x1 < 0 mirror
      total += a;
      if (x1[q] > 0.75 * X || rho[p] > 0.75 * P) shell += a;
    }
  }
  L1Estimate out;
  out.value = total;
  // mass in the outer quarter of the box; the decay is slow enough that
  // this bounds what lies beyond it
  out.tail = shell;
  return out;
}

SpectralState gaussian_v0(const GaussianConstants& c) {
  SpectralState s;
  double c1 = c.c1, c2 = c.c2;
  s.at = [c1, c2](const Vec3& xi) {
    double rho = norm3(xi);
    if (rho == 0.0) return Pair{};
    return Pair{0.0, cplx(0.0, c1 * (xi[0] + xi[1] + xi[2]) * std::exp(-c2 * rho * rho) / rho)};
  };
  // the xi2 and xi3 summands are odd about the axis and drop out of the mean
  s.axis_mean = [c1, c2](double xi1, double r) {
    double rho = std::hypot(xi1, r);
    if (rho == 0.0) return Pair{};
    return Pair{0.0, cplx(0.0, c1 * xi1 * std::exp(-c2 * rho * rho) / rho)};
  };
  s.axis_zonal = {{1, [c1, c2](double rho) { return Pair{0.0, cplx(0.0, c1 * std::exp(-c2 * rho * rho))}; }}};
  s.symmetry = Symmetry::General;
  s.rho_max = std::sqrt(52.0 / c2);  // e^{-52} below round-off of the peak
  s.component_zero = {true, false};
  s.tag = "gaussian";
  s.id = next_state_id();
  return s;
}

SpectralState psi_witness_state(const BumpPsi& psi, double t) {
  if (!(t > 0)) throw std::invalid_argument("psi_witness_state: t must be positive");
  double s1 = std::sqrt(t), s3 = std::pow(t, 0.75);
  SpectralState s;
  auto val = [psi, s1, s3, t](double xi1, double r) {
    double p = psi(s1 * xi1, s3 * r);
    if (p == 0.0) return Pair{};
    cplx lam = eigenvalues(std::hypot(xi1, r)).lambda_plus;
    return Pair{p * std::exp(t * lam), 0.0};
  };
  s.at = [val](const Vec3& xi) { return val(xi[0], std::hypot(xi[1], xi[2])); };
  s.axis_mean = val;
  s.radial_phase = [t](double rho) { return t * eigenvalues(rho).lambda_plus.imag(); };
  s.phase_variation = [t](double rho) { return t * frequency_variation(rho); };
  s.symmetry = Symmetry::Axisymmetric;
  s.rho_min = psi.a / s1;
  s.rho_max = scaled_psi_support_radius(psi, t);
  s.xi1_abs_min = psi.a / s1;
  s.xi1_abs_max = psi.b / s1;
  s.r_max = psi.r_max() / s3;
  s.component_zero = {false, true};
  s.tag = "psi";
  s.id = next_state_id();
  return s;
}

SpectralState radial_state(std::function<Pair(double)> f, double lo, double hi, std::array<bool, 2> zero,
                           const std::string& tag) {
  SpectralState s;
  s.at = [f](const Vec3& xi) { return f(norm3(xi)); };
  s.axis_mean = [f](double xi1, double r) { return f(std::hypot(xi1, r)); };
  s.axis_zonal = {{0, f}};
  s.symmetry = Symmetry::Radial;
  s.rho_min = lo;
  s.rho_max = hi;
  s.component_zero = zero;
  s.tag = tag;
  s.id = next_state_id();
  return s;
}

SpectralState heat_state(double t) {
  if (!(t > 0)) throw std::invalid_argument("heat_state: t must be positive");
  return radial_state([t](double rho) { return Pair{std::exp(-0.5 * t * rho * rho), 0.0}; }, 0.0,
                      std::sqrt(104.0 / t), {false, true}, "heat");
}

SpectralState dyadic_block_data(const PartitionProfile& lp, int j) {
  auto [lo, hi] = lp.support(j);
  return radial_state(
      [lp, j](double rho) {
        double w = lp.phi(j, rho);
        return Pair{w, w};
      },
      lo, hi, {false, false}, "block" + std::to_string(j));
}

SpectralState dyadic_density_data(const PartitionProfile& lp, int j) {
  auto [lo, hi] = lp.support(j);
  return radial_state([lp, j](double rho) { return Pair{lp.phi(j, rho), 0.0}; }, lo, hi, {false, true},
                      "density-block" + std::to_string(j));
}

SpectralState dyadic_kernel_state(const PartitionProfile& lp, int j, double t, int branch) {
  if (branch != 1 && branch != -1) throw std::invalid_argument("dyadic_kernel_state: branch must be +1 or -1");
  if (!(t >= 0)) throw std::invalid_argument("dyadic_kernel_state: t must be >= 0");
  auto [lo, hi] = lp.support(j);
  auto lam = [branch](double rho) {
    EigenPair e = eigenvalues(rho);
    return branch == 1 ? e.lambda_minus : e.lambda_plus;
  };
  SpectralState s = radial_state(
      [lp, j, t, lam](double rho) {
        double w = lp.phi(j, rho);
        if (w == 0.0) return Pair{};
        return Pair{w * std::exp(t * lam(rho)), 0.0};
      },
      lo, hi, {false, true}, "kernel" + std::to_string(j) + (branch == 1 ? "+" : "-"));
  s.radial_phase = [t, lam](double rho) { return t * lam(rho).imag(); };
  s.phase_variation = [t](double rho) { return t * frequency_variation(rho); };
  return s;
}

SpectralState low_band_kernel_state(const PartitionProfile& lp, double t, int branch) {
  if (branch != 1 && branch != -1) throw std::invalid_argument("low_band_kernel_state: branch must be +1 or -1");
  if (!(t >= 0)) throw std::invalid_argument("low_band_kernel_state: t must be >= 0");
  auto lam = [branch](double rho) {
    EigenPair e = eigenvalues(rho);
    return branch == 1 ? e.lambda_minus : e.lambda_plus;
  };
  SpectralState s = radial_state(
      [lp, t, lam](double rho) {
        double w = lp.low_band(rho);
        if (w == 0.0) return Pair{};
        return Pair{w * std::exp(t * lam(rho)), 0.0};
      },
      0.0, 8.0, {false, true}, std::string("lowkernel") + (branch == 1 ? "+" : "-"));
  s.radial_phase = [t, lam](double rho) { return t * lam(rho).imag(); };
  s.phase_variation = [t](double rho) { return t * frequency_variation(rho); };
  s.rho_cut = propagator_cutoff(t);
  return s;
}

TransformResult gaussian_cosine_form(const BumpPsi& psi, double t, const GaussianConstants& c,
                                     const quad::Options& opt) {
  AxisymmetricIntegrand m = scaled_psi_multiplier(psi, t);
  double c1 = c.c1, c2 = c.c2;
  auto f = [&](double xi1, double r) -> double {
    if (r == 0.0) return 0.0;
    double p = m.g(xi1, r).real();
    if (p == 0.0) return 0.0;
    double rho = std::hypot(xi1, r);
    double om = rho * std::sqrt(1 - rho * rho / 4);
    // v0 axis part i c1 xi1 e^{-c2 rho^2}/rho over i sqrt(4 - rho^2): the i's cancel
    double amp = c1 * xi1 * std::exp(-c2 * rho * rho) / rho / std::sqrt(4 - rho * rho);
    return 2 * pi * r * 2 * std::cos(t * (xi1 + om)) * std::exp(-0.5 * t * rho * rho) * amp * p;
  };
  auto ph = [&](double xi1, double r) {
    double rho = std::hypot(xi1, r);
    return t * (xi1 + rho * std::sqrt(1 - rho * rho / 4));
  };
  auto r = quad::integrate_2d(f, {m.xi1_lo, m.xi1_hi, m.r_lo, m.r_hi}, opt, ph, m.empty);
  TransformResult out;
  double k = kFourierNorm * t * t;
  out.value = k * r.value;
  out.error = k * r.error;
  out.converged = r.converged;
  out.cells = r.cells;
  return out;
}

TransformResult gaussian_psi_localised_direct(const BumpPsi& psi, double t, const GaussianConstants& c,
                                              const quad::Options& opt) {
  AxisymmetricIntegrand m = scaled_psi_multiplier(psi, t);
  auto g0 = m.g;
  double c1 = c.c1, c2 = c.c2;
  m.g = [g0, c1, c2, t](double xi1, double r) -> cplx {
    cplx p = g0(xi1, r);
    if (p == cplx{}) return 0.0;
    double rho = std::hypot(xi1, r);
    cplx v0(0.0, c1 * xi1 * std::exp(-c2 * rho * rho) / rho);
    return propagator(rho, t).g_av * v0 * p;
  };
  m.phase = [t](double xi1, double r) { return std::copysign(t * frequency_variation(std::hypot(xi1, r)), xi1); };
  m.phase_is_bound = true;
  TransformResult out = inverse_ft_axis(m, -t, opt);
  out.value *= t * t;
  out.error *= t * t;
  return out;
}

}  // namespace decaylab
