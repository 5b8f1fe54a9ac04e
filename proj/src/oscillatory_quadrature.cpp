#include "decaylab/oscillatory_quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "decaylab/eigensystem.hpp"
#include "decaylab/littlewood_paley.hpp"
#include "decaylab/witness_data.hpp"

namespace decaylab {

quad::Options default_transform_options() { return {1e-9, 0.0, pi / 4, 400000}; }

namespace {

constexpr double kAxisFactor = kFourierNorm * 2 * pi;

std::function<bool(const quad::Box&)> annulus_skip(double rho_lo, double rho_hi, double xi1_abs_min, double r_max) {
  return [=](const quad::Box& b) {
    double ax0 = std::abs(b.x0), ax1 = std::abs(b.x1);
    double near1 = (b.x0 <= 0 && b.x1 >= 0) ? 0.0 : std::min(ax0, ax1);
    double far1 = std::max(ax0, ax1);
    double rmin = std::hypot(near1, b.y0), rmax = std::hypot(far1, b.y1);
    return rmin >= rho_hi || rmax <= rho_lo || far1 <= xi1_abs_min || b.y0 >= r_max;
  };
}

TransformResult from(const quad::Result& r, double factor) {
  TransformResult t;
  t.value = factor * r.value;
  t.error = std::abs(factor) * r.error;
  t.converged = r.converged;
  t.cells = r.cells;
  return t;
}

}  // namespace

TransformResult inverse_ft_axis(const AxisymmetricIntegrand& m, double x1, const quad::Options& opt) {
  if (!m.g || !(m.xi1_hi > m.xi1_lo) || !(m.r_hi > m.r_lo)) return {};
  auto f = [&](double xi1, double r) -> cplx {
    if (r == 0.0) return 0.0;
    cplx g = m.g(xi1, r);
    if (g == cplx{}) return 0.0;
    return std::polar(r, x1 * xi1) * g;
  };
  quad::Box dom{m.xi1_lo, m.xi1_hi, m.r_lo, m.r_hi};
  quad::Result r;
  if (m.phase) {
    double xs = m.phase_is_bound ? std::abs(x1) : x1;
    auto ph = [&](double xi1, double rr) { return xs * xi1 + m.phase(xi1, rr); };
    r = quad::integrate_2d(f, dom, opt, ph, m.empty);
  } else {
    auto ph = [&](double xi1, double) { return x1 * xi1; };
    r = quad::integrate_2d(f, dom, opt, ph, m.empty);
  }
  return from(r, kAxisFactor);
}

TransformResult inverse_ft_axis(const DecomposedMultiplier& m, double x1, const quad::Options& opt) {
  // odd parts cancel exactly under r -> -r in the dropped angular integral
  if (!m.has_even) return {};
  return inverse_ft_axis(m.even, x1, opt);
}

TransformResult inverse_ft_3d(const std::function<cplx(const Vec3&)>& m, const Vec3& x, double R,
                              const quad::Options& opt) {
  double ax = norm3(x);
  Vec3 e{1.0, 0.0, 0.0};
  if (ax > 0) e = {x[0] / ax, x[1] / ax, x[2] / ax};
  // orthonormal completion of e
  Vec3 h = std::abs(e[0]) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
  double d = h[0] * e[0] + h[1] * e[1] + h[2] * e[2];
  Vec3 u{h[0] - d * e[0], h[1] - d * e[1], h[2] - d * e[2]};
  double nu = norm3(u);
  u = {u[0] / nu, u[1] / nu, u[2] / nu};
  Vec3 w{e[1] * u[2] - e[2] * u[1], e[2] * u[0] - e[0] * u[2], e[0] * u[1] - e[1] * u[0]};

  int nmu = 24 + int(std::ceil(R * ax));
  quad::Rule gl = quad::gauss_legendre(nmu);
  constexpr int nphi = 48;
  auto f = [&](double rho) -> cplx {
    if (rho == 0.0) return 0.0;
    cplx acc{};
    for (int i = 0; i < nmu; ++i) {
      double mu = gl.x[i], st = std::sqrt(std::max(0.0, 1 - mu * mu));
      cplx ring{};
      for (int k = 0; k < nphi; ++k) {
        double ph = 2 * pi * k / nphi, c = st * std::cos(ph), s = st * std::sin(ph);
        Vec3 xi{rho * (mu * e[0] + c * u[0] + s * w[0]), rho * (mu * e[1] + c * u[1] + s * w[1]),
                rho * (mu * e[2] + c * u[2] + s * w[2])};
        ring += m(xi);
      }
      acc += gl.w[i] * std::polar(1.0, rho * ax * mu) * ring;
    }
    return rho * rho * acc * (2 * pi / nphi);
  };
  auto r = quad::integrate_1d(f, 0.0, R, opt, [&](double rho) { return rho * ax; });
  return from(r, kFourierNorm);
}

AxisymmetricIntegrand axis_integrand(const SpectralState& s, int component) {
  AxisymmetricIntegrand m;
  if (s.zero || s.component_zero[component]) return m;
  auto base = std::make_shared<SpectralState>(s);
  double lo = s.rho_min, hi = s.rho_hi();
  m.g = [base, component, lo, hi](double xi1, double r) -> cplx {
    double rho = std::hypot(xi1, r);
    if (rho < lo || rho > hi) return 0.0;
    return base->mean_about_axis(xi1, r)[component];
  };
  double X = s.xi1_max(), R = s.r_limit();
  if (!std::isfinite(X) || !std::isfinite(R))
    throw std::invalid_argument("axis_integrand: state has no finite effective support");
  m.xi1_lo = -X;
  m.xi1_hi = X;
  m.r_lo = 0.0;
  m.r_hi = R;
  if (s.radial_phase) {
    auto ph = s.radial_phase;
    m.phase = [ph](double xi1, double r) { return ph(std::hypot(xi1, r)); };
  } else if (s.phase_variation) {
    auto tv = s.phase_variation;
    m.phase = [tv](double xi1, double r) { return std::copysign(tv(std::hypot(xi1, r)), xi1); };
    m.phase_is_bound = true;
  }
  m.empty = annulus_skip(lo, hi, s.xi1_abs_min, R);
  return m;
}

double sph_j0(double z) {
  if (std::abs(z) < 1e-4) return 1.0 - z * z / 6.0;
  return std::sin(z) / z;
}

double sph_j1(double z) {
  if (std::abs(z) < 0.1) {
    double z2 = z * z;
    return z * (1.0 / 3 - z2 * (1.0 / 30 - z2 * (1.0 / 840 - z2 / 45360)));
  }
  return std::sin(z) / (z * z) - std::cos(z) / z;
}

namespace {

cplx i_pow(int ell) {
  switch (((ell % 4) + 4) % 4) {
    case 0: return {1, 0};
    case 1: return {0, 1};
    case 2: return {-1, 0};
    default: return {0, -1};
  }
}

double sph_j(int ell, double z) { return ell == 0 ? sph_j0(z) : sph_j1(z); }

}  // namespace

PairTransform transform_on_axis(const SpectralState& s, double x1, const quad::Options& opt) {
  PairTransform out;
  if (s.zero) return out;
  if (!s.axis_zonal.empty()) {
    if (!std::isfinite(s.rho_hi()))
      throw std::invalid_argument("transform_on_axis: state has no finite effective support");
    double ax = std::abs(x1);
    for (const auto& term : s.axis_zonal) {
      for (int c = 0; c < 2; ++c) {
        if (s.component_zero[c]) continue;
        auto f = [&](double rho) -> cplx {
          if (rho == 0.0) return 0.0;
          return rho * rho * sph_j(term.ell, rho * x1) * term.radial(rho)[c];
        };
        auto ph = [&](double rho) { return rho * ax + s.variation_at(rho); };
        auto r = quad::integrate_1d(f, s.rho_min, s.rho_hi(), opt, ph);
        out.value[c] += kFourierNorm * 4 * pi * i_pow(term.ell) * r.value;
        out.error += kFourierNorm * 4 * pi * r.error;
        out.converged = out.converged && r.converged;
      }
    }
    return out;
  }
  for (int c = 0; c < 2; ++c) {
    if (s.component_zero[c]) continue;
    auto r = inverse_ft_axis(axis_integrand(s, c), x1, opt);
    out.value[c] = r.value;
    out.error += r.error;
    out.converged = out.converged && r.converged;
  }
  return out;
}

// ---- fast profile ----

AxisProfile::AxisProfile(const SpectralState& s, double x_max, const quad::Options& opt) : x_max_(x_max) {
  if (s.zero) return;
  zonal_ = !s.axis_zonal.empty();
  double lo, hi;
  std::function<double(double, double)> span;
  if (zonal_) {
    lo = s.rho_min;
    hi = s.rho_hi();
    span = [&](double a, double b) { return x_max * (b - a) + std::abs(s.variation_at(b) - s.variation_at(a)); };
  } else {
    hi = s.xi1_max();
    lo = -hi;
    double R = s.r_limit();
    std::function<double(double, double)> ph;
    if (s.radial_phase)
      ph = [&](double xi1, double r) { return s.radial_phase(std::hypot(xi1, r)); };
    else
      ph = [&](double xi1, double r) { return std::copysign(s.variation_at(std::hypot(xi1, r)), xi1); };
    span = [&, R, ph](double a, double b) {
      double worst = 0.0;
      for (int k = 0; k <= 2; ++k) {
        double r = R * k / 2.0, mn = inf, mx = -inf;
        for (int i = 0; i <= 4; ++i) {
          double v = ph(a + (b - a) * i / 4.0, r);
          mn = std::min(mn, v);
          mx = std::max(mx, v);
        }
        worst = std::max(worst, mx - mn);
      }
      return x_max * (b - a) + worst;
    };
  }
  if (!std::isfinite(hi) || !std::isfinite(lo))
    throw std::invalid_argument("AxisProfile: state has no finite effective support");
  bandwidth_ = hi;
  if (!(hi > lo)) return;

  std::vector<std::pair<double, double>> cells;
  std::vector<std::pair<std::pair<double, double>, int>> stack{{{lo, hi}, 0}};
  while (!stack.empty()) {
    auto [c, depth] = stack.back();
    stack.pop_back();
    if (span(c.first, c.second) > pi / 2 && depth < 40) {
      double m = 0.5 * (c.first + c.second);
      stack.push_back({{m, c.second}, depth + 1});
      stack.push_back({{c.first, m}, depth + 1});
    } else {
      cells.push_back(c);
    }
  }
  while (cells.size() < 64) {
    std::vector<std::pair<double, double>> next;
    for (auto [a, b] : cells) {
      double m = 0.5 * (a + b);
      next.push_back({a, m});
      next.push_back({m, b});
    }
    cells.swap(next);
  }
  std::sort(cells.begin(), cells.end());

  const quad::Rule& gl = quad::gl15();
  if (zonal_) {
    for (const auto& term : s.axis_zonal) {
      cplx ip = kFourierNorm * 4 * pi * i_pow(term.ell);
      for (auto [a, b] : cells) {
        double c = 0.5 * (a + b), h = 0.5 * (b - a);
        for (std::size_t i = 0; i < gl.x.size(); ++i) {
          double rho = c + h * gl.x[i];
          Pair f = term.radial(rho);
          double w = gl.w[i] * h * rho * rho;
          nodes_.push_back(rho);
          ell_.push_back(term.ell);
          coef_.push_back({ip * w * f[0], ip * w * f[1]});
        }
      }
    }
    return;
  }

  double R = s.r_limit(), a_min = s.xi1_abs_min;
  quad::Options ro = opt;
  ro.rel_tol = std::min(opt.rel_tol, 1e-10);
  for (auto [a, b] : cells) {
    if (a >= -a_min && b <= a_min) continue;
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    for (std::size_t i = 0; i < gl.x.size(); ++i) {
      double xi1 = c + h * gl.x[i];
      Pair g{};
      if (std::abs(xi1) >= a_min) {
        for (int comp = 0; comp < 2; ++comp) {
          if (s.component_zero[comp]) continue;
          auto f = [&](double r) -> cplx {
            double rho = std::hypot(xi1, r);
            if (rho < s.rho_min || rho > s.rho_hi()) return 0.0;
            return r * s.mean_about_axis(xi1, r)[comp];
          };
          g[comp] = quad::integrate_1d(f, 0.0, R, ro).value;
        }
      }
      double w = kAxisFactor * gl.w[i] * h;
      nodes_.push_back(xi1);
      ell_.push_back(-1);
      coef_.push_back({w * g[0], w * g[1]});
    }
  }
}

Pair AxisProfile::operator()(double x1) const {
  Pair s{};
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    if (zonal_) {
      double j = sph_j(ell_[k], nodes_[k] * x1);
      s[0] += j * coef_[k][0];
      s[1] += j * coef_[k][1];
    } else {
      cplx e = std::polar(1.0, x1 * nodes_[k]);
      s[0] += e * coef_[k][0];
      s[1] += e * coef_[k][1];
    }
  }
  return s;
}

double AxisProfile::norm(double x1) const { return std::sqrt(pair_abs2((*this)(x1))); }

SupResult sup_on_axis(const SpectralState& s, double t_context, const quad::Options& opt, bool with_upper) {
  SupResult out;
  if (s.zero) return out;
  bool zonal = !s.axis_zonal.empty();
  double bw = zonal ? s.rho_hi() : s.xi1_max();
  double low = zonal ? s.rho_min : s.xi1_abs_min;
  if (!std::isfinite(bw) || !(bw > 0))
    throw std::invalid_argument("sup_on_axis: state has no finite effective support");
  double x_hi = 2 * std::max(t_context, 0.0) + 20 * pi / std::max(low, bw / 16);
  AxisProfile prof(s, x_hi, opt);

  // zonal terms of one parity give |F(-x)| = |F(x)|
  bool symmetric = zonal;
  for (const auto& term : s.axis_zonal) symmetric = symmetric && (term.ell == s.axis_zonal.front().ell);

  double step = pi / (4 * bw);
  std::vector<double> xs{0.0};
  for (double x = step / 8; x <= x_hi; x += std::min(step, 0.1 * x)) {
    xs.push_back(x);
    if (!symmetric) xs.push_back(-x);
  }
  std::sort(xs.begin(), xs.end());
  std::vector<double> vals(xs.size());
  std::size_t best = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    vals[k] = prof.norm(xs[k]);
    if (vals[k] > vals[best]) best = k;
  }
  out.candidates = xs.size();

  double a = best > 0 ? xs[best - 1] : xs[best];
  double b = best + 1 < xs.size() ? xs[best + 1] : xs[best];
  double xbest = xs[best], vbest = vals[best];
  if (b > a) {
    const double g = (std::sqrt(5.0) - 1) / 2;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = prof.norm(c), fd = prof.norm(d);
    for (int it = 0; it < 80 && (b - a) > 1e-12 * std::max(1.0, std::abs(xbest)); ++it) {
      if (fc > fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - g * (b - a);
        fc = prof.norm(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + g * (b - a);
        fd = prof.norm(d);
      }
    }
    double xm = fc > fd ? c : d, vm = std::max(fc, fd);
    if (vm > vbest) {
      xbest = xm;
      vbest = vm;
    }
  }

  PairTransform cert = transform_on_axis(s, xbest, opt);
  out.x1 = xbest;
  out.value = std::sqrt(pair_abs2(cert.value));
  out.error = cert.error;
  out.profile_value = vbest;
  out.converged = cert.converged && std::abs(out.value - vbest) <= 1e-6 * std::max(out.value, 1e-300) + cert.error;
  if (with_upper) out.upper_bound = linf_upper_bound(s, opt).value;
  return out;
}

// ---- square regions ----

const char* to_string(RegionTag r) {
  switch (r) {
    case RegionTag::B1: return "B1";
    case RegionTag::B2: return "B2";
    case RegionTag::B3: return "B3";
    case RegionTag::B4: return "B4";
    case RegionTag::WholeSpace: return "WholeSpace";
    case RegionTag::HalfSpaceXiNeg: return "HalfSpaceXiNeg";
    case RegionTag::HalfSpaceXiPos: return "HalfSpaceXiPos";
  }
  return "?";
}

double region_angle(RegionTag tag, double r, double s) {
  const double root2 = std::sqrt(2.0);
  if (tag == RegionTag::WholeSpace || tag == RegionTag::HalfSpaceXiNeg || tag == RegionTag::HalfSpaceXiPos)
    return 2 * pi;
  if (r <= s) return tag == RegionTag::B1 ? 2 * pi : 0.0;
  double c = s / r;
  if (r <= s * root2) {
    switch (tag) {
      case RegionTag::B1: return 2 * pi - 8 * std::acos(c);
      case RegionTag::B2:
      case RegionTag::B3: return 4 * std::acos(c);
      default: return 0.0;
    }
  }
  switch (tag) {
    case RegionTag::B2:
    case RegionTag::B3: return 4 * std::asin(c);
    case RegionTag::B4: return 2 * pi - 8 * std::asin(c);
    default: return 0.0;
  }
}

RegionResult region_integral(RegionTag tag, double t, int branch, int j, double transition_width,
                             const quad::Options& opt, double x1) {
  if (!(t > 0)) throw std::invalid_argument("region_integral: t must be positive");
  if (branch != 1 && branch != -1) throw std::invalid_argument("region_integral: branch must be +1 or -1");
  if (j > -1) throw std::invalid_argument("region_integral: j <= -1 required");
  if (tag == RegionTag::HalfSpaceXiNeg || tag == RegionTag::HalfSpaceXiPos)
    throw std::invalid_argument("region_integral: half-space tags belong to halfspace_witness_integral");
  PartitionProfile lp(transition_width);
  if (std::isnan(x1)) x1 = branch * t;

  // branch -1 is the conjugate of branch +1 at -x1
  double xe = branch == 1 ? x1 : -x1;
  double T = std::sqrt(t), s = std::pow(t, -0.25);
  double scale = std::ldexp(T, j);
  double u_lo = scale * (1 - transition_width), u_hi = std::min(2 * scale, 12.0);

  RegionResult out;
  out.x1 = x1;
  if (!(u_hi > u_lo)) return out;

  auto amp = [&](double u) { return std::exp(-0.5 * u * u) * lp.phi0(u / scale); };
  auto phase = [&](double e1, double r) {
    double u = std::hypot(e1, r);
    return xe * e1 / T + T * u * std::sqrt(1 - u * u / (4 * t));
  };
  auto f = [&](double e1, double r) -> cplx {
    double ang = region_angle(tag, r, s);
    if (ang == 0.0 || r == 0.0) return 0.0;
    double u = std::hypot(e1, r);
    double a = amp(u);
    if (a == 0.0) return 0.0;
    return std::polar(ang * r * a, phase(e1, r));
  };

  std::vector<double> cuts{0.0};
  if (tag != RegionTag::WholeSpace) {
    for (double c : {s, s * std::sqrt(2.0)})
      if (c < u_hi) cuts.push_back(c);
  }
  cuts.push_back(u_hi);
  auto skip = annulus_skip(u_lo, u_hi, 0.0, u_hi);
  cplx total{};
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    double r0 = cuts[k], r1 = cuts[k + 1];
    if (region_angle(tag, 0.5 * (r0 + r1), s) == 0.0) continue;
    auto r = quad::integrate_2d(f, {-u_hi, u_hi, r0, r1}, opt, phase, skip);
    total += r.value;
    out.error += r.error;
    out.converged = out.converged && r.converged;
    out.cells += r.cells;
  }
  out.value = branch == 1 ? total : std::conj(total);
  return out;
}

TransformResult dyadic_kernel_on_axis(double t, int branch, int j, double transition_width, double x1,
                                      const quad::Options& opt) {
  if (branch != 1 && branch != -1) throw std::invalid_argument("dyadic_kernel_on_axis: branch must be +1 or -1");
  PartitionProfile lp(transition_width);
  auto [lo, hi] = lp.support(j);
  auto f = [&](double rho) -> cplx {
    double w = lp.phi(j, rho);
    if (w == 0.0) return 0.0;
    EigenPair ev = eigenvalues(rho);
    cplx lam = branch == 1 ? ev.lambda_minus : ev.lambda_plus;
    return rho * rho * w * sph_j0(rho * x1) * std::exp(t * lam);
  };
  auto ph = [&](double rho) { return rho * std::abs(x1) + t * std::abs(eigenvalues(rho).lambda_plus.imag()); };
  auto r = quad::integrate_1d(f, lo, hi, opt, ph);
  return from(r, kFourierNorm * 4 * pi);
}

// ---- half-space witness integrals ----

cplx halfspace_integrand(const BumpPsi& psi, double t, int sign, double xi1, double r) {
  double p = psi(xi1, r);
  if (p == 0.0) return 0.0;
  double T = std::sqrt(t);
  double u2 = xi1 * xi1 + r * r / T, u = std::sqrt(u2);
  double root = std::sqrt(1 - u2 / (4 * t));
  double ph;
  if (xi1 < 0)
    ph = r * r / (-xi1 + u) - u2 * u / (4 * T * (1 + root));
  else
    ph = T * (xi1 + u * root);
  return std::polar(p * std::exp(-0.5 * u2), sign * ph);
}

cplx halfspace_limit_integrand(const BumpPsi& psi, int sign, double xi1, double r) {
  if (!(xi1 < 0)) return 0.0;
  double p = psi(xi1, r);
  if (p == 0.0) return 0.0;
  return std::polar(p * std::exp(-0.5 * xi1 * xi1), sign * r * r / (2 * -xi1));
}

HalfSpaceResult halfspace_witness_integral(const BumpPsi& psi, double t, int sign, RegionTag half,
                                           const quad::Options& opt) {
  if (!(t > 0)) throw std::invalid_argument("halfspace_witness_integral: t must be positive");
  if (sign != 1 && sign != -1) throw std::invalid_argument("halfspace_witness_integral: sign must be +1 or -1");
  if (half != RegionTag::HalfSpaceXiNeg && half != RegionTag::HalfSpaceXiPos)
    throw std::invalid_argument("halfspace_witness_integral: half must be HalfSpaceXiNeg or HalfSpaceXiPos");
  bool neg = half == RegionTag::HalfSpaceXiNeg;
  quad::Box dom = neg ? quad::Box{-psi.b, -psi.a, 0.0, psi.r_max()} : quad::Box{psi.a, psi.b, 0.0, psi.r_max()};
  auto f = [&](double xi1, double r) { return 2 * pi * r * halfspace_integrand(psi, t, sign, xi1, r); };
  double T = std::sqrt(t);
  auto ph = [&](double xi1, double r) {
    double u2 = xi1 * xi1 + r * r / T, u = std::sqrt(u2), root = std::sqrt(1 - u2 / (4 * t));
    if (xi1 < 0) return r * r / (-xi1 + u) - u2 * u / (4 * T * (1 + root));
    return T * (xi1 + u * root);
  };
  auto r = quad::integrate_2d(f, dom, opt, ph);
  HalfSpaceResult out;
  out.scaled = r.value;
  out.raw = r.value / T;
  out.error = r.error;
  out.converged = r.converged;
  return out;
}

TransformResult halfspace_limit_constant(const BumpPsi& psi, int sign, const quad::Options& opt) {
  auto f = [&](double xi1, double r) { return 2 * pi * r * halfspace_limit_integrand(psi, sign, xi1, r); };
  auto ph = [&](double xi1, double r) { return r * r / (2 * -xi1); };
  auto r = quad::integrate_2d(f, {-psi.b, -psi.a, 0.0, psi.r_max()}, opt, ph);
  return from(r, 1.0);
}

}  // namespace decaylab
