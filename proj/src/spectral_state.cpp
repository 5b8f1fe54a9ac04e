#include "decaylab/spectral_state.hpp"

#include <atomic>
#include <memory>
#include <cmath>
#include <stdexcept>

namespace decaylab {

const char* to_string(Symmetry s) {
  switch (s) {
    case Symmetry::General: return "General";
    case Symmetry::Axisymmetric: return "Axisymmetric";
    case Symmetry::Radial: return "Radial";
  }
  return "?";
}

std::uint64_t next_state_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1);
}

Pair SpectralState::mean_about_axis(double xi1, double r) const {
  if (zero) return {};
  if (axis_mean) return axis_mean(xi1, r);
  if (symmetry != Symmetry::General) return at({xi1, r, 0.0});
  // trapezoid in the angle: exact for trigonometric degree < 32
  constexpr int n = 32;
  Pair s{};
  for (int k = 0; k < n; ++k) {
    double th = 2 * pi * k / n;
    Pair p = at({xi1, r * std::cos(th), r * std::sin(th)});
    s[0] += p[0];
    s[1] += p[1];
  }
  return {s[0] / double(n), s[1] / double(n)};
}

double SpectralState::xi1_max() const { return std::min(xi1_abs_max, rho_hi()); }
double SpectralState::r_limit() const { return std::min(r_max, rho_hi()); }

SpectralState zero_state() {
  SpectralState s;
  s.at = [](const Vec3&) { return Pair{}; };
  s.axis_mean = [](double, double) { return Pair{}; };
  s.symmetry = Symmetry::Radial;
  s.zero = true;
  s.rho_max = 0.0;
  s.tag = "zero";
  s.id = next_state_id();
  return s;
}

SpectralState multiply_radial(const SpectralState& s, std::function<double(double)> m, double lo,
                              double hi, const std::string& tag) {
  double rmin = std::max(s.rho_min, lo), rmax = std::min(s.rho_max, hi);
  if (s.zero || !(rmax > rmin)) {
    SpectralState z = zero_state();
    z.tag = tag;
    return z;
  }
  SpectralState out = s;
  auto base = std::make_shared<SpectralState>(s);
  out.at = [base, m](const Vec3& xi) {
    double w = m(norm3(xi));
    if (w == 0.0) return Pair{};
    Pair p = base->at(xi);
    return Pair{w * p[0], w * p[1]};
  };
  out.axis_mean = [base, m](double xi1, double r) {
    double w = m(std::hypot(xi1, r));
    if (w == 0.0) return Pair{};
    Pair p = base->mean_about_axis(xi1, r);
    return Pair{w * p[0], w * p[1]};
  };
  out.axis_zonal.clear();
  for (const auto& term : s.axis_zonal) {
    auto f = term.radial;
    out.axis_zonal.push_back({term.ell, [f, m](double rho) {
                                double w = m(rho);
                                if (w == 0.0) return Pair{};
                                Pair p = f(rho);
                                return Pair{w * p[0], w * p[1]};
                              }});
  }
  out.rho_min = rmin;
  out.rho_max = rmax;
  if (lo >= s.rho_cut) out.rho_cut = inf;  // asking for the negligible part on purpose
  if (!(out.rho_hi() > out.rho_min)) {
    SpectralState z = zero_state();
    z.tag = tag;
    return z;
  }
  out.xi1_abs_max = std::min(s.xi1_abs_max, hi);
  out.r_max = std::min(s.r_max, hi);
  out.tag = tag;
  out.id = next_state_id();
  return out;
}

namespace {

struct Sphere {
  std::vector<Vec3> dir;
  std::vector<double> w;
};

const Sphere& sphere_rule() {
  static const Sphere S = [] {
    Sphere s;
    auto gl = quad::gauss_legendre(16);
    constexpr int nphi = 32;
    for (std::size_t i = 0; i < gl.x.size(); ++i) {
      double mu = gl.x[i], st = std::sqrt(1 - mu * mu);
      for (int k = 0; k < nphi; ++k) {
        double ph = 2 * pi * k / nphi;
        s.dir.push_back({mu, st * std::cos(ph), st * std::sin(ph)});
        s.w.push_back(gl.w[i] * 2 * pi / nphi);
      }
    }
    return s;
  }();
  return S;
}

}  // namespace

SpectralIntegral integrate_spectral(const SpectralState& s, const std::function<double(const Pair&)>& F,
                                    const quad::Options& opt) {
  SpectralIntegral out;
  if (s.zero) return out;
  if (!std::isfinite(s.rho_hi()))
    throw std::invalid_argument("integrate_spectral: state has no finite effective support");
  if (!(s.rho_hi() > s.rho_min)) return out;

  quad::Result r;
  if (s.symmetry == Symmetry::Radial) {
    r = quad::integrate_1d(
        [&](double rho) {
          if (rho == 0.0) return 0.0;
          return 4 * pi * rho * rho * F(s.at({rho, 0.0, 0.0}));
        },
        s.rho_min, s.rho_hi(), opt);
  } else if (s.symmetry == Symmetry::Axisymmetric) {
    double X = s.xi1_max(), R = s.r_limit();
    double lo = s.rho_min, hi = s.rho_hi(), a = s.xi1_abs_min;
    std::function<bool(const quad::Box&)> skip = [=](const quad::Box& b) {
      double ax0 = std::abs(b.x0), ax1 = std::abs(b.x1);
      double near1 = (b.x0 <= 0 && b.x1 >= 0) ? 0.0 : std::min(ax0, ax1);
      double far1 = std::max(ax0, ax1);
      double rmin = std::hypot(near1, b.y0), rmax = std::hypot(far1, b.y1);
      return rmin >= hi || rmax <= lo || far1 <= a || b.y0 >= R;
    };
    auto f = [&](double xi1, double rr) { return 2 * pi * rr * F(s.at({xi1, rr, 0.0})); };
    r = quad::integrate_2d(f, {-X, X, 0.0, R}, opt, quad::NoPhase{}, skip);
  } else {
    const Sphere& S = sphere_rule();
    r = quad::integrate_1d(
        [&](double rho) {
          if (rho == 0.0) return 0.0;
          double acc = 0.0;
          for (std::size_t k = 0; k < S.dir.size(); ++k) {
            const Vec3& d = S.dir[k];
            acc += S.w[k] * F(s.at({rho * d[0], rho * d[1], rho * d[2]}));
          }
          return rho * rho * acc;
        },
        s.rho_min, s.rho_hi(), opt);
  }
  out.value = r.value.real();
  out.error = r.error;
  out.converged = r.converged;
  return out;
}

SpectralIntegral l2_norm(const SpectralState& s, const quad::Options& opt) {
  auto sq = integrate_spectral(s, [](const Pair& p) { return pair_abs2(p); }, opt);
  SpectralIntegral out;
  out.value = std::sqrt(std::max(sq.value, 0.0));
  out.error = out.value > 0 ? sq.error / (2 * out.value) : std::sqrt(sq.error);
  out.converged = sq.converged;
  return out;
}

SpectralIntegral linf_upper_bound(const SpectralState& s, const quad::Options& opt) {
  auto m = integrate_spectral(s, [](const Pair& p) { return std::sqrt(pair_abs2(p)); }, opt);
  m.value *= kFourierNorm;
  m.error *= kFourierNorm;
  return m;
}

}  // namespace decaylab
