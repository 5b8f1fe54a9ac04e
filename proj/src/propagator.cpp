#include "decaylab/propagator.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "decaylab/eigensystem_impl.hpp"

namespace decaylab {

namespace {

constexpr double kCutLog = 46.0;  // ln 1e20

Pair apply(double rho, double t, const Pair& p) { return propagator(rho, t).apply(p); }

}  // namespace

double propagator_cutoff(double t) {
  if (!(t > 0)) return inf;
  // rho < 2: |entries| <= (1 + 2t) e^{-t rho^2/2}; rho >= 2: <= (1 + 4t) e^{-t}
  if (t - std::log1p(4 * t) < kCutLog) return inf;
  double rc = std::sqrt(2 * (kCutLog + std::log1p(2 * t)) / t);
  return rc < 2 ? rc : inf;
}

EvolvedState evolve(const SpectralState& s, double t) {
  if (!std::isfinite(t) || t < 0) throw std::invalid_argument("evolve: t must be finite and >= 0");
  EvolvedState e;
  static_cast<SpectralState&>(e) = s;
  e.base = std::make_shared<const SpectralState>(s);
  e.t = t;
  if (t == 0.0 || s.zero) return e;

  auto b = e.base;
  e.at = [b, t](const Vec3& xi) { return apply(norm3(xi), t, b->at(xi)); };
  e.axis_mean = [b, t](double xi1, double r) { return apply(std::hypot(xi1, r), t, b->mean_about_axis(xi1, r)); };
  e.axis_zonal.clear();
  for (const auto& term : s.axis_zonal) {
    auto f = term.radial;
    e.axis_zonal.push_back({term.ell, [f, t](double rho) { return apply(rho, t, f(rho)); }});
  }
  // two exponentials now; only the variation bound survives
  e.radial_phase = nullptr;
  auto tv = s.phase_variation;
  e.phase_variation = [tv, t](double rho) { return (tv ? tv(rho) : 0.0) + t * frequency_variation(rho); };
  // trim only when the state has bulk well inside the cut, so what is
  // dropped is negligible relative to what is kept
  double rc = propagator_cutoff(t);
  if (s.rho_min <= 0.5 * rc) e.rho_cut = std::min(s.rho_cut, rc);
  if (!(e.rho_hi() > e.rho_min)) {
    SpectralState z = zero_state();
    static_cast<SpectralState&>(e) = z;
    e.base = b;
    e.t = t;
  }
  e.component_zero = {false, false};
  std::ostringstream tag;
  tag << s.tag << "|t=" << t;
  e.tag = tag.str();
  e.id = next_state_id();
  return e;
}

double default_fd_step(double t) { return 1e-4 * std::max(1.0, t); }

namespace {

using qf = boost::multiprecision::cpp_bin_float_quad;
using qc = boost::multiprecision::cpp_complex_quad;

struct QPair {
  qc a, v;
};

QPair evolve_q(const Pair& p0, double rho, const qf& t) {
  auto g = detail::propagator_t<qf, qc>(qf(rho), t);
  qc a0(qf(p0[0].real()), qf(p0[0].imag())), v0(qf(p0[1].real()), qf(p0[1].imag()));
  return {g[0] * a0 + g[1] * v0, g[2] * a0 + g[3] * v0};
}

qf abs2(const qc& z) { return z.real() * z.real() + z.imag() * z.imag(); }

void check_fd(double rho, double t, double h, const char* who) {
  if (!std::isfinite(rho) || rho < 0) throw std::invalid_argument(std::string(who) + ": rho must be >= 0");
  if (!(h > 0)) throw std::invalid_argument(std::string(who) + ": h must be > 0");
  if (!(t >= h)) throw std::invalid_argument(std::string(who) + ": t >= h required");
}

}  // namespace

double energy_flux_residual(const SpectralState& s, double rho, double t, double h) {
  check_fd(rho, t, h, "energy_flux_residual");
  Pair p0 = s.at({rho, 0.0, 0.0});
  qf T(t), H(h);
  auto E = [&](const qf& tt) {
    QPair q = evolve_q(p0, rho, tt);
    return abs2(q.a) + abs2(q.v);
  };
  QPair mid = evolve_q(p0, rho, T);
  qf d = (E(T + H) - E(T - H)) / (2 * H);
  qf r = d + 2 * qf(rho) * qf(rho) * abs2(mid.v);
  return static_cast<double>(boost::multiprecision::abs(r));
}

std::pair<double, double> wave_residuals(const SpectralState& s, double rho, double t, double h) {
  check_fd(rho, t, h, "wave_residuals");
  Pair p0 = s.at({rho, 0.0, 0.0});
  qf T(t), H(h), R(rho);
  QPair m = evolve_q(p0, rho, T - H), c = evolve_q(p0, rho, T), p = evolve_q(p0, rho, T + H);
  qf H2 = H * H;
  qc a2 = (p.a - qf(2) * c.a + m.a) / H2;
  qc v2 = (p.v - qf(2) * c.v + m.v) / H2;
  qc v1 = (p.v - m.v) / (qf(2) * H);
  qc ra = a2 + R * R * c.a - R * R * R * c.v;
  qc rv = v2 + R * R * c.v + R * R * v1;
  return {static_cast<double>(boost::multiprecision::abs(ra)), static_cast<double>(boost::multiprecision::abs(rv))};
}

ScaledFields rescale(ScalarField a, VectorField u, double alpha, double nu) {
  if (!(alpha > 0) || !(nu > 0) || !std::isfinite(alpha) || !std::isfinite(nu))
    throw std::invalid_argument("rescale: alpha and nu must be positive");
  double ts = alpha / nu, xs = std::sqrt(alpha) / nu, us = std::sqrt(alpha);
  ScaledFields out;
  out.a = [a, ts, xs](double t, const Vec3& x) { return a(ts * t, {xs * x[0], xs * x[1], xs * x[2]}); };
  out.u = [u, ts, xs, us](double t, const Vec3& x) {
    Vec3 v = u(ts * t, {xs * x[0], xs * x[1], xs * x[2]});
    return Vec3{us * v[0], us * v[1], us * v[2]};
  };
  return out;
}

}  // namespace decaylab
