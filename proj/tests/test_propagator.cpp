#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "decaylab/propagator.hpp"
#include "decaylab/witness_data.hpp"

using namespace decaylab;

namespace {

SpectralState constant_state(cplx a, cplx v) {
  return radial_state([a, v](double) { return Pair{a, v}; }, 0.0, 20.0, {a == 0.0, v == 0.0}, "const");
}

double slope(double h1, double r1, double h2, double r2) { return std::log(r1 / r2) / std::log(h1 / h2); }

}  // namespace

TEST_CASE("evolve: identity at t = 0 and pointwise agreement with the oracle") {
  SpectralState s = constant_state(cplx(1.0, 0.5), cplx(-0.3, 2.0));
  EvolvedState e0 = evolve(s, 0.0);
  for (double r : {0.0, 0.7, 2.0, 5.0}) CHECK(e0.at({r, 0, 0}) == s.at({r, 0, 0}));

  SpectralState v = constant_state(0.0, 1.0);
  for (double t : {0.5, 3.0, 12.0}) {
    Pair got = evolve(v, t).at({4.0, 0, 0});
    Pair ref = expm_oracle(4.0, t).apply({0.0, 1.0});
    CHECK(std::abs(got[1] - ref[1]) <= 1e-12 * std::abs(ref[1]));
    CHECK(std::abs(got[0] - ref[0]) <= 1e-12 * std::abs(ref[0]));
  }
  // lambda_-(4) ~ -1.0718 sets the rate
  double lm = eigenvalues(4.0).lambda_minus.real();
  CHECK(lm == doctest::Approx(-1.0718).epsilon(1e-4));
  double r1 = std::abs(evolve(v, 20.0).at({4.0, 0, 0})[1]) / std::exp(20.0 * lm);
  double r2 = std::abs(evolve(v, 30.0).at({4.0, 0, 0})[1]) / std::exp(30.0 * lm);
  CHECK(r1 == doctest::Approx(r2).epsilon(1e-10));

  // energy at rho = 1, t = 1 from (1, 0) equals the oracle's first column
  Pair p = evolve(constant_state(1.0, 0.0), 1.0).at({0.0, 1.0, 0.0});
  PropagatorMatrix g = expm_oracle(1.0, 1.0);
  CHECK(pair_abs2(p) == doctest::Approx(std::norm(g.g_aa) + std::norm(g.g_va)).epsilon(1e-13));

  CHECK_THROWS_AS(evolve(s, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(evolve(s, NAN), std::invalid_argument);
}

TEST_CASE("evolve keeps the zonal reduction and the support") {
  SpectralState g = gaussian_v0();
  EvolvedState e = evolve(g, 2.0);
  REQUIRE(e.axis_zonal.size() == 1);
  CHECK(e.axis_zonal[0].ell == 1);
  Pair z = e.axis_zonal[0].radial(0.8);
  Pair d = propagator(0.8, 2.0).apply(g.axis_zonal[0].radial(0.8));
  CHECK(z == d);
  CHECK(e.rho_max == g.rho_max);
  CHECK(std::isinf(e.rho_cut));
}

TEST_CASE("effective support cut") {
  CHECK(std::isinf(propagator_cutoff(10.0)));
  for (double t : {100.0, 1e3, 1e4}) {
    double rc = propagator_cutoff(t);
    REQUIRE(rc < 2);
    CHECK(propagator(rc, t).max_abs() <= 1e-19);
    CHECK(propagator(2.5, t).max_abs() <= 1e-19);
  }
  // bulk inside the cut: trimmed; bulk beyond half of it: left alone
  EvolvedState a = evolve(heat_state(1.0), 1e3);
  CHECK(a.rho_cut == propagator_cutoff(1e3));
  PartitionProfile lp(0.25);
  EvolvedState b = evolve(dyadic_block_data(lp, 1), 1e3);
  CHECK(std::isinf(b.rho_cut));
  CHECK_FALSE(b.zero);
}

TEST_CASE("dissipation identity: second-order residual") {
  SpectralState s = constant_state(1.0, 0.0);
  CHECK(energy_flux_residual(s, 0.0, 1.0, 1e-4) == 0.0);
  CHECK(energy_flux_residual(s, 1.0, 1.0, 1e-4) <= 1e-7);
  CHECK(energy_flux_residual(s, 2.0, 0.5, 1e-4) <= 1e-7);
  SpectralState g = constant_state(1.0, 1.0);
  for (double rho : {0.5, 1.0, 2.0, 3.0}) {
    double a = energy_flux_residual(g, rho, 1.0, 1e-3), b = energy_flux_residual(g, rho, 1.0, 1e-4);
    CHECK(slope(1e-3, a, 1e-4, b) == doctest::Approx(2.0).epsilon(0.05));
  }
  CHECK_THROWS_AS(energy_flux_residual(s, 1.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(energy_flux_residual(s, 1.0, 1e-5, 1e-4), std::invalid_argument);
  CHECK(default_fd_step(0.5) == 1e-4);
  CHECK(default_fd_step(30.0) == doctest::Approx(3e-3));
}

TEST_CASE("wave forms: second-order residuals") {
  SpectralState g = constant_state(1.0, 1.0);
  auto z = wave_residuals(g, 0.0, 2.0, 1e-3);
  CHECK(z.first == 0.0);
  CHECK(z.second == 0.0);
  for (auto [rho, t] : {std::pair{1.0, 2.0}, std::pair{3.0, 1.0}}) {
    auto a = wave_residuals(g, rho, t, 1e-3), b = wave_residuals(g, rho, t, 5e-4);
    if (rho == 1.0) {
      CHECK(a.first <= 1e-5);
      CHECK(a.second <= 1e-5);
    }
    CHECK(a.first / b.first == doctest::Approx(4.0).epsilon(0.02));
    CHECK(a.second / b.second == doctest::Approx(4.0).epsilon(0.02));
  }
  CHECK_THROWS_AS(wave_residuals(g, 1.0, 1.0, -1e-3), std::invalid_argument);
}

TEST_CASE("spectral energy never grows") {
  for (double rho = 0.05; rho < 6; rho += 0.25) {
    double prev = inf;
    for (double t = 0; t <= 20; t += 0.5) {
      double e = pair_abs2(propagator(rho, t).apply({cplx(0.3, -1.0), cplx(0.8, 0.2)}));
      REQUIRE(e <= prev * (1 + 1e-13));
      prev = e;
    }
  }
}

TEST_CASE("Hermitian symmetry survives evolution") {
  SpectralState v0 = gaussian_v0();
  EvolvedState e = evolve(v0, 3.7);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> N(0.0, 1.5);
  for (int i = 0; i < 500; ++i) {
    Vec3 x{N(rng), N(rng), N(rng)};
    Pair p = e.at(x), q = e.at({-x[0], -x[1], -x[2]});
    for (int k = 0; k < 2; ++k) REQUIRE(std::abs(p[k] - std::conj(q[k])) <= 1e-12 * std::max(1e-300, std::abs(p[k])));
  }
}

TEST_CASE("no singularity at the double eigenvalue") {
  for (double t : {0.1, 1.0, 5.0}) {
    PropagatorMatrix c = propagator(2.0, t);
    for (double d : {-1e-8, 1e-8}) CHECK(max_relative_error(propagator(2.0 + d, t), c) <= 1e-6);
  }
}

TEST_CASE("rescaling of fields") {
  ScalarField a = [](double t, const Vec3& x) { return std::exp(-t) * std::sin(x[0] + 2 * x[1] - x[2]); };
  VectorField u = [](double t, const Vec3& x) { return Vec3{t * x[0], std::cos(x[1]), x[2] * x[2] - t}; };

  ScaledFields id = rescale(a, u, 1.0, 1.0);
  CHECK(id.a(0.3, {1, 2, 3}) == a(0.3, {1, 2, 3}));

  ScaledFields f = rescale(a, u, 2.0, 3.0);
  ScaledFields back = rescale(f.a, f.u, 0.5, 1.0 / 3.0);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    double t = std::abs(U(rng));
    Vec3 x{U(rng), U(rng), U(rng)};
    CHECK(std::abs(back.a(t, x) - a(t, x)) <= 1e-12);
    Vec3 p = back.u(t, x), q = u(t, x);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(p[k] - q[k]) <= 1e-12 * std::max(1.0, std::abs(q[k])));
  }
  // time argument: t = 3 samples the original at alpha t / nu = 2
  ScalarField probe = [](double t, const Vec3&) { return t; };
  CHECK(rescale(probe, u, 2.0, 3.0).a(3.0, {0, 0, 0}) == doctest::Approx(2.0).epsilon(1e-15));

  CHECK_THROWS_AS(rescale(a, u, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(rescale(a, u, 1.0, -2.0), std::invalid_argument);
}
