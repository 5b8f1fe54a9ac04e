#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "decaylab/eigensystem.hpp"
#include "decaylab/oscillatory_quadrature.hpp"
#include "decaylab/witness_data.hpp"

using namespace decaylab;

TEST_CASE("bump: evenness, support, sign, normalisation") {
  BumpPsi psi = make_psi(0.02);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1.1, 1.1);
  int inside = 0;
  double vmax = 0;
  for (int i = 0; i < 20000; ++i) {
    Vec3 x{U(rng), U(rng), U(rng)};
    double v = psi(x);
    REQUIRE(v == psi(Vec3{-x[0], -x[1], -x[2]}));
    REQUIRE(v >= 0.0);
    if (v > 0) {
      ++inside;
      double n = norm3(x);
      REQUIRE(n > 0.5);
      REQUIRE(n < 1.0);
      REQUIRE(std::abs(x[0]) >= 0.5);
    }
    vmax = std::max(vmax, v);
  }
  CHECK(inside > 0);
  CHECK(vmax <= 1.0 + 1e-12);
  CHECK(vmax > 0.9);

  BumpPsi p1 = make_psi(0.01);
  CHECK(p1(Vec3{0.9, 0.5, 0.0}) == 0.0);
  CHECK(psi_integral(psi) > 0.0);
  CHECK_THROWS_AS(make_psi(0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_psi(0.1), std::invalid_argument);
  CHECK_THROWS_AS(make_psi(-0.05), std::invalid_argument);
}

TEST_CASE("anisotropic scaling round trip") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> N;
  for (double t : {0.3, 16.0, 1e4}) {
    AnisotropicScaling s{t};
    for (int i = 0; i < 100; ++i) {
      Vec3 x{N(rng), N(rng), N(rng)};
      Vec3 y = s.inverse(s.forward(x));
      for (int k = 0; k < 3; ++k) CHECK(std::abs(y[k] - x[k]) <= 1e-15 * std::max(1.0, std::abs(x[k])));
    }
  }
}

TEST_CASE("scaled multiplier: support and change of variables") {
  BumpPsi psi = make_psi(0.02);
  CHECK(scaled_psi_support_radius(psi, 100.0) <= 0.1 * std::sqrt(2.0));
  CHECK(scaled_psi_low_frequency(psi, 100.0));
  CHECK(scaled_psi_low_frequency(psi, 5.0));
  CHECK_FALSE(scaled_psi_low_frequency(psi, 1.0));

  double t = 16;
  AxisymmetricIntegrand m = scaled_psi_multiplier(psi, t);
  // the transform at the origin is (2 pi)^{-3/2} times the integral
  quad::Options o{1e-12, 0.0, pi / 4, 400000};
  double integral = inverse_ft_axis(m, 0.0, o).value.real() / kFourierNorm;
  double expect = psi_integral(psi) / (t * t);
  CHECK(std::abs(integral - expect) <= 1e-10 * expect);

  // samples of the multiplier stay inside the declared support box
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double R = scaled_psi_support_radius(psi, t);
  for (int i = 0; i < 5000; ++i) {
    double a = 0.3 * U(rng), r = 0.3 * std::abs(U(rng));
    if (m.g(a, r) != cplx(0.0)) {
      REQUIRE(std::hypot(a, r) <= R);
      REQUIRE(std::abs(a) <= m.xi1_hi);
      REQUIRE(r <= m.r_hi);
    }
  }
  CHECK_THROWS_AS(scaled_psi_multiplier(psi, 0.0), std::invalid_argument);
}

TEST_CASE("physical L1 norm of the scaled bump does not depend on t") {
  BumpPsi psi = make_psi(0.02);
  L1Estimate a = scaled_psi_physical_l1(psi, 16.0), b = scaled_psi_physical_l1(psi, 256.0);
  CHECK(a.value > 0);
  CHECK(std::abs(a.value - b.value) <= 1e-6 * a.value);
  // the grid is laid out in scaled units, so also try a different frequency rule at t = 256
  L1Estimate d = scaled_psi_physical_l1(psi, 256.0, 224);
  CHECK(std::abs(a.value - d.value) <= 1e-6 * a.value);
  // a larger box adds less than the outer-shell estimate
  L1Estimate c = scaled_psi_physical_l1(psi, 16.0, 256, 2560, 320.0);
  CHECK(c.value >= a.value);
  CHECK(c.value - a.value <= a.tail);
  CHECK(a.tail <= 1e-2 * a.value);
}

TEST_CASE("Gaussian velocity data") {
  // F[e^{-x^2}](xi) in 1D, symmetric convention, against 2^{-1/2} e^{-xi^2/4}
  for (double xi : {0.0, 0.5, 1.3, 3.0}) {
    auto f = [xi](double x) { return std::exp(-x * x) * std::cos(x * xi); };
    quad::Options o{1e-14, 0.0, pi / 4, 100000};
    double v = quad::integrate_1d(f, -12.0, 12.0, o).value.real() / std::sqrt(2 * pi);
    CHECK(std::abs(v - std::exp(-xi * xi / 4) / std::sqrt(2.0)) <= 1e-10);
  }

  GaussianConstants c;
  CHECK(c.c1 == doctest::Approx(std::pow(2.0, -1.5)).epsilon(1e-15));
  CHECK(c.c2 == 0.25);
  SpectralState v0 = gaussian_v0(c);
  std::mt19937_64 rng(13);
  std::normal_distribution<double> N(0.0, 2.0);
  for (int i = 0; i < 1000; ++i) {
    Vec3 x{N(rng), N(rng), N(rng)};
    Pair p = v0.at(x), q = v0.at(Vec3{-x[0], -x[1], -x[2]});
    REQUIRE(p[0] == cplx(0.0));
    REQUIRE(p[1] == -q[1]);
    double n = norm3(x);
    REQUIRE(std::abs(p[1]) <= c.c1 * std::sqrt(3.0) * std::exp(-n * n / 4) * (1 + 1e-15));
    cplx expect(0.0, c.c1 * (x[0] + x[1] + x[2]) * std::exp(-n * n / 4) / n);
    REQUIRE(std::abs(p[1] - expect) <= 1e-15 * std::abs(expect) + 1e-300);
  }
  // only the xi1 term survives the mean about the axis
  for (double a : {-1.0, 0.2, 2.0})
    for (double r : {0.1, 1.0}) {
      cplx mean{};
      const int n = 64;
      for (int k = 0; k < n; ++k) {
        double th = 2 * pi * k / n;
        mean += v0.at(Vec3{a, r * std::cos(th), r * std::sin(th)})[1];
      }
      mean /= double(n);
      CHECK(std::abs(mean - v0.axis_mean(a, r)[1]) <= 1e-15);
    }
}

TEST_CASE("witness states") {
  BumpPsi psi = make_psi(0.02);
  double t = 100;
  SpectralState w = psi_witness_state(psi, t);
  Vec3 x{0.07, 0.004, 0.001};
  cplx lam = eigenvalues(norm3(x)).lambda_plus;
  double p = psi(AnisotropicScaling{t}.forward({std::sqrt(t) * x[0], std::sqrt(t) * x[1], std::sqrt(t) * x[2]}));
  CHECK(p > 0);
  CHECK(std::abs(w.at(x)[0] - p * std::exp(t * lam)) <= 1e-15);
  CHECK(w.at(x)[1] == cplx(0.0));

  SpectralState h = heat_state(2.0);
  CHECK(h.at({0.3, 0.4, 0.0})[0].real() == doctest::Approx(std::exp(-0.25)).epsilon(1e-15));

  PartitionProfile lp(0.25);
  SpectralState b = dyadic_block_data(lp, 3);
  CHECK(b.at({5.0, 0, 0})[0] == b.at({5.0, 0, 0})[1]);
  CHECK(b.at({3.9, 0, 0})[0] == cplx(0.0));

  SpectralState k1 = dyadic_kernel_state(lp, -2, 50.0, 1), k2 = dyadic_kernel_state(lp, -2, 50.0, -1);
  cplx a = k1.at({0.3, 0, 0})[0], c = k2.at({0.3, 0, 0})[0];
  CHECK(std::abs(a - std::conj(c)) <= 1e-15 * std::abs(a));
  CHECK_THROWS_AS(dyadic_kernel_state(lp, -2, 50.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(heat_state(0.0), std::invalid_argument);
}

TEST_CASE("cosine form of the localised Gaussian solution") {
  BumpPsi psi = make_psi(0.02);
  for (double t : {100.0, 1000.0}) {
    TransformResult a = gaussian_cosine_form(psi, t), b = gaussian_psi_localised_direct(psi, t);
    CHECK(a.converged);
    CHECK(b.converged);
    CHECK(std::abs(a.value - b.value) <= 1e-8 * std::abs(b.value));
    CHECK(std::abs(a.value) > 0);
  }
}
