#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <thread>

#include "decaylab/littlewood_paley.hpp"
#include "decaylab/oscillatory_quadrature.hpp"
#include "decaylab/witness_data.hpp"

using namespace decaylab;

namespace {

SpectralState gaussian_state(double c, double scale = 1.0) {
  // e^{-c |scale xi|^2} in the density slot
  return radial_state([c, scale](double r) { return Pair{std::exp(-c * scale * scale * r * r), 0.0}; }, 0.0,
                      std::sqrt(40.0 / c) / scale, {false, true}, "gauss");
}

// smooth bump strictly inside the plateau [1, 1.5] of phi_0 (w = 0.25)
SpectralState plateau_bump() {
  auto f = [](double r) {
    double a = 1.05, b = 1.45;
    if (r <= a || r >= b) return Pair{0.0, 0.0};
    double x = (r - a) / (b - a);
    return Pair{std::exp(-1.0 / (x * (1 - x))), 0.0};
  };
  return radial_state(f, 1.05, 1.45, {false, true}, "plateau-bump");
}

}  // namespace

TEST_CASE("partition of unity across 38 octaves") {
  for (double w : {0.1, 0.25, 0.4}) {
    PartitionProfile lp = build_partition(w);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-19.0, 19.0);
    double worst = 0, vmin = 1, vmax = 0;
    for (int i = 0; i < 10000; ++i) {
      double r = std::exp2(U(rng));
      double s = 0;
      for (int j = -21; j <= 21; ++j) {
        double v = lp.phi(j, r);
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
        s += v;
      }
      worst = std::max(worst, std::abs(s - 1.0));
    }
    CHECK(worst <= 1e-12);
    CHECK(vmin >= 0.0);
    CHECK(vmax <= 1.0);
  }
}

TEST_CASE("plateau, support and scaling of the blocks") {
  PartitionProfile lp(0.25);
  CHECK(lp.phi0(1.0) == 1.0);
  for (int j : {-5, -2, 2, 5}) CHECK(lp.phi(j, 1.0) == 0.0);
  CHECK(lp.phi(3, 3.99) == 0.0);
  CHECK(lp.phi(3, 16.01) == 0.0);
  CHECK(lp.phi(3, 16.0) == 0.0);
  auto [lo, hi] = lp.support(3);
  CHECK(lo >= 4.0);
  CHECK(hi <= 16.0);
  // exact zeros just outside the closed support of every block
  for (int j = -10; j <= 10; ++j) {
    auto [a, b] = lp.support(j);
    CHECK(lp.phi(j, a * (1 - 1e-12)) == 0.0);
    CHECK(lp.phi(j, b * (1 + 1e-12)) == 0.0);
    CHECK(lp.phi(j, std::ldexp(0.7, j)) == lp.phi0(0.7));
  }
  CHECK(lp.low_band(3.0) + lp.high_band(3.0) == 1.0);
  CHECK_THROWS_AS(build_partition(0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_partition(0.5), std::invalid_argument);
  CHECK_THROWS_AS(build_partition(-0.1), std::invalid_argument);
}

TEST_CASE("block_norm p=2 of phi_0 against a trapezoid oracle") {
  PartitionProfile lp(0.25);
  // ||phi_0 * phi_0||_2 since block 0 of f = phi_0 is phi_0^2
  SpectralState f = dyadic_density_data(lp, 0);
  BlockNorm b = block_norm(f, lp, 0, 2.0, 0.0);
  auto [lo, hi] = lp.support(0);
  const int n = 2000000;
  double h = (hi - lo) / n, acc = 0;
  for (int i = 0; i <= n; ++i) {
    double r = lo + i * h;
    double v = lp.phi0(r) * lp.phi0(r);
    acc += (i == 0 || i == n ? 0.5 : 1.0) * v * v * r * r;
  }
  double oracle = std::sqrt(4 * pi * acc * h);
  CHECK(b.converged);
  CHECK(std::abs(b.value - oracle) <= 1e-8 * oracle);
}

TEST_CASE("disjoint supports give a zero block") {
  PartitionProfile lp(0.25);
  auto f = radial_state([](double r) { return Pair{r < 0.25 ? 1.0 : 0.0, 0.0}; }, 0.0, 0.25, {false, true}, "lo");
  CHECK(block_norm(f, lp, 3, 2.0, 0.0).value == 0.0);
  CHECK(block_norm(f, lp, 3, inf, 0.0).value == 0.0);
}

TEST_CASE("Plancherel on a Gaussian") {
  // ||f||_2^2 = int e^{-|xi|^2/2} dxi = (2 pi)^{3/2}
  SpectralIntegral r = l2_norm(gaussian_state(0.25), default_norm_options());
  double exact = std::pow(2 * pi, 0.75);
  CHECK(std::abs(r.value - exact) <= 1e-8 * exact);
}

TEST_CASE("scaling law for block L2 norms") {
  PartitionProfile lp(0.25);
  SpectralState f = gaussian_state(0.25);
  for (int k = -2; k <= 2; ++k) {
    SpectralState fl = gaussian_state(0.25, std::exp2(k));
    for (int j : {-3, 0, 1}) {
      double lhs = block_norm(fl, lp, j, 2.0, 0.0).value;
      double rhs = std::exp2(-1.5 * k) * block_norm(f, lp, j + k, 2.0, 0.0).value;
      CHECK(std::abs(lhs - rhs) <= 1e-8 * rhs);
    }
  }
}

TEST_CASE("blocks of a Gaussian add up to its value at the origin") {
  PartitionProfile lp(0.25);
  SpectralState f = gaussian_state(0.25);
  double sum = 0, sup_sum = 0;
  for (int j = -30; j <= 5; ++j) {
    SpectralState loc = localize(f, lp, j);
    if (loc.zero) continue;
    sum += transform_on_axis(loc, 0.0).value[0].real();
    sup_sum += block_norm(f, lp, j, inf, 0.0).value;
  }
  double exact = std::pow(2.0, 1.5);
  CHECK(std::abs(sum - exact) <= 1e-8 * exact);
  CHECK(sup_sum >= exact * (1 - 1e-8));
}

TEST_CASE("besov norm: single block, truncation certificate, band split") {
  PartitionProfile lp(0.25);
  SpectralState g = plateau_bump();
  for (double q : {1.0, 2.0, inf}) {
    BesovSpec sp{0.7, 2.0, q, Band::Full};
    BesovResult r = besov_norm(g, lp, sp, -4, 4);
    CHECK(r.value == doctest::Approx(block_norm(g, lp, 0, 2.0, 0.0).value).epsilon(1e-14));
  }

  SpectralState f = gaussian_state(0.25);
  BesovSpec sp{0.0, 2.0, 1.0, Band::Full};
  BesovResult ref = besov_norm(f, lp, sp, -30, 10);
  CHECK(ref.blocks.front().second.value < 1e-12 * ref.value);
  CHECK(ref.blocks.back().second.value < 1e-12 * ref.value);
  BesovResult aut = besov_norm_auto(f, lp, sp);
  CHECK(aut.certified);
  CHECK(std::abs(aut.value - ref.value) <= 1e-6 * ref.value);

  // widening never decreases a q < inf norm
  double prev = 0;
  for (int w = 0; w <= 6; ++w) {
    double v = besov_norm(f, lp, sp, -2 - w, 1 + w).value;
    CHECK(v >= prev);
    prev = v;
  }

  BesovSpec full{0.5, 2.0, 2.0, Band::Full}, high{0.5, 2.0, 2.0, Band::High}, low{0.5, 2.0, 2.0, Band::Low};
  double F = besov_norm(f, lp, full, -30, 10).value;
  double H = besov_norm(f, lp, high, -30, 10).value;
  double L = besov_norm(f, lp, low, -30, 10).value;
  CHECK(std::abs(F * F - H * H - L * L) <= 1e-12 * F * F);
  CHECK(besov_norm(f, lp, high, -30, 10).j_min == 3);
  CHECK(besov_norm(f, lp, low, -30, 10).j_max == 2);

  CHECK_THROWS_AS(besov_norm(f, lp, BesovSpec{0, 0.5, 1, Band::Full}, -3, 3), std::invalid_argument);
  CHECK_THROWS_AS(besov_norm(f, lp, sp, 3, -3), std::invalid_argument);
  CHECK_THROWS_AS(besov_norm(f, lp, low, 5, 10), std::invalid_argument);
}

TEST_CASE("intermediate p is an interpolation bound") {
  PartitionProfile lp(0.25);
  SpectralState f = gaussian_state(0.25);
  BlockNorm b4 = block_norm(f, lp, 0, 4.0, 0.0);
  BlockNorm b2 = block_norm(f, lp, 0, 2.0, 0.0);
  BlockNorm bi = block_norm(f, lp, 0, inf, 0.0);
  CHECK(b4.upper_bound_only);
  CHECK_FALSE(b2.upper_bound_only);
  CHECK(b4.value == doctest::Approx(std::sqrt(b2.value * bi.value)).epsilon(1e-14));
  CHECK(bi.value <= bi.upper_bound * (1 + 1e-9));
}

TEST_CASE("block cache is shared safely between threads") {
  BlockCache cache;
  std::vector<std::thread> ts;
  for (int k = 0; k < 4; ++k)
    ts.emplace_back([&cache, k] {
      for (int j = 0; j < 100; ++j) {
        BlockNorm b;
        b.value = j;
        cache.insert(7, j, 2.0 + k, b);
      }
    });
  for (auto& t : ts) t.join();
  CHECK(cache.size() == 400);
  BlockNorm out;
  CHECK(cache.find(7, 42, 3.0, out));
  CHECK(out.value == 42.0);
  CHECK_FALSE(cache.find(8, 42, 3.0, out));
}
