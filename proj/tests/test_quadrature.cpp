#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "decaylab/quadrature.hpp"

using namespace decaylab;

TEST_CASE("gauss-legendre 15 integrates degree 29 exactly") {
  const auto& r = quad::gl15();
  REQUIRE(r.x.size() == 15);
  double s0 = 0, s28 = 0;
  for (std::size_t i = 0; i < r.x.size(); ++i) {
    s0 += r.w[i];
    s28 += r.w[i] * std::pow(r.x[i], 28);
  }
  CHECK(s0 == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(s28 == doctest::Approx(2.0 / 29.0).epsilon(1e-14));
  auto r7 = quad::gauss_legendre(7);
  double s12 = 0;
  for (std::size_t i = 0; i < 7; ++i) s12 += r7.w[i] * std::pow(r7.x[i], 12);
  CHECK(s12 == doctest::Approx(2.0 / 13.0).epsilon(1e-14));
}

TEST_CASE("pairwise sum is order independent for exact data") {
  std::vector<double> v(1000, 0.1);
  CHECK(quad::pairwise_sum(v) == doctest::Approx(100.0).epsilon(1e-14));
}

TEST_CASE("adaptive 1d on smooth and oscillatory integrands") {
  auto g = quad::integrate_1d([](double x) { return std::exp(-x * x); }, -10.0, 10.0);
  CHECK(g.converged);
  CHECK(std::abs(g.value.real() - std::sqrt(pi)) < 1e-12);

  // int_0^1 e^{i 200 x} dx = (e^{200 i} - 1) / (200 i)
  double w = 200.0;
  quad::Options o;
  auto r = quad::integrate_1d([w](double x) { return std::exp(cplx(0, w * x)); }, 0.0, 1.0, o,
                              [w](double x) { return w * x; });
  cplx exact = (std::exp(cplx(0, w)) - 1.0) / cplx(0, w);
  CHECK(r.converged);
  CHECK(std::abs(r.value - exact) < 1e-13);
  CHECK(r.cells >= static_cast<std::size_t>(w / (pi / 4)));

  // sqrt singularity at the end point
  auto s = quad::integrate_1d([](double x) { return std::sqrt(x); }, 0.0, 1.0);
  CHECK(std::abs(s.value.real() - 2.0 / 3.0) < 1e-10);
}

TEST_CASE("adaptive 2d gaussian and skipped cells") {
  quad::Options o;
  auto r = quad::integrate_2d([](double x, double y) { return std::exp(-x * x - y * y); },
                              {-8, 8, -8, 8}, o);
  CHECK(r.converged);
  CHECK(std::abs(r.value.real() - pi) < 1e-11);

  // integrand zero outside the unit disc; skip predicate drops far cells
  auto disc = [](double x, double y) { return x * x + y * y < 1 ? 1.0 - (x * x + y * y) : 0.0; };
  std::function<bool(const quad::Box&)> skip = [](const quad::Box& b) { return b.x0 >= 1.0 || b.y0 >= 1.0; };
  auto d = quad::integrate_2d(disc, {0, 4, 0, 4}, o, quad::NoPhase{}, skip);
  // quarter of int (1 - r^2) over the disc = pi/8
  CHECK(std::abs(d.value.real() - pi / 8) < 1e-7);
}

TEST_CASE("2d phase sizing") {
  double w = 60.0;
  quad::Options o;
  auto r = quad::integrate_2d([w](double x, double y) { return std::exp(cplx(0, w * (x + y))); },
                              {0, 1, 0, 1}, o, [w](double x, double y) { return w * (x + y); });
  cplx one = (std::exp(cplx(0, w)) - 1.0) / cplx(0, w);
  CHECK(std::abs(r.value - one * one) < 1e-13);
}
