#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

namespace decaylab {

using cplx = std::complex<double>;
using Vec3 = std::array<double, 3>;
// (a_hat, v_hat) at one frequency
using Pair = std::array<cplx, 2>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double inf = std::numeric_limits<double>::infinity();
// (2 pi)^{-3/2}, the symmetric transform normalisation
inline constexpr double kFourierNorm = 0.063493635934240969;

inline double norm3(const Vec3& v) { return std::hypot(v[0], v[1], v[2]); }

inline double pair_abs2(const Pair& p) { return std::norm(p[0]) + std::norm(p[1]); }

}  // namespace decaylab
