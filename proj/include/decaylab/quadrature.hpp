#pragma once

// Adaptive Gauss-Legendre machinery shared by the norm and transform code.
// Cells are first cut so the declared phase varies by at most
// phase_per_cell across each one, then refined globally by bisection
// (error = |Q(cell) - Q(halves)|) until the error budget is met.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <queue>
#include <type_traits>
#include <vector>

#include "decaylab/types.hpp"

namespace decaylab::quad {

struct Rule {
  std::vector<double> x;  // nodes on [-1, 1]
  std::vector<double> w;
};

Rule gauss_legendre(int n);
const Rule& gl15();

struct Options {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  double phase_per_cell = pi / 4;
  std::size_t max_cells = 400000;
};

struct Result {
  cplx value{};
  double error = 0.0;
  double magnitude = 0.0;  // estimate of the integral of |f|
  bool converged = true;
  std::size_t cells = 0;
  std::size_t evaluations = 0;
};

// Tree summation so the result does not depend on how cells were produced.
template <class T>
T pairwise_sum(const T* p, std::size_t n) {
  if (n == 0) return T{};
  if (n <= 8) {
    T s = p[0];
    for (std::size_t i = 1; i < n; ++i) s += p[i];
    return s;
  }
  std::size_t h = n / 2;
  return pairwise_sum(p, h) + pairwise_sum(p + h, n - h);
}

template <class T>
T pairwise_sum(const std::vector<T>& v) {
  return pairwise_sum(v.data(), v.size());
}

struct NoPhase {};

namespace detail {

inline double tolerance(const Options& o, cplx total, double mag) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  return std::max({o.abs_tol, o.rel_tol * std::abs(total), 64 * eps * mag});
}

struct Sum {
  cplx v{};
  double m = 0.0;
};

template <class F>
Sum gl_1d(F& f, double a, double b) {
  const Rule& r = gl15();
  double c = 0.5 * (a + b), h = 0.5 * (b - a);
  Sum s;
  for (std::size_t i = 0; i < r.x.size(); ++i) {
    cplx v = cplx(f(c + h * r.x[i]));
    s.v += r.w[i] * v;
    s.m += r.w[i] * std::abs(v);
  }
  s.v *= h;
  s.m *= std::abs(h);
  return s;
}

template <class F>
Sum gl_2d(F& f, double x0, double x1, double y0, double y1) {
  const Rule& r = gl15();
  const std::size_t n = r.x.size();
  double cx = 0.5 * (x0 + x1), hx = 0.5 * (x1 - x0);
  double cy = 0.5 * (y0 + y1), hy = 0.5 * (y1 - y0);
  Sum s;
  for (std::size_t i = 0; i < n; ++i) {
    double x = cx + hx * r.x[i];
    cplx row{};
    double rowm = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      cplx v = cplx(f(x, cy + hy * r.x[k]));
      row += r.w[k] * v;
      rowm += r.w[k] * std::abs(v);
    }
    s.v += r.w[i] * row;
    s.m += r.w[i] * rowm;
  }
  s.v *= hx * hy;
  s.m *= std::abs(hx * hy);
  return s;
}

}  // namespace detail

// f(x) -> double or complex; phase(x) -> double (unwrapped), or NoPhase.
template <class F, class P = NoPhase>
Result integrate_1d(F&& f, double a, double b, const Options& opt = {}, P&& phase = P{}) {
  Result res;
  if (!(b > a)) return res;

  struct Cell {
    double a, b;
    detail::Sum l, r;
    double err;
    bool frozen;
  };
  std::vector<Cell> cells;

  // phase-driven initial cut
  std::vector<std::pair<double, double>> init;
  {
    std::vector<std::pair<std::pair<double, double>, int>> stack{{{a, b}, 0}};
    while (!stack.empty()) {
      auto [seg, depth] = stack.back();
      stack.pop_back();
      bool split = false;
      if constexpr (!std::is_same_v<std::decay_t<P>, NoPhase>) {
        double lo = inf, hi = -inf;
        for (int i = 0; i <= 4; ++i) {
          double p = phase(seg.first + (seg.second - seg.first) * i / 4.0);
          lo = std::min(lo, p);
          hi = std::max(hi, p);
        }
        split = (hi - lo) > opt.phase_per_cell && depth < 48;
      }
      if (split) {
        double m = 0.5 * (seg.first + seg.second);
        stack.push_back({{m, seg.second}, depth + 1});
        stack.push_back({{seg.first, m}, depth + 1});
      } else {
        init.push_back(seg);
      }
    }
  }

  auto make = [&](double ca, double cb, const detail::Sum& whole) {
    double m = 0.5 * (ca + cb);
    Cell c{ca, cb, detail::gl_1d(f, ca, m), detail::gl_1d(f, m, cb), 0.0, false};
    res.evaluations += 30;
    c.err = std::abs(whole.v - (c.l.v + c.r.v));
    double w = std::max(std::abs(ca), std::abs(cb));
    c.frozen = (cb - ca) <= 1e-13 * std::max(w, 1e-300);
    return c;
  };

  cplx total{};
  double terr = 0.0, tmag = 0.0;
  for (auto [ca, cb] : init) {
    detail::Sum whole = detail::gl_1d(f, ca, cb);
    res.evaluations += 15;
    cells.push_back(make(ca, cb, whole));
    total += cells.back().l.v + cells.back().r.v;
    terr += cells.back().err;
    tmag += cells.back().l.m + cells.back().r.m;
  }

  auto worse = [&](std::size_t i, std::size_t k) {
    if (cells[i].err != cells[k].err) return cells[i].err < cells[k].err;
    return cells[i].a > cells[k].a;
  };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(worse)> pq(worse);
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (!cells[i].frozen) pq.push(i);

  while (terr > detail::tolerance(opt, total, tmag) && !pq.empty()) {
    if (cells.size() >= opt.max_cells) break;
    std::size_t i = pq.top();
    pq.pop();
    Cell c = cells[i];
    double m = 0.5 * (c.a + c.b);
    Cell left = make(c.a, m, c.l);
    Cell right = make(m, c.b, c.r);
    total += (left.l.v + left.r.v + right.l.v + right.r.v) - (c.l.v + c.r.v);
    terr += left.err + right.err - c.err;
    tmag += (left.l.m + left.r.m + right.l.m + right.r.m) - (c.l.m + c.r.m);
    cells[i] = left;
    cells.push_back(right);
    if (!left.frozen) pq.push(i);
    if (!right.frozen) pq.push(cells.size() - 1);
  }

  std::sort(cells.begin(), cells.end(), [](const Cell& x, const Cell& y) { return x.a < y.a; });
  std::vector<cplx> vals;
  std::vector<double> errs, mags;
  vals.reserve(cells.size());
  for (const auto& c : cells) {
    vals.push_back(c.l.v + c.r.v);
    errs.push_back(c.err);
    mags.push_back(c.l.m + c.r.m);
  }
  res.value = pairwise_sum(vals);
  res.error = pairwise_sum(errs);
  res.magnitude = pairwise_sum(mags);
  res.cells = cells.size();
  res.converged = res.error <= detail::tolerance(opt, res.value, res.magnitude);
  return res;
}

struct Box {
  double x0, x1, y0, y1;
};

// f(x, y) -> double or complex over a rectangle.  phase(x, y) sizes the
// initial cells; skip(box) may declare a cell identically zero.
template <class F, class P = NoPhase>
Result integrate_2d(F&& f, Box dom, const Options& opt = {}, P&& phase = P{},
                    const std::function<bool(const Box&)>& skip = {}) {
  Result res;
  if (!(dom.x1 > dom.x0) || !(dom.y1 > dom.y0)) return res;

  std::vector<Box> init;
  {
    std::vector<std::pair<Box, int>> stack{{dom, 0}};
    while (!stack.empty()) {
      auto [b, depth] = stack.back();
      stack.pop_back();
      if (skip && skip(b)) continue;
      int dir = -1;
      if constexpr (!std::is_same_v<std::decay_t<P>, NoPhase>) {
        double ph[5][5];
        for (int i = 0; i < 5; ++i)
          for (int k = 0; k < 5; ++k)
            ph[i][k] = phase(b.x0 + (b.x1 - b.x0) * i / 4.0, b.y0 + (b.y1 - b.y0) * k / 4.0);
        double sx = 0.0, sy = 0.0;
        for (int k = 0; k < 5; ++k) {
          double lo = inf, hi = -inf;
          for (int i = 0; i < 5; ++i) {
            lo = std::min(lo, ph[i][k]);
            hi = std::max(hi, ph[i][k]);
          }
          sx = std::max(sx, hi - lo);
        }
        for (int i = 0; i < 5; ++i) {
          double lo = inf, hi = -inf;
          for (int k = 0; k < 5; ++k) {
            lo = std::min(lo, ph[i][k]);
            hi = std::max(hi, ph[i][k]);
          }
          sy = std::max(sy, hi - lo);
        }
        if (sx + sy > opt.phase_per_cell && depth < 60) dir = sx >= sy ? 0 : 1;
      }
      if (dir == 0) {
        double m = 0.5 * (b.x0 + b.x1);
        stack.push_back({{m, b.x1, b.y0, b.y1}, depth + 1});
        stack.push_back({{b.x0, m, b.y0, b.y1}, depth + 1});
      } else if (dir == 1) {
        double m = 0.5 * (b.y0 + b.y1);
        stack.push_back({{b.x0, b.x1, m, b.y1}, depth + 1});
        stack.push_back({{b.x0, b.x1, b.y0, m}, depth + 1});
      } else {
        init.push_back(b);
      }
    }
  }

  struct Cell {
    Box b;
    detail::Sum xl, xr, yl, yr;
    double ex, ey;
    bool frozen;
  };
  std::vector<Cell> cells;
  cells.reserve(init.size() * 2);

  auto make = [&](const Box& b, const detail::Sum& whole) {
    double mx = 0.5 * (b.x0 + b.x1), my = 0.5 * (b.y0 + b.y1);
    Cell c{b,
           detail::gl_2d(f, b.x0, mx, b.y0, b.y1),
           detail::gl_2d(f, mx, b.x1, b.y0, b.y1),
           detail::gl_2d(f, b.x0, b.x1, b.y0, my),
           detail::gl_2d(f, b.x0, b.x1, my, b.y1),
           0.0,
           0.0,
           false};
    res.evaluations += 900;
    c.ex = std::abs(whole.v - (c.xl.v + c.xr.v));
    c.ey = std::abs(whole.v - (c.yl.v + c.yr.v));
    double sc = std::max({std::abs(b.x0), std::abs(b.x1), std::abs(b.y0), std::abs(b.y1), 1e-300});
    c.frozen = (b.x1 - b.x0) <= 1e-12 * sc && (b.y1 - b.y0) <= 1e-12 * sc;
    return c;
  };
  auto value = [](const Cell& c) { return c.ex >= c.ey ? c.xl.v + c.xr.v : c.yl.v + c.yr.v; };
  auto mag = [](const Cell& c) { return c.ex >= c.ey ? c.xl.m + c.xr.m : c.yl.m + c.yr.m; };
  auto err = [](const Cell& c) { return c.ex + c.ey; };

  cplx total{};
  double terr = 0.0, tmag = 0.0;
  for (const Box& b : init) {
    detail::Sum whole = detail::gl_2d(f, b.x0, b.x1, b.y0, b.y1);
    res.evaluations += 225;
    cells.push_back(make(b, whole));
    total += value(cells.back());
    terr += err(cells.back());
    tmag += mag(cells.back());
  }

  auto worse = [&](std::size_t i, std::size_t k) {
    double ei = err(cells[i]), ek = err(cells[k]);
    if (ei != ek) return ei < ek;
    if (cells[i].b.x0 != cells[k].b.x0) return cells[i].b.x0 > cells[k].b.x0;
    return cells[i].b.y0 > cells[k].b.y0;
  };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(worse)> pq(worse);
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (!cells[i].frozen) pq.push(i);

  while (terr > detail::tolerance(opt, total, tmag) && !pq.empty()) {
    if (cells.size() >= opt.max_cells) break;
    std::size_t i = pq.top();
    pq.pop();
    Cell c = cells[i];
    Cell lo, hi;
    if (c.ex >= c.ey) {
      double m = 0.5 * (c.b.x0 + c.b.x1);
      lo = make({c.b.x0, m, c.b.y0, c.b.y1}, c.xl);
      hi = make({m, c.b.x1, c.b.y0, c.b.y1}, c.xr);
    } else {
      double m = 0.5 * (c.b.y0 + c.b.y1);
      lo = make({c.b.x0, c.b.x1, c.b.y0, m}, c.yl);
      hi = make({c.b.x0, c.b.x1, m, c.b.y1}, c.yr);
    }
    total += value(lo) + value(hi) - value(c);
    terr += err(lo) + err(hi) - err(c);
    tmag += mag(lo) + mag(hi) - mag(c);
    cells[i] = lo;
    cells.push_back(hi);
    if (!lo.frozen) pq.push(i);
    if (!hi.frozen) pq.push(cells.size() - 1);
  }

  std::sort(cells.begin(), cells.end(), [](const Cell& p, const Cell& q) {
    if (p.b.x0 != q.b.x0) return p.b.x0 < q.b.x0;
    return p.b.y0 < q.b.y0;
  });
  std::vector<cplx> vals;
  std::vector<double> errs, mags;
  vals.reserve(cells.size());
  for (const auto& c : cells) {
    vals.push_back(value(c));
    errs.push_back(err(c));
    mags.push_back(mag(c));
  }
  res.value = pairwise_sum(vals);
  res.error = pairwise_sum(errs);
  res.magnitude = pairwise_sum(mags);
  res.cells = cells.size();
  res.converged = res.error <= detail::tolerance(opt, res.value, res.magnitude);
  return res;
}

}  // namespace decaylab::quad
