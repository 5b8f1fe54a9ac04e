#include "decaylab/decay_analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "decaylab/oscillatory_quadrature.hpp"
#include "decaylab/propagator.hpp"

namespace decaylab {

double theoretical_rate(double p) {
  if (!(p >= 2.0)) throw std::invalid_argument("theoretical_rate: p must lie in [2, inf]");
  if (std::isinf(p)) return -2.0;
  return -1.5 * (1 - 1 / p) - 0.5 * (1 - 2 / p);
}

const char* to_string(WitnessKind k) {
  switch (k) {
    case WitnessKind::Zero: return "zero";
    case WitnessKind::Heat: return "heat";
    case WitnessKind::Gaussian: return "gaussian";
    case WitnessKind::Psi: return "psi";
    case WitnessKind::DyadicBlock: return "dyadic_block";
    case WitnessKind::DensityBlock: return "density_block";
    case WitnessKind::LowBandKernel: return "low_band_kernel";
  }
  return "?";
}

WitnessKind witness_kind_from_string(const std::string& s) {
  for (auto k : {WitnessKind::Zero, WitnessKind::Heat, WitnessKind::Gaussian, WitnessKind::Psi,
                 WitnessKind::DyadicBlock, WitnessKind::DensityBlock, WitnessKind::LowBandKernel})
    if (s == to_string(k)) return k;
  throw std::invalid_argument("unknown witness '" + s + "'");
}

std::string Witness::tag() const {
  std::string t = to_string(kind);
  if (kind == WitnessKind::DyadicBlock || kind == WitnessKind::DensityBlock) t += "[j=" + std::to_string(j) + "]";
  if (kind == WitnessKind::LowBandKernel) t += branch == 1 ? "[+]" : "[-]";
  return t;
}

SpectralState witness_state(const Witness& w, double t) {
  PartitionProfile lp(w.transition_width);
  switch (w.kind) {
    case WitnessKind::Zero: return zero_state();
    case WitnessKind::Heat: return heat_state(t);
    case WitnessKind::Gaussian: return evolve(gaussian_v0(w.gaussian), t);
    case WitnessKind::Psi: return psi_witness_state(make_psi(w.psi_margin), t);
    case WitnessKind::DyadicBlock: return evolve(dyadic_block_data(lp, w.j), t);
    case WitnessKind::DensityBlock: return evolve(dyadic_density_data(lp, w.j), t);
    case WitnessKind::LowBandKernel: return low_band_kernel_state(lp, t, w.branch);
  }
  throw std::invalid_argument("witness_state: unknown witness");
}

std::string NormSpec::tag() const {
  std::string band_tag = band == Band::Full ? "" : std::string("[") + to_string(band) + "]";
  switch (kind) {
    case NormKind::Linf: return "Linf" + band_tag;
    case NormKind::L2: return "L2" + band_tag;
    case NormKind::BlockL2: return "block" + std::to_string(j) + ":L2";
    case NormKind::Besov: return besov.tag();
  }
  return "?";
}

bool DecaySeries::acceptance_grade() const {
  if (times.empty()) return false;
  for (bool c : certified)
    if (!c) return false;
  return true;
}

NormValue evaluate_norm(const SpectralState& s, const NormSpec& n, double t_context, const quad::Options& opt,
                        double transition_width) {
  PartitionProfile lp(transition_width);
  NormValue out;
  switch (n.kind) {
    case NormKind::Linf: {
      SpectralState b = band_part(s, lp, n.band);
      SupResult r = sup_on_axis(b, t_context, opt, false);
      out.value = r.value;
      out.error = r.error;
      out.certified = r.converged;
      out.location = r.x1;
      break;
    }
    case NormKind::L2: {
      SpectralState b = band_part(s, lp, n.band);
      SpectralIntegral r = l2_norm(b, opt);
      out.value = r.value;
      out.error = r.error;
      out.certified = r.converged;
      break;
    }
    case NormKind::BlockL2: {
      BlockNorm r = block_norm(s, lp, n.j, 2.0, t_context, opt);
      out.value = r.value;
      out.error = r.error;
      out.certified = r.converged;
      break;
    }
    case NormKind::Besov: {
      BesovResult r = besov_norm_auto(s, lp, n.besov, -30, 12, t_context, opt);
      out.value = r.value;
      out.error = r.error;
      out.certified = r.converged && r.certified;
      out.upper_bound_only = r.upper_bound_only;
      break;
    }
  }
  return out;
}

DecaySeries sweep(const Witness& w, const NormSpec& n, const std::vector<double>& times, const SweepOptions& opt) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0) || !std::isfinite(times[i])) throw std::invalid_argument("sweep: times must be finite and >= 0");
    if (i > 0 && !(times[i] > times[i - 1])) throw std::invalid_argument("sweep: times must be strictly increasing");
  }
  DecaySeries s;
  s.times = times;
  s.norm_tag = n.tag();
  s.data_tag = w.tag();
  std::size_t m = times.size();
  std::vector<NormValue> vals(m);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex fail_mu;
  auto work = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= m) return;
      try {
        vals[i] = evaluate_norm(witness_state(w, times[i]), n, times[i], opt.quad, w.transition_width);
      } catch (...) {
        std::lock_guard<std::mutex> lock(fail_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  int nt = std::max(1, std::min<int>(opt.threads, int(m)));
  if (nt == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < nt; ++k) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  for (const auto& v : vals) {
    s.values.push_back(v.value);
    s.errors.push_back(v.error);
    s.certified.push_back(v.certified);
    s.upper_bound_only.push_back(v.upper_bound_only);
    s.locations.push_back(v.location);
  }
  return s;
}

const char* to_string(FitModel m) { return m == FitModel::PowerLaw ? "PowerLaw" : "Exponential"; }

FitResult fit(const DecaySeries& s, FitModel model, double t_lo, double t_hi) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    double t = s.times[i];
    if (t < t_lo || t > t_hi) continue;
    if (!(s.values[i] > 0)) throw std::invalid_argument("fit: log fit needs positive values");
    if (model == FitModel::PowerLaw && !(t > 0)) throw std::invalid_argument("fit: power law needs t > 0");
    x.push_back(model == FitModel::PowerLaw ? std::log(t) : t);
    y.push_back(std::log(s.values[i]));
  }
  if (x.size() < 5) throw std::invalid_argument("fit: at least 5 points required");
  double n = double(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0)) throw std::invalid_argument("fit: degenerate time window");
  double b = sxy / sxx, a = my - b * mx;
  double ssr = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double e = y[i] - (a + b * x[i]);
    ssr += e * e;
  }
  FitResult f;
  f.model = model;
  f.exponent = model == FitModel::PowerLaw ? b : -b;
  f.amplitude = std::exp(a);
  f.r_squared = syy > 0 ? std::max(0.0, 1 - ssr / syy) : 1.0;
  f.t_lo = model == FitModel::PowerLaw ? std::exp(x.front()) : x.front();
  f.t_hi = model == FitModel::PowerLaw ? std::exp(x.back()) : x.back();
  f.points = x.size();
  return f;
}

double plateau(const DecaySeries& s) {
  std::size_t n = s.times.size();
  if (n < 3) throw std::invalid_argument("plateau: at least 3 points required");
  double acc = 0;
  for (std::size_t i = n - 3; i < n; ++i) acc += s.times[i] * s.times[i] * s.values[i];
  return acc / 3;
}

double WindowSensitivity::spread() const {
  double m = 0;
  if (std::isfinite(early)) m = std::max(m, std::abs(early - full));
  if (std::isfinite(late)) m = std::max(m, std::abs(late - full));
  return m;
}

WindowSensitivity window_sensitivity(const DecaySeries& s, FitModel model) {
  WindowSensitivity w;
  w.full = fit(s, model).exponent;
  double lo = s.times.front(), hi = s.times.back(), k = std::sqrt(10.0);
  w.early = w.late = std::numeric_limits<double>::quiet_NaN();
  try {
    w.early = fit(s, model, lo, hi / k).exponent;
  } catch (const std::invalid_argument&) {
  }
  try {
    w.late = fit(s, model, lo * k, hi).exponent;
  } catch (const std::invalid_argument&) {
  }
  return w;
}

const char* to_string(BoundKind k) {
  switch (k) {
    case BoundKind::UpperPowerLaw: return "upper_power_law";
    case BoundKind::LowerBound: return "lower_bound";
    case BoundKind::Exponential: return "exponential";
    case BoundKind::MidBand: return "mid_band";
  }
  return "?";
}

Verdict verify_bounds(const DecaySeries& s, const BoundSpec& spec, const std::string& name) {
  Verdict v;
  v.name = name.empty() ? s.data_tag + " " + s.norm_tag : name;
  v.kind = spec.kind;
  for (bool u : s.upper_bound_only)
    if (u) {
      v.withheld = true;
      v.reason = "interpolated p: UPPER-BOUND-ONLY, excluded from verdicts";
      return v;
    }
  if (!s.acceptance_grade()) {
    v.withheld = true;
    v.reason = "series has uncertified points";
    return v;
  }
  try {
    switch (spec.kind) {
      case BoundKind::UpperPowerLaw: {
        v.fit = fit(s, FitModel::PowerLaw);
        v.theory = spec.sigma_theory;
        double dev = std::abs(v.fit.exponent - spec.sigma_theory);
        v.margin = std::min(spec.sigma_tol - dev, v.fit.r_squared - spec.r2_min);
        v.pass = dev <= spec.sigma_tol && v.fit.r_squared >= spec.r2_min;
        v.window = window_sensitivity(s, FitModel::PowerLaw);
        break;
      }
      case BoundKind::LowerBound: {
        v.fit = fit(s, FitModel::PowerLaw);
        v.theory = spec.sigma_theory;
        v.plateau = plateau(s);
        double mn = inf, mx = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
          double q = s.times[i] * s.times[i] * s.values[i];
          mn = std::min(mn, q);
          mx = std::max(mx, q);
        }
        v.min_t2 = mn;
        v.min_max_ratio = mx > 0 ? mn / mx : 0.0;
        double dev = std::abs(v.fit.exponent - spec.sigma_theory);
        bool slope_ok = dev <= spec.sigma_tol;
        bool floor_ok = v.plateau > 0 && mn >= spec.plateau_fraction * v.plateau;
        v.margin = std::min(spec.sigma_tol - dev, v.plateau > 0 ? mn / v.plateau - spec.plateau_fraction : -1.0);
        v.pass = slope_ok && floor_ok;
        v.window = window_sensitivity(s, FitModel::PowerLaw);
        break;
      }
      case BoundKind::Exponential: {
        v.fit = fit(s, FitModel::Exponential);
        v.alt_fit = fit(s, FitModel::PowerLaw);
        v.theory = 1.0;
        double gap = v.fit.r_squared - v.alt_fit.r_squared;
        v.margin = std::min(v.fit.exponent - spec.kappa_min, gap - spec.r2_gap);
        v.pass = v.fit.exponent >= spec.kappa_min && gap >= spec.r2_gap;
        v.window = window_sensitivity(s, FitModel::Exponential);
        break;
      }
      case BoundKind::MidBand: {
        v.fit = fit(s, FitModel::Exponential);
        v.alt_fit = fit(s, FitModel::PowerLaw);
        bool mono = true;
        for (std::size_t i = 1; i < s.size(); ++i) {
          double a = s.times[i - 1] * s.times[i - 1] * s.values[i - 1];
          double b = s.times[i] * s.times[i] * s.values[i];
          mono = mono && b < a;
        }
        v.monotone = mono;
        v.margin = std::min(v.fit.exponent, v.fit.r_squared - spec.r2_min);
        v.pass = v.fit.exponent > 0 && v.fit.r_squared >= spec.r2_min && mono &&
                 v.fit.r_squared > v.alt_fit.r_squared;
        v.window = window_sensitivity(s, FitModel::Exponential);
        break;
      }
    }
  } catch (const std::invalid_argument& e) {
    v.pass = false;
    v.reason = e.what();
    return v;
  }
  if (!v.pass && v.reason.empty()) v.reason = "criterion not met";
  return v;
}

}  // namespace decaylab
