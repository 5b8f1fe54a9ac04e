#include "decaylab/littlewood_paley.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "decaylab/mollifier.hpp"
#include "decaylab/oscillatory_quadrature.hpp"

namespace decaylab {

PartitionProfile::PartitionProfile(double transition_width) : w_(transition_width) {
  if (!(transition_width > 0.0) || !(transition_width < 0.5))
    throw std::invalid_argument("build_partition: transition_width must lie in (0, 1/2), otherwise the plateau is empty");
  rin_ = 2.0 - 2.0 * w_;
}

double PartitionProfile::cutoff(double r) const {
  if (r <= rin_) return 1.0;
  if (r >= 2.0) return 0.0;
  return smooth_step((2.0 - r) / (2.0 - rin_));
}

double PartitionProfile::phi(int j, double r) const {
  return cutoff(std::ldexp(r, -j)) - cutoff(std::ldexp(r, 1 - j));
}

std::pair<double, double> PartitionProfile::support(int j) const {
  return {std::ldexp(1.0 - w_, j), std::ldexp(2.0, j)};
}

std::pair<double, double> PartitionProfile::plateau(int j) const {
  return {std::ldexp(1.0, j), std::ldexp(rin_, j)};
}

PartitionProfile build_partition(double transition_width) { return PartitionProfile(transition_width); }

const char* to_string(Band b) {
  switch (b) {
    case Band::Full: return "full";
    case Band::High: return "high";
    case Band::Low: return "low";
  }
  return "?";
}

namespace {
std::string fmt_index(double v) {
  if (std::isinf(v)) return "inf";
  std::ostringstream o;
  o << v;
  return o.str();
}
}  // namespace

std::string BesovSpec::tag() const {
  return "B^" + fmt_index(s) + "_{" + fmt_index(p) + "," + fmt_index(q) + "}[" + to_string(band) + "]";
}

bool BlockCache::find(std::uint64_t id, int j, double p, BlockNorm& out) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = map_.find({id, j, p});
  if (it == map_.end()) return false;
  out = it->second;
  return true;
}

void BlockCache::insert(std::uint64_t id, int j, double p, const BlockNorm& b) {
  std::lock_guard<std::mutex> lock(mu_);
  map_.emplace(std::make_tuple(id, j, p), b);
}

std::size_t BlockCache::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return map_.size();
}

SpectralState localize(const SpectralState& s, const PartitionProfile& lp, int j) {
  auto [lo, hi] = lp.support(j);
  return multiply_radial(
      s, [lp, j](double r) { return lp.phi(j, r); }, lo, hi, s.tag + "|block" + std::to_string(j));
}

SpectralState band_part(const SpectralState& s, const PartitionProfile& lp, Band band) {
  switch (band) {
    case Band::Full: return s;
    case Band::Low:
      return multiply_radial(s, [lp](double r) { return lp.low_band(r); }, 0.0, 8.0, s.tag + "|low");
    case Band::High:
      return multiply_radial(
          s, [lp](double r) { return lp.high_band(r); }, 8.0 * (1.0 - lp.transition_width()), inf,
          s.tag + "|high");
  }
  return s;
}

quad::Options default_norm_options() { return {1e-10, 0.0, pi / 4, 400000}; }

BlockNorm block_norm(const SpectralState& s, const PartitionProfile& lp, int j, double p, double t_context,
                     const quad::Options& opt, BlockCache* cache) {
  if (!(p >= 2.0)) throw std::invalid_argument("block_norm: only p >= 2 is supported");
  BlockNorm out;
  if (cache && cache->find(s.id, j, p, out)) return out;

  if (std::isinf(p)) {
    SpectralState loc = localize(s, lp, j);
    if (!loc.zero) {
      SupResult r = sup_on_axis(loc, t_context, opt);
      out.value = r.value;
      out.error = r.error;
      out.converged = r.converged;
      out.upper_bound = r.upper_bound;
      out.x1 = r.x1;
    }
  } else if (p == 2.0) {
    SpectralState loc = localize(s, lp, j);
    if (!loc.zero) {
      SpectralIntegral r = l2_norm(loc, opt);
      out.value = r.value;
      out.error = r.error;
      out.converged = r.converged;
    }
  } else {
    BlockNorm b2 = block_norm(s, lp, j, 2.0, t_context, opt, cache);
    BlockNorm bi = block_norm(s, lp, j, inf, t_context, opt, cache);
    double th = 2.0 / p;
    out.value = std::pow(b2.value, th) * std::pow(bi.value, 1.0 - th);
    out.error = out.value > 0 ? out.value * (th * b2.error / std::max(b2.value, 1e-300) +
                                             (1 - th) * bi.error / std::max(bi.value, 1e-300))
                              : 0.0;
    out.converged = b2.converged && bi.converged;
    out.upper_bound_only = true;
  }
  if (cache) cache->insert(s.id, j, p, out);
  return out;
}

BesovResult besov_norm(const SpectralState& s, const PartitionProfile& lp, const BesovSpec& spec, int j_min,
                       int j_max, double t_context, const quad::Options& opt, BlockCache* cache) {
  if (!(spec.p >= 1.0) || !(spec.q >= 1.0)) throw std::invalid_argument("besov_norm: p and q must lie in [1, inf]");
  if (spec.band == Band::High) j_min = std::max(j_min, 3);
  if (spec.band == Band::Low) j_max = std::min(j_max, 2);
  if (j_min > j_max) throw std::invalid_argument("besov_norm: empty index range");

  BesovResult res;
  res.j_min = j_min;
  res.j_max = j_max;
  std::vector<double> terms;
  for (int j = j_min; j <= j_max; ++j) {
    BlockNorm b = block_norm(s, lp, j, spec.p, t_context, opt, cache);
    res.blocks.push_back({j, b});
    res.converged = res.converged && b.converged;
    res.upper_bound_only = res.upper_bound_only || b.upper_bound_only;
    terms.push_back(std::exp2(spec.s * j) * b.value);
  }
  double total = 0.0, err = 0.0;
  if (std::isinf(spec.q)) {
    std::size_t k = 0;
    for (std::size_t i = 0; i < terms.size(); ++i)
      if (terms[i] > terms[k]) k = i;
    total = terms[k];
    err = std::exp2(spec.s * res.blocks[k].first) * res.blocks[k].second.error;
  } else {
    std::vector<double> pw;
    for (double x : terms) pw.push_back(std::pow(x, spec.q));
    total = std::pow(quad::pairwise_sum(pw), 1.0 / spec.q);
    if (total > 0)
      for (std::size_t i = 0; i < terms.size(); ++i)
        err += std::pow(terms[i] / total, spec.q - 1) * std::exp2(spec.s * res.blocks[i].first) *
               res.blocks[i].second.error;
  }
  res.value = total;
  res.error = err;

  double lo_end = terms.front(), hi_end = terms.back();
  double worst = 0.0;
  if (spec.band != Band::High) worst = std::max(worst, lo_end);   // low end truncated
  if (spec.band != Band::Low) worst = std::max(worst, hi_end);    // high end truncated
  res.tail_certificate = total > 0 ? worst / total : 0.0;
  res.certified = res.tail_certificate < kTailTolerance;
  return res;
}

BesovResult besov_norm_auto(const SpectralState& s, const PartitionProfile& lp, const BesovSpec& spec, int j_min,
                            int j_max, double t_context, const quad::Options& opt, BlockCache* cache) {
  BlockCache local;
  BlockCache* c = cache ? cache : &local;
  BesovResult r = besov_norm(s, lp, spec, j_min, j_max, t_context, opt, c);
  while (!r.certified) {
    bool widened = false;
    double total = r.value;
    double lo = std::exp2(spec.s * r.j_min) * r.blocks.front().second.value;
    double hi = std::exp2(spec.s * r.j_max) * r.blocks.back().second.value;
    if (spec.band != Band::High && lo >= kTailTolerance * total && j_min > -90) {
      j_min = std::max(-90, r.j_min - 8);
      widened = true;
    }
    if (spec.band != Band::Low && hi >= kTailTolerance * total && j_max < 40) {
      j_max = std::min(40, r.j_max + 4);
      widened = true;
    }
    if (!widened) break;
    r = besov_norm(s, lp, spec, j_min, j_max, t_context, opt, c);
  }
  return r;
}

}  // namespace decaylab
