#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "decaylab/quadrature.hpp"
#include "decaylab/spectral_state.hpp"

namespace decaylab {

// phi0(r) = chi(r) - chi(2r), chi = 1 on [0, 2 - 2w], 0 on [2, inf), with
// an e^{-1/x} smooth step in between.  So phi0 rises on (1 - w, 1), is 1 on
// [1, 2 - 2w] and falls on (2 - 2w, 2).
class PartitionProfile {
 public:
  explicit PartitionProfile(double transition_width = 0.25);

  double transition_width() const { return w_; }
  double cutoff(double r) const;
  double phi0(double r) const { return cutoff(r) - cutoff(2 * r); }
  double phi(int j, double r) const;
  // sum_{j <= 2} phi_j = chi(r / 4)
  double low_band(double r) const { return cutoff(std::ldexp(r, -2)); }
  double high_band(double r) const { return 1.0 - low_band(r); }
  // closed support [2^j (1 - w), 2^{j+1}]
  std::pair<double, double> support(int j) const;
  std::pair<double, double> plateau(int j) const;

 private:
  double w_;
  double rin_;
};

PartitionProfile build_partition(double transition_width);

enum class Band { Full, High, Low };

const char* to_string(Band b);

struct BesovSpec {
  double s = 0.0;
  double p = 2.0;  // inf allowed
  double q = 2.0;  // inf allowed
  Band band = Band::Full;
  std::string tag() const;
};

struct BlockNorm {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
  double upper_bound = 0.0;   // p = inf: L1-of-spectrum bound
  double x1 = 0.0;            // p = inf: where the sup was found
  bool upper_bound_only = false;  // 2 < p < inf: Hoelder interpolation
};

// Memo of block norms keyed by (state id, j, p); safe for concurrent use.
class BlockCache {
 public:
  bool find(std::uint64_t id, int j, double p, BlockNorm& out) const;
  void insert(std::uint64_t id, int j, double p, const BlockNorm& b);
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::map<std::tuple<std::uint64_t, int, double>, BlockNorm> map_;
};

SpectralState localize(const SpectralState& s, const PartitionProfile& lp, int j);
SpectralState band_part(const SpectralState& s, const PartitionProfile& lp, Band band);

quad::Options default_norm_options();

BlockNorm block_norm(const SpectralState& s, const PartitionProfile& lp, int j, double p, double t_context,
                     const quad::Options& opt = default_norm_options(), BlockCache* cache = nullptr);

struct BesovResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
  double tail_certificate = 0.0;  // largest truncated-end block relative to the total
  bool certified = true;
  bool upper_bound_only = false;
  int j_min = 0, j_max = 0;
  std::vector<std::pair<int, BlockNorm>> blocks;
};

inline constexpr double kTailTolerance = 1e-12;

BesovResult besov_norm(const SpectralState& s, const PartitionProfile& lp, const BesovSpec& spec, int j_min,
                       int j_max, double t_context = 0.0, const quad::Options& opt = default_norm_options(),
                       BlockCache* cache = nullptr);

// Starts from [j_min, j_max] and widens the truncated ends until the tail
// certificate holds (or the hard limits [-90, 40] are reached).
BesovResult besov_norm_auto(const SpectralState& s, const PartitionProfile& lp, const BesovSpec& spec,
                            int j_min = -30, int j_max = 12, double t_context = 0.0,
                            const quad::Options& opt = default_norm_options(), BlockCache* cache = nullptr);

}  // namespace decaylab
