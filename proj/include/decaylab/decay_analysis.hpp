#pragma once

#include <string>
#include <vector>

#include "decaylab/littlewood_paley.hpp"
#include "decaylab/quadrature.hpp"
#include "decaylab/spectral_state.hpp"
#include "decaylab/witness_data.hpp"

namespace decaylab {

// -(3/2)(1 - 1/p) - (1/2)(1 - 2/p), p in [2, inf]
double theoretical_rate(double p);

enum class WitnessKind { Zero, Heat, Gaussian, Psi, DyadicBlock, DensityBlock, LowBandKernel };

const char* to_string(WitnessKind k);
WitnessKind witness_kind_from_string(const std::string& s);

struct Witness {
  WitnessKind kind = WitnessKind::Gaussian;
  int j = 0;          // block index for the dyadic witnesses
  int branch = -1;    // LowBandKernel
  double psi_margin = 0.02;
  GaussianConstants gaussian{};
  double transition_width = 0.25;
  std::string tag() const;
};

// The field at time t (a_hat(t), v_hat(t)).
SpectralState witness_state(const Witness& w, double t);

enum class NormKind { Linf, L2, BlockL2, Besov };

struct NormSpec {
  NormKind kind = NormKind::L2;
  Band band = Band::Full;  // Linf / L2: restrict to a band first
  int j = 0;               // BlockL2
  BesovSpec besov{};
  std::string tag() const;
};

struct DecaySeries {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> errors;
  std::vector<bool> certified;
  std::vector<bool> upper_bound_only;
  std::vector<double> locations;  // Linf: x1 of the maximiser
  std::string norm_tag;
  std::string data_tag;

  bool acceptance_grade() const;
  std::size_t size() const { return times.size(); }
};

struct SweepOptions {
  quad::Options quad = default_transform_options();
  int threads = 1;
};

// one norm per time, computed in parallel, assembled in time order
DecaySeries sweep(const Witness& w, const NormSpec& n, const std::vector<double>& times,
                  const SweepOptions& opt = {});

// (value, error, certified, upper_bound_only, location) of one norm of one state
struct NormValue {
  double value = 0.0;
  double error = 0.0;
  bool certified = true;
  bool upper_bound_only = false;
  double location = 0.0;
};
NormValue evaluate_norm(const SpectralState& s, const NormSpec& n, double t_context, const quad::Options& opt,
                        double transition_width = 0.25);

enum class FitModel { PowerLaw, Exponential };

const char* to_string(FitModel m);

struct FitResult {
  FitModel model = FitModel::PowerLaw;
  double exponent = 0.0;  // sigma for PowerLaw, kappa (decay rate, v ~ e^{-kappa t}) for Exponential
  double amplitude = 0.0;
  double r_squared = 0.0;
  double t_lo = 0.0, t_hi = 0.0;
  std::size_t points = 0;
};

// least squares on (log t, log v) or (t, log v), restricted to [t_lo, t_hi]
FitResult fit(const DecaySeries& s, FitModel model, double t_lo = -inf, double t_hi = inf);

// mean of t^2 * value over the last three points
double plateau(const DecaySeries& s);

struct WindowSensitivity {
  double full = 0.0;
  double early = 0.0;  // window end pulled in by half a decade
  double late = 0.0;   // window start pushed out by half a decade
  double spread() const;
};
WindowSensitivity window_sensitivity(const DecaySeries& s, FitModel model);

enum class BoundKind { UpperPowerLaw, LowerBound, Exponential, MidBand };

const char* to_string(BoundKind k);

struct BoundSpec {
  BoundKind kind = BoundKind::UpperPowerLaw;
  double sigma_theory = 0.0;
  double sigma_tol = 0.05;
  double r2_min = 0.999;
  double plateau_fraction = 0.5;
  double kappa_min = 0.9;
  double r2_gap = 0.05;
};

struct Verdict {
  std::string name;
  BoundKind kind = BoundKind::UpperPowerLaw;
  bool pass = false;
  bool withheld = false;  // some point uncertified, or only an interpolation bound
  std::string reason;
  FitResult fit;
  FitResult alt_fit;  // the competing model
  double theory = 0.0;
  double margin = 0.0;  // signed distance to the failure threshold of the deciding test
  double plateau = 0.0;
  double min_t2 = 0.0;
  double min_max_ratio = 0.0;
  bool monotone = false;
  WindowSensitivity window;
};

Verdict verify_bounds(const DecaySeries& s, const BoundSpec& spec, const std::string& name = "");

}  // namespace decaylab
