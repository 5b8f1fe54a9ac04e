#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "decaylab/decay_analysis.hpp"

namespace decaylab::cli {

inline constexpr int kFormatVersion = 1;
inline constexpr const char* kToolVersion = "decay_lab 1.0.0";

enum Exit : int { kPass = 0, kVerdictFailure = 1, kUsageError = 2, kNonConvergence = 3 };

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TimeGrid {
  std::string spacing = "log";  // log | linear | list
  double t_min = 100.0;
  double t_max = 1e4;
  int points = 12;
  std::vector<double> values;  // spacing == list
  std::vector<double> times() const;
};

struct NormEntry {
  std::string kind = "L2";     // Linf | L2 | block_l2 | besov
  std::string band = "low";    // full | high | low
  int j = 0;
  double s = 0.0, p = 2.0, q = 2.0;
  std::string bound = "auto";  // auto | upper_power_law | lower_bound | exponential | mid_band | none
  std::optional<double> sigma_theory;
};

struct BoundSettings {
  double sigma_tol = 0.05;
  double lower_sigma_tol = 0.1;
  double r2_min = 0.999;
  double midband_r2_min = 0.99;
  double plateau_fraction = 0.5;
  double kappa_min = 0.9;
  double r2_gap = 0.05;
};

struct EigenSettings {
  double tolerance = 1e-9;
  double degenerate_tolerance = 1e-6;
  int rho_points = 200;
  int t_points = 20;
  double rho_min = 0.01, rho_max = 10.0, t_max = 20.0;
  double degenerate_band = 1e-3;
};

struct LowerBoundSettings {
  std::vector<double> halfspace_times{100.0, 1000.0, 10000.0};
  double limit_tolerance = 0.05;
  double xipos_ratio = 0.3;
};

struct MidbandSettings {
  std::vector<int> j_values{0, 1, 2};
  TimeGrid time_grid{"linear", 10.0, 60.0, 12, {}};
  std::vector<int> high_j_values{3, 4, 5};
  TimeGrid high_time_grid{"linear", 1.0, 25.0, 12, {}};
};

struct RunConfig {
  int format_version = kFormatVersion;
  std::string output_dir = "decay_lab_out";
  int threads = 1;
  double transition_width = 0.25;
  Witness witness{};
  std::vector<NormEntry> norms{NormEntry{}};
  TimeGrid time_grid{};
  quad::Options quadrature = default_transform_options();
  BoundSettings bounds{};
  EigenSettings eigen{};
  LowerBoundSettings lower_bound{};
  MidbandSettings midband{};
  int besov_j_min = -30, besov_j_max = 12;
  std::vector<std::string> report_inputs{"verify_eigen.json", "decay_sweep.json", "lower_bound.json",
                                         "midband.json"};
};

// Strict: unknown keys, wrong types and out-of-range values throw ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string dump_config(const RunConfig& c);  // canonical JSON, also the print-defaults output
std::uint64_t config_hash(const RunConfig& c);
std::string hash_hex(std::uint64_t h);

NormSpec to_norm_spec(const NormEntry& e);

// Verdict a decay-sweep row is checked against; nullopt for none.
std::optional<BoundSpec> resolve_bound(const NormEntry& e, const Witness& w, const BoundSettings& b);

// Whole front end; returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace decaylab::cli
