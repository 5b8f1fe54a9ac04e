#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <json.hpp>
#include <set>
#include <sstream>

#include "decaylab/cli.hpp"

namespace decaylab::cli {

using json = nlohmann::ordered_json;

std::vector<double> TimeGrid::times() const {
  std::vector<double> v;
  if (spacing == "list") return values;
  if (points <= 0 || !(t_max >= t_min)) return v;
  if (points == 1) return {t_min};
  for (int i = 0; i < points; ++i) {
    double f = double(i) / (points - 1);
    v.push_back(spacing == "log" ? t_min * std::pow(t_max / t_min, f) : t_min + (t_max - t_min) * f);
  }
  v.back() = t_max;
  return v;
}

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

template <class T>
void get(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if constexpr (std::is_same_v<T, double>) {
    if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  } else if constexpr (std::is_same_v<T, int>) {
    if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw ConfigError(where + "." + key + ": expected a string");
  }
  try {
    out = v.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

// number, or the string "inf"
void get_extended(const json& j, const char* key, double& out, const std::string& where) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (v.is_string() && v.get<std::string>() == "inf") {
    out = inf;
  } else if (v.is_number()) {
    out = v.get<double>();
  } else {
    throw ConfigError(where + "." + key + ": expected a number or \"inf\"");
  }
}

json extended(double x) { return std::isinf(x) ? json("inf") : json(x); }

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

TimeGrid read_grid(const json& j, TimeGrid g, const std::string& where) {
  check_keys(j, {"spacing", "t_min", "t_max", "points", "values"}, where);
  get(j, "spacing", g.spacing, where);
  get(j, "t_min", g.t_min, where);
  get(j, "t_max", g.t_max, where);
  get(j, "points", g.points, where);
  get(j, "values", g.values, where);
  require(g.spacing == "log" || g.spacing == "linear" || g.spacing == "list",
          where + ".spacing: one of log, linear, list");
  require(g.points >= 0, where + ".points: must be >= 0");
  require(std::isfinite(g.t_min) && std::isfinite(g.t_max) && g.t_min >= 0, where + ": times must be finite, >= 0");
  if (g.spacing == "log") require(g.t_min > 0, where + ".t_min: log spacing needs t_min > 0");
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    require(std::isfinite(g.values[i]) && g.values[i] >= 0, where + ".values: times must be finite, >= 0");
    if (i) require(g.values[i] > g.values[i - 1], where + ".values: must be strictly increasing");
  }
  return g;
}

json write_grid(const TimeGrid& g) {
  return json{{"spacing", g.spacing}, {"t_min", g.t_min}, {"t_max", g.t_max}, {"points", g.points},
              {"values", g.values}};
}

const std::set<std::string> kNormKinds{"Linf", "L2", "block_l2", "besov"};
const std::set<std::string> kBands{"full", "high", "low"};
const std::set<std::string> kBounds{"auto", "upper_power_law", "lower_bound", "exponential", "mid_band", "none"};

NormEntry read_norm(const json& j, const std::string& where) {
  check_keys(j, {"kind", "band", "j", "s", "p", "q", "bound", "sigma_theory"}, where);
  NormEntry n;
  get(j, "kind", n.kind, where);
  get(j, "band", n.band, where);
  get(j, "j", n.j, where);
  get(j, "s", n.s, where);
  get_extended(j, "p", n.p, where);
  get_extended(j, "q", n.q, where);
  get(j, "bound", n.bound, where);
  if (j.contains("sigma_theory") && !j.at("sigma_theory").is_null()) {
    double s = 0;
    get(j, "sigma_theory", s, where);
    n.sigma_theory = s;
  }
  require(kNormKinds.count(n.kind), where + ".kind: one of Linf, L2, block_l2, besov");
  require(kBands.count(n.band), where + ".band: one of full, high, low");
  require(kBounds.count(n.bound), where + ".bound: unknown bound kind '" + n.bound + "'");
  require(n.p >= 1 && n.q >= 1, where + ": p and q must lie in [1, inf]");
  if (n.kind == "besov") require(n.p >= 2, where + ".p: only p >= 2 can be evaluated");
  return n;
}

json write_norm(const NormEntry& n) {
  json j{{"kind", n.kind}, {"band", n.band}, {"j", n.j}, {"s", n.s}, {"p", extended(n.p)},
         {"q", extended(n.q)}, {"bound", n.bound}};
  j["sigma_theory"] = n.sigma_theory ? json(*n.sigma_theory) : json(nullptr);
  return j;
}

json to_json(const RunConfig& c) {
  json j;
  j["format_version"] = c.format_version;
  j["output_dir"] = c.output_dir;
  j["threads"] = c.threads;
  j["partition"] = {{"transition_width", c.transition_width}};
  j["witness"] = {{"kind", to_string(c.witness.kind)},
                  {"j", c.witness.j},
                  {"branch", c.witness.branch},
                  {"psi_margin", c.witness.psi_margin},
                  {"gaussian", {{"c1", c.witness.gaussian.c1}, {"c2", c.witness.gaussian.c2}}}};
  j["norms"] = json::array();
  for (const auto& n : c.norms) j["norms"].push_back(write_norm(n));
  j["time_grid"] = write_grid(c.time_grid);
  j["quadrature"] = {{"rel_tol", c.quadrature.rel_tol},
                     {"abs_tol", c.quadrature.abs_tol},
                     {"phase_per_cell", c.quadrature.phase_per_cell},
                     {"max_cells", c.quadrature.max_cells}};
  const auto& b = c.bounds;
  j["bounds"] = {{"sigma_tol", b.sigma_tol},         {"lower_sigma_tol", b.lower_sigma_tol},
                 {"r2_min", b.r2_min},               {"midband_r2_min", b.midband_r2_min},
                 {"plateau_fraction", b.plateau_fraction}, {"kappa_min", b.kappa_min},
                 {"r2_gap", b.r2_gap}};
  const auto& e = c.eigen;
  j["eigen"] = {{"tolerance", e.tolerance}, {"degenerate_tolerance", e.degenerate_tolerance},
                {"rho_points", e.rho_points}, {"t_points", e.t_points},
                {"rho_min", e.rho_min},     {"rho_max", e.rho_max},
                {"t_max", e.t_max},         {"degenerate_band", e.degenerate_band}};
  j["lower_bound"] = {{"halfspace_times", c.lower_bound.halfspace_times},
                      {"limit_tolerance", c.lower_bound.limit_tolerance},
                      {"xipos_ratio", c.lower_bound.xipos_ratio}};
  j["midband"] = {{"j_values", c.midband.j_values},
                  {"time_grid", write_grid(c.midband.time_grid)},
                  {"high_j_values", c.midband.high_j_values},
                  {"high_time_grid", write_grid(c.midband.high_time_grid)}};
  j["besov"] = {{"j_min", c.besov_j_min}, {"j_max", c.besov_j_max}};
  j["report"] = {{"inputs", c.report_inputs}};
  return j;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("parse error: ") + e.what());
  }
  RunConfig c;
  check_keys(j, {"format_version", "output_dir", "threads", "partition", "witness", "norms", "time_grid",
                 "quadrature", "bounds", "eigen", "lower_bound", "midband", "besov", "report"},
             "config");
  get(j, "format_version", c.format_version, "config");
  require(c.format_version == kFormatVersion, "config.format_version: unsupported version");
  get(j, "output_dir", c.output_dir, "config");
  require(!c.output_dir.empty(), "config.output_dir: must not be empty");
  get(j, "threads", c.threads, "config");
  require(c.threads >= 1, "config.threads: must be >= 1");

  if (j.contains("partition")) {
    const json& p = j["partition"];
    check_keys(p, {"transition_width"}, "partition");
    get(p, "transition_width", c.transition_width, "partition");
  }
  require(c.transition_width > 0 && c.transition_width < 0.5, "partition.transition_width: must lie in (0, 1/2)");

  if (j.contains("witness")) {
    const json& w = j["witness"];
    check_keys(w, {"kind", "j", "branch", "psi_margin", "gaussian"}, "witness");
    std::string kind = to_string(c.witness.kind);
    get(w, "kind", kind, "witness");
    try {
      c.witness.kind = witness_kind_from_string(kind);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("witness.kind: ") + e.what());
    }
    get(w, "j", c.witness.j, "witness");
    get(w, "branch", c.witness.branch, "witness");
    get(w, "psi_margin", c.witness.psi_margin, "witness");
    if (w.contains("gaussian")) {
      check_keys(w["gaussian"], {"c1", "c2"}, "witness.gaussian");
      get(w["gaussian"], "c1", c.witness.gaussian.c1, "witness.gaussian");
      get(w["gaussian"], "c2", c.witness.gaussian.c2, "witness.gaussian");
    }
  }
  require(c.witness.branch == 1 || c.witness.branch == -1, "witness.branch: must be +1 or -1");
  require(c.witness.psi_margin > 0 && c.witness.psi_margin < 0.1, "witness.psi_margin: must lie in (0, 0.1)");
  require(c.witness.gaussian.c2 > 0, "witness.gaussian.c2: must be positive");
  c.witness.transition_width = c.transition_width;

  if (j.contains("norms")) {
    require(j["norms"].is_array(), "norms: expected an array");
    c.norms.clear();
    for (std::size_t i = 0; i < j["norms"].size(); ++i)
      c.norms.push_back(read_norm(j["norms"][i], "norms[" + std::to_string(i) + "]"));
  }
  if (j.contains("time_grid")) c.time_grid = read_grid(j["time_grid"], c.time_grid, "time_grid");

  if (j.contains("quadrature")) {
    const json& q = j["quadrature"];
    check_keys(q, {"rel_tol", "abs_tol", "phase_per_cell", "max_cells"}, "quadrature");
    get(q, "rel_tol", c.quadrature.rel_tol, "quadrature");
    get(q, "abs_tol", c.quadrature.abs_tol, "quadrature");
    get(q, "phase_per_cell", c.quadrature.phase_per_cell, "quadrature");
    if (q.contains("max_cells")) {
      int m = 0;
      get(q, "max_cells", m, "quadrature");
      require(m > 0, "quadrature.max_cells: must be positive");
      c.quadrature.max_cells = std::size_t(m);
    }
  }
  require(c.quadrature.rel_tol >= 0 && c.quadrature.abs_tol >= 0 &&
              (c.quadrature.rel_tol > 0 || c.quadrature.abs_tol > 0),
          "quadrature: tolerances must be >= 0 and not both zero");
  require(c.quadrature.phase_per_cell > 0, "quadrature.phase_per_cell: must be positive");

  if (j.contains("bounds")) {
    const json& b = j["bounds"];
    const std::string w = "bounds";
    check_keys(b, {"sigma_tol", "lower_sigma_tol", "r2_min", "midband_r2_min", "plateau_fraction", "kappa_min",
                   "r2_gap"},
               w);
    get(b, "sigma_tol", c.bounds.sigma_tol, w);
    get(b, "lower_sigma_tol", c.bounds.lower_sigma_tol, w);
    get(b, "r2_min", c.bounds.r2_min, w);
    get(b, "midband_r2_min", c.bounds.midband_r2_min, w);
    get(b, "plateau_fraction", c.bounds.plateau_fraction, w);
    get(b, "kappa_min", c.bounds.kappa_min, w);
    get(b, "r2_gap", c.bounds.r2_gap, w);
  }

  if (j.contains("eigen")) {
    const json& e = j["eigen"];
    const std::string w = "eigen";
    check_keys(e, {"tolerance", "degenerate_tolerance", "rho_points", "t_points", "rho_min", "rho_max", "t_max",
                   "degenerate_band"},
               w);
    get(e, "tolerance", c.eigen.tolerance, w);
    get(e, "degenerate_tolerance", c.eigen.degenerate_tolerance, w);
    get(e, "rho_points", c.eigen.rho_points, w);
    get(e, "t_points", c.eigen.t_points, w);
    get(e, "rho_min", c.eigen.rho_min, w);
    get(e, "rho_max", c.eigen.rho_max, w);
    get(e, "t_max", c.eigen.t_max, w);
    get(e, "degenerate_band", c.eigen.degenerate_band, w);
  }
  require(c.eigen.rho_points >= 2 && c.eigen.t_points >= 2, "eigen: need at least 2 points per axis");
  require(c.eigen.rho_min >= 0 && c.eigen.rho_max > c.eigen.rho_min && c.eigen.t_max > 0, "eigen: bad grid range");
  require(c.eigen.tolerance >= 0 && c.eigen.degenerate_tolerance >= 0, "eigen: tolerances must be >= 0");

  if (j.contains("lower_bound")) {
    const json& l = j["lower_bound"];
    check_keys(l, {"halfspace_times", "limit_tolerance", "xipos_ratio"}, "lower_bound");
    get(l, "halfspace_times", c.lower_bound.halfspace_times, "lower_bound");
    get(l, "limit_tolerance", c.lower_bound.limit_tolerance, "lower_bound");
    get(l, "xipos_ratio", c.lower_bound.xipos_ratio, "lower_bound");
  }
  for (double t : c.lower_bound.halfspace_times)
    require(t > 0 && std::isfinite(t), "lower_bound.halfspace_times: must be positive");

  if (j.contains("midband")) {
    const json& m = j["midband"];
    check_keys(m, {"j_values", "time_grid", "high_j_values", "high_time_grid"}, "midband");
    get(m, "j_values", c.midband.j_values, "midband");
    get(m, "high_j_values", c.midband.high_j_values, "midband");
    if (m.contains("time_grid")) c.midband.time_grid = read_grid(m["time_grid"], c.midband.time_grid, "midband.time_grid");
    if (m.contains("high_time_grid"))
      c.midband.high_time_grid = read_grid(m["high_time_grid"], c.midband.high_time_grid, "midband.high_time_grid");
  }

  if (j.contains("besov")) {
    check_keys(j["besov"], {"j_min", "j_max"}, "besov");
    get(j["besov"], "j_min", c.besov_j_min, "besov");
    get(j["besov"], "j_max", c.besov_j_max, "besov");
  }
  require(c.besov_j_min <= c.besov_j_max, "besov: j_min must not exceed j_max");

  if (j.contains("report")) {
    check_keys(j["report"], {"inputs"}, "report");
    get(j["report"], "inputs", c.report_inputs, "report");
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const RunConfig& c) { return to_json(c).dump(2) + "\n"; }

std::uint64_t config_hash(const RunConfig& c) {
  // FNV-1a over the canonical dump
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : to_json(c).dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

NormSpec to_norm_spec(const NormEntry& e) {
  NormSpec n;
  n.band = e.band == "high" ? Band::High : e.band == "low" ? Band::Low : Band::Full;
  if (e.kind == "Linf") {
    n.kind = NormKind::Linf;
  } else if (e.kind == "L2") {
    n.kind = NormKind::L2;
  } else if (e.kind == "block_l2") {
    n.kind = NormKind::BlockL2;
    n.j = e.j;
  } else {
    n.kind = NormKind::Besov;
    n.besov = BesovSpec{e.s, e.p, e.q, n.band};
  }
  return n;
}

}  // namespace decaylab::cli
