#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <sstream>

#include "decaylab/cli.hpp"
#include "decaylab/eigensystem.hpp"
#include "decaylab/oscillatory_quadrature.hpp"

namespace decaylab::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::string g17(double x) { return fmt("%.17g", x); }

std::string utc_now() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Uniform verdict row; report.json aggregates these.
json row(const std::string& name, const std::string& claim, const std::string& measured, bool pass,
         bool withheld = false) {
  return json{{"name", name}, {"claim", claim}, {"measured", measured}, {"pass", pass}, {"withheld", withheld}};
}

struct Context {
  RunConfig cfg;
  std::string command;
  fs::path dir;
  std::ostream& out;
  std::ostream& err;

  json header() const {
    return json{{"format_version", kFormatVersion},
                {"tool_version", kToolVersion},
                {"config_hash", hash_hex(config_hash(cfg))},
                {"command", command},
                {"generated_at", utc_now()}};
  }

  void write(const std::string& name, const std::string& text) const {
    fs::create_directories(dir);
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    f << text;
    out << "wrote " << (dir / name).string() << "\n";
  }
  void write_json(const std::string& name, const json& j) const { write(name, j.dump(2) + "\n"); }
};

json fit_json(const FitResult& f) {
  return json{{"model", to_string(f.model)}, {"exponent", f.exponent}, {"amplitude", f.amplitude},
              {"r_squared", f.r_squared},    {"t_lo", f.t_lo},         {"t_hi", f.t_hi},
              {"points", f.points}};
}

json verdict_json(const Verdict& v) {
  return json{{"name", v.name},
              {"kind", to_string(v.kind)},
              {"pass", v.pass},
              {"withheld", v.withheld},
              {"reason", v.reason},
              {"fit", fit_json(v.fit)},
              {"alt_fit", fit_json(v.alt_fit)},
              {"theory", v.theory},
              {"margin", v.margin},
              {"plateau", v.plateau},
              {"min_t2", v.min_t2},
              {"min_max_ratio", v.min_max_ratio},
              {"monotone", v.monotone},
              {"window", {{"full", v.window.full},
                          {"early", v.window.early},
                          {"late", v.window.late},
                          {"spread", v.window.spread()}}}};
}

json series_json(const DecaySeries& s) {
  json j{{"data_tag", s.data_tag}, {"norm_tag", s.norm_tag}, {"points", json::array()}};
  for (std::size_t i = 0; i < s.size(); ++i)
    j["points"].push_back({{"t", s.times[i]},
                           {"value", s.values[i]},
                           {"error_estimate", s.errors[i]},
                           {"certified", bool(s.certified[i])},
                           {"upper_bound_only", bool(s.upper_bound_only[i])},
                           {"location", s.locations[i]}});
  return j;
}

void csv_rows(std::ostringstream& o, const DecaySeries& s, bool with_data) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (with_data) o << s.data_tag << ",";
    o << g17(s.times[i]) << "," << s.norm_tag << "," << g17(s.values[i]) << "," << g17(s.errors[i]) << ","
      << (s.certified[i] ? "true" : "false") << "\n";
  }
}

std::string claim_of(const BoundSpec& b) {
  switch (b.kind) {
    case BoundKind::UpperPowerLaw:
      return "power law, sigma = " + fmt("%.4g", b.sigma_theory) + " +- " + fmt("%.3g", b.sigma_tol) +
             ", r2 >= " + fmt("%.4g", b.r2_min);
    case BoundKind::LowerBound:
      return "sigma = " + fmt("%.4g", b.sigma_theory) + " +- " + fmt("%.3g", b.sigma_tol) +
             " and min t^2 v >= " + fmt("%.3g", b.plateau_fraction) + " x plateau";
    case BoundKind::Exponential:
      return "exponential, kappa >= " + fmt("%.3g", b.kappa_min) + ", r2_exp - r2_pow >= " + fmt("%.3g", b.r2_gap);
    case BoundKind::MidBand:
      return "exponential, kappa > 0, r2_exp >= " + fmt("%.3g", b.r2_min) + ", t^2 v decreasing to 0";
  }
  return "";
}

std::string measured_of(const Verdict& v) {
  std::string m;
  switch (v.kind) {
    case BoundKind::UpperPowerLaw:
      m = "sigma = " + fmt("%.5f", v.fit.exponent) + ", r2 = " + fmt("%.6f", v.fit.r_squared);
      break;
    case BoundKind::LowerBound:
      m = "sigma = " + fmt("%.5f", v.fit.exponent) + ", min t^2 v / plateau = " +
          fmt("%.4f", v.plateau > 0 ? v.min_t2 / v.plateau : 0.0);
      break;
    case BoundKind::Exponential:
    case BoundKind::MidBand:
      m = "kappa = " + fmt("%.5f", v.fit.exponent) + ", r2_exp = " + fmt("%.6f", v.fit.r_squared) +
          ", r2_pow = " + fmt("%.6f", v.alt_fit.r_squared);
      if (v.kind == BoundKind::MidBand) m += v.monotone ? ", decreasing" : ", not decreasing";
      break;
  }
  m += ", window spread " + fmt("%.3g", v.window.spread());
  if (!v.reason.empty() && !v.pass) m += " (" + v.reason + ")";
  return m;
}

bool is_block(WitnessKind k) { return k == WitnessKind::DyadicBlock || k == WitnessKind::DensityBlock; }

BoundSpec by_index(int j, const BoundSettings& b) {
  BoundSpec s;
  if (j >= 3) {
    s.kind = BoundKind::Exponential;
  } else {
    s.kind = BoundKind::MidBand;
    s.r2_min = b.midband_r2_min;
  }
  return s;
}

struct Outcome {
  bool failed = false;
  bool unconverged = false;
  int code() const { return failed ? kVerdictFailure : unconverged ? kNonConvergence : kPass; }
  void add(const Verdict& v) {
    if (v.withheld)
      unconverged = true;
    else if (!v.pass)
      failed = true;
  }
};

SweepOptions sweep_options(const RunConfig& c) {
  SweepOptions o;
  o.quad = c.quadrature;
  o.threads = c.threads;
  return o;
}

// ---------------------------------------------------------------- verify-eigen

int cmd_verify_eigen(const Context& ctx) {
  const EigenSettings& e = ctx.cfg.eigen;
  std::vector<double> rhos, ts, band;
  for (int i = 0; i < e.rho_points; ++i) {
    double r = e.rho_min + (e.rho_max - e.rho_min) * i / (e.rho_points - 1);
    if (std::abs(r - 2.0) > e.degenerate_band) rhos.push_back(r);
  }
  for (int i = 0; i < e.t_points; ++i) ts.push_back(e.t_max * i / (e.t_points - 1));
  for (double f : {-1.0, -0.5, -0.1, -1e-3, 0.0, 1e-3, 0.1, 0.5, 1.0}) band.push_back(2.0 + f * e.degenerate_band);

  struct Check {
    std::string name;
    double max_error = 0.0;
    double tolerance = 0.0;
    double at_rho = 0.0, at_t = 0.0;
    std::size_t samples = 0;
    void see(double err, double r, double t) {
      ++samples;
      if (!(err <= max_error)) {
        max_error = err;
        at_rho = r;
        at_t = t;
      }
    }
  };
  Check trace{"trace", 0, e.tolerance}, det{"determinant", 0, e.tolerance}, oracle{"oracle", 0, e.tolerance},
      degenerate{"oracle_degenerate_band", 0, e.degenerate_tolerance}, semigroup{"semigroup", 0, e.tolerance};

  std::vector<double> all = rhos;
  all.insert(all.end(), band.begin(), band.end());
  for (double r : all) {
    if (r <= 0) continue;
    EigenPair ev = eigenvalues(r);
    double r2 = r * r;
    trace.see(std::abs(ev.lambda_plus + ev.lambda_minus + r2) / r2, r, 0);
    det.see(std::abs(ev.lambda_plus * ev.lambda_minus - r2) / r2, r, 0);
    for (double t : ts) {
      PropagatorMatrix g = propagator(r, t);
      // Liouville: det e^{tM} = e^{t tr M}.  Measured against the size of
      // the products, since g_aa g_vv - g_av g_va cancels for large t rho^2.
      double d = std::exp(-t * r2);
      if (d > 1e-250) {
        double m = g.max_abs();
        det.see(std::abs(g.determinant() - d) / std::max(d, m * m), r, t);
      }
      PropagatorMatrix h = propagator(r, t / 2);
      semigroup.see(max_relative_error(multiply(h, h), g), r, t);
    }
  }
  for (double r : rhos)
    for (double t : ts) oracle.see(max_relative_error(propagator(r, t), expm_oracle(r, t)), r, t);
  for (double r : band)
    for (double t : ts) degenerate.see(max_relative_error(propagator(r, t), expm_oracle(r, t)), r, t);

  json j = ctx.header();
  j["checks"] = json::array();
  j["verdicts"] = json::array();
  bool all_pass = true;
  for (const Check* c : {&trace, &det, &oracle, &degenerate, &semigroup}) {
    bool pass = c->max_error <= c->tolerance;
    all_pass = all_pass && pass;
    j["checks"].push_back({{"name", c->name},
                           {"pass", pass},
                           {"max_error", c->max_error},
                           {"tolerance", c->tolerance},
                           {"worst_rho", c->at_rho},
                           {"worst_t", c->at_t},
                           {"samples", c->samples}});
    j["verdicts"].push_back(row("eigen " + c->name, "max relative error <= " + fmt("%.3g", c->tolerance),
                                "max relative error = " + fmt("%.3e", c->max_error), pass));
    if (!pass) ctx.err << "verify-eigen: check '" << c->name << "' failed: max error " << g17(c->max_error)
                       << " > " << g17(c->tolerance) << "\n";
  }
  j["pass"] = all_pass;
  ctx.write_json("verify_eigen.json", j);
  return all_pass ? kPass : kVerdictFailure;
}

// ---------------------------------------------------------------- besov-norm

int cmd_besov_norm(const Context& ctx) {
  const RunConfig& c = ctx.cfg;
  std::vector<double> times = c.time_grid.times();
  if (times.empty()) {
    ctx.err << "besov-norm: empty time grid\n";
    return kUsageError;
  }
  std::vector<NormEntry> entries;
  for (const auto& n : c.norms)
    if (n.kind == "besov") entries.push_back(n);
  if (entries.empty()) {
    ctx.err << "besov-norm: the config lists no norms of kind besov\n";
    return kUsageError;
  }
  PartitionProfile lp(c.transition_width);
  BlockCache cache;
  json j = ctx.header();
  j["witness"] = c.witness.tag();
  j["norms"] = json::array();
  j["verdicts"] = json::array();
  std::ostringstream csv;
  csv << "t,norm_tag,value,error_estimate,certified\n";
  Outcome outcome;
  struct Fitted {
    NormEntry e;
    double sigma;
  };
  std::vector<Fitted> fitted;
  for (const auto& e : entries) {
    NormSpec spec = to_norm_spec(e);
    DecaySeries s;
    s.norm_tag = spec.tag();
    s.data_tag = c.witness.tag();
    json rows = json::array();
    for (double t : times) {
      SpectralState st = witness_state(c.witness, t);
      BesovResult r = besov_norm_auto(st, lp, spec.besov, c.besov_j_min, c.besov_j_max, t, c.quadrature, &cache);
      bool cert = r.converged && r.certified;
      s.times.push_back(t);
      s.values.push_back(r.value);
      s.errors.push_back(r.error);
      s.certified.push_back(cert);
      s.upper_bound_only.push_back(r.upper_bound_only);
      s.locations.push_back(0.0);
      if (!cert) outcome.unconverged = true;
      json blocks = json::array();
      for (const auto& [bj, b] : r.blocks)
        blocks.push_back({{"j", bj}, {"value", b.value}, {"error", b.error}, {"converged", b.converged}});
      rows.push_back({{"t", t},
                      {"value", r.value},
                      {"error_estimate", r.error},
                      {"certified", cert},
                      {"upper_bound_only", r.upper_bound_only},
                      {"tail_certificate", r.tail_certificate},
                      {"j_min", r.j_min},
                      {"j_max", r.j_max},
                      {"blocks", blocks}});
    }
    csv_rows(csv, s, false);
    json nj{{"norm_tag", s.norm_tag}, {"rows", rows}};
    if (s.size() >= 5) {
      try {
        FitResult f = fit(s, FitModel::PowerLaw);
        nj["power_law_fit"] = fit_json(f);
        fitted.push_back({e, f.exponent});
      } catch (const std::invalid_argument& ex) {
        nj["power_law_fit"] = nullptr;
        nj["fit_error"] = ex.what();
      }
    }
    j["norms"].push_back(nj);
  }
  // fitted sigma must not increase with p among entries that differ only in p
  std::map<std::tuple<double, double, std::string>, std::vector<std::pair<double, double>>> groups;
  for (const auto& f : fitted) groups[{f.e.s, f.e.q, f.e.band}].push_back({f.e.p, f.sigma});
  for (auto& [key, v] : groups) {
    if (v.size() < 2) continue;
    std::sort(v.begin(), v.end());
    bool ok = true;
    std::string seq;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i && v[i].second > v[i - 1].second + 1e-9) ok = false;
      seq += (i ? ", " : "") + std::string("p=") + (std::isinf(v[i].first) ? "inf" : fmt("%g", v[i].first)) +
             ": " + fmt("%.4f", v[i].second);
    }
    if (!ok) outcome.failed = true;
    j["verdicts"].push_back(row("besov sigma monotone in p (s=" + fmt("%g", std::get<0>(key)) + ", band " +
                                    std::get<2>(key) + ")",
                                "fitted sigma nonincreasing in p", seq, ok));
  }
  ctx.write("besov_norm.csv", csv.str());
  ctx.write_json("besov_norm.json", j);
  return outcome.code();
}

// ---------------------------------------------------------------- decay-sweep

int cmd_decay_sweep(const Context& ctx) {
  const RunConfig& c = ctx.cfg;
  std::vector<double> times = c.time_grid.times();
  if (times.empty()) {
    ctx.err << "decay-sweep: empty time grid, nothing to do\n";
    return kUsageError;
  }
  if (c.norms.empty()) {
    ctx.err << "decay-sweep: the config lists no norms\n";
    return kUsageError;
  }
  // resolve everything before any work so config problems leave no files
  std::vector<std::optional<BoundSpec>> bounds;
  for (const auto& n : c.norms) bounds.push_back(resolve_bound(n, c.witness, c.bounds));

  json j = ctx.header();
  j["witness"] = c.witness.tag();
  j["times"] = times;
  j["series"] = json::array();
  j["verdict_details"] = json::array();
  j["verdicts"] = json::array();
  std::ostringstream csv;
  csv << "t,norm_tag,value,error_estimate,certified\n";
  Outcome outcome;
  for (std::size_t i = 0; i < c.norms.size(); ++i) {
    NormSpec spec = to_norm_spec(c.norms[i]);
    DecaySeries s = sweep(c.witness, spec, times, sweep_options(c));
    csv_rows(csv, s, false);
    j["series"].push_back(series_json(s));
    if (!s.acceptance_grade()) outcome.unconverged = true;
    if (!bounds[i]) continue;
    Verdict v = verify_bounds(s, *bounds[i], s.data_tag + " " + s.norm_tag);
    outcome.add(v);
    json d = verdict_json(v);
    d["sigma_theory"] = bounds[i]->sigma_theory;
    j["verdict_details"].push_back(d);
    j["verdicts"].push_back(row(v.name, claim_of(*bounds[i]), measured_of(v), v.pass, v.withheld));
  }
  ctx.write("decay_sweep.csv", csv.str());
  ctx.write_json("decay_sweep.json", j);
  return outcome.code();
}

// ---------------------------------------------------------------- lower-bound

int cmd_lower_bound(const Context& ctx) {
  const RunConfig& c = ctx.cfg;
  std::vector<double> times = c.time_grid.times();
  const auto& hs = c.lower_bound.halfspace_times;
  if (times.empty() || hs.empty()) {
    ctx.err << "lower-bound: empty time grid\n";
    return kUsageError;
  }
  BumpPsi psi = make_psi(c.witness.psi_margin);
  quad::Options q{1e-11, 0.0, pi / 4, 2000000};
  Outcome outcome;
  json j = ctx.header();
  j["verdicts"] = json::array();

  TransformResult Lp = halfspace_limit_constant(psi, 1, q), Lm = halfspace_limit_constant(psi, -1, q);
  if (!Lp.converged || !Lm.converged) outcome.unconverged = true;
  double L = std::abs(Lp.value);
  j["limit_constant"] = {{"re", Lp.value.real()}, {"im", Lp.value.imag()}, {"abs", L}, {"error", Lp.error},
                         {"converged", Lp.converged}};

  json neg = json::array(), pos = json::array();
  double conj_err = 0.0;
  bool conj_ok = true;
  std::vector<double> pos_abs;
  for (double t : hs) {
    HalfSpaceResult a = halfspace_witness_integral(psi, t, 1, RegionTag::HalfSpaceXiNeg, q);
    HalfSpaceResult b = halfspace_witness_integral(psi, t, -1, RegionTag::HalfSpaceXiNeg, q);
    HalfSpaceResult p = halfspace_witness_integral(psi, t, 1, RegionTag::HalfSpaceXiPos, q);
    if (!a.converged || !b.converged || !p.converged) outcome.unconverged = true;
    double d = std::abs(a.scaled - std::conj(b.scaled));
    conj_err = std::max(conj_err, d);
    if (d > a.error + b.error + 1e-10 * std::abs(a.scaled)) conj_ok = false;
    neg.push_back({{"t", t},
                   {"re", a.scaled.real()},
                   {"im", a.scaled.imag()},
                   {"abs", std::abs(a.scaled)},
                   {"abs_minus_branch", std::abs(b.scaled)},
                   {"error", a.error},
                   {"relative_to_limit", std::abs(std::abs(a.scaled) - L) / L}});
    pos_abs.push_back(std::abs(p.scaled));
    pos.push_back({{"t", t}, {"abs", std::abs(p.scaled)}, {"error", p.error},
                   {"ratio_to_first", std::abs(p.scaled) / pos_abs.front()}});
  }
  j["xi_neg"] = neg;
  j["xi_pos"] = pos;

  double last_rel = neg.back()["relative_to_limit"].get<double>();
  bool limit_ok = last_rel <= c.lower_bound.limit_tolerance;
  j["verdicts"].push_back(row("half-space limit at t = " + g17(hs.back()),
                              "t^1/2 abs(XiNeg) within " + fmt("%.3g", c.lower_bound.limit_tolerance) + " of abs(L)",
                              "abs(L) = " + fmt("%.6g", L) + ", relative gap " + fmt("%.4g", last_rel), limit_ok));
  double ratio = pos_abs.back() / pos_abs.front();
  bool pos_ok = ratio <= c.lower_bound.xipos_ratio;
  j["verdicts"].push_back(row("XiPos extra decay", "t^1/2 abs(XiPos) ratio last/first <= " +
                                                       fmt("%.3g", c.lower_bound.xipos_ratio),
                              "ratio = " + fmt("%.3e", ratio), pos_ok));
  j["verdicts"].push_back(row("branch conjugation", "sign - equals the conjugate of sign +",
                              "max difference " + fmt("%.3e", conj_err), conj_ok));
  outcome.failed = outcome.failed || !limit_ok || !pos_ok || !conj_ok;

  json cosine = json::array();
  for (double t : hs) {
    TransformResult r = gaussian_cosine_form(psi, t, c.witness.gaussian, q);
    if (!r.converged) outcome.unconverged = true;
    cosine.push_back({{"t", t}, {"t2_value_re", r.value.real()}, {"t2_value_im", r.value.imag()},
                      {"t2_abs", std::abs(r.value)}, {"error", r.error}, {"converged", r.converged}});
  }
  j["gaussian_cosine_form"] = cosine;

  std::ostringstream csv;
  csv << "data_tag,t,norm_tag,value,error_estimate,certified\n";
  j["series"] = json::array();
  j["verdict_details"] = json::array();
  NormSpec linf;
  linf.kind = NormKind::Linf;
  for (WitnessKind k : {WitnessKind::Psi, WitnessKind::Gaussian}) {
    Witness w = c.witness;
    w.kind = k;
    DecaySeries s = sweep(w, linf, times, sweep_options(c));
    csv_rows(csv, s, true);
    json sj = series_json(s);
    for (std::size_t i = 0; i < s.size(); ++i)
      sj["points"][i]["t2_value"] = s.times[i] * s.times[i] * s.values[i];
    j["series"].push_back(sj);
    BoundSpec b{BoundKind::LowerBound, -2.0, c.bounds.lower_sigma_tol};
    b.plateau_fraction = c.bounds.plateau_fraction;
    Verdict v = verify_bounds(s, b, s.data_tag + " " + s.norm_tag + " lower bound");
    outcome.add(v);
    j["verdict_details"].push_back(verdict_json(v));
    j["verdicts"].push_back(row(v.name, claim_of(b), measured_of(v), v.pass, v.withheld));
    if (k == WitnessKind::Psi && s.size() >= 3) {
      // the sup sits at x1 = -t, where t^2 times the field tends to (2 pi)^{-3/2} L
      double expect = kFourierNorm * L, gap = std::abs(v.plateau - expect) / expect;
      bool ok = gap <= c.lower_bound.limit_tolerance;
      outcome.failed = outcome.failed || !ok;
      j["psi_plateau"] = {{"plateau", v.plateau}, {"expected", expect}, {"relative_gap", gap}};
      j["verdicts"].push_back(row("psi t^2 sup plateau vs limit constant",
                                  "plateau within " + fmt("%.3g", c.lower_bound.limit_tolerance) +
                                      " of (2 pi)^{-3/2} abs(L)",
                                  "plateau " + fmt("%.6g", v.plateau) + ", expected " + fmt("%.6g", expect) +
                                      ", relative gap " + fmt("%.3e", gap),
                                  ok));
    }
  }
  ctx.write("lower_bound.csv", csv.str());
  ctx.write_json("lower_bound.json", j);
  return outcome.code();
}

// ---------------------------------------------------------------- midband

int cmd_midband(const Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const MidbandSettings& m = c.midband;
  std::vector<double> mid_t = m.time_grid.times(), high_t = m.high_time_grid.times();
  if ((!m.j_values.empty() && mid_t.empty()) || (!m.high_j_values.empty() && high_t.empty())) {
    ctx.err << "midband: empty time grid\n";
    return kUsageError;
  }
  Outcome outcome;
  json j = ctx.header();
  j["series"] = json::array();
  j["verdict_details"] = json::array();
  j["verdicts"] = json::array();
  std::ostringstream csv;
  csv << "data_tag,t,norm_tag,value,error_estimate,certified\n";

  auto one = [&](const Witness& w, const NormSpec& n, const std::vector<double>& ts, BoundSpec b) {
    DecaySeries s = sweep(w, n, ts, sweep_options(c));
    csv_rows(csv, s, true);
    json sj = series_json(s);
    for (std::size_t i = 0; i < s.size(); ++i)
      sj["points"][i]["t2_value"] = s.times[i] * s.times[i] * s.values[i];
    j["series"].push_back(sj);
    Verdict v = verify_bounds(s, b, s.data_tag + " " + s.norm_tag);
    outcome.add(v);
    j["verdict_details"].push_back(verdict_json(v));
    j["verdicts"].push_back(row(v.name, claim_of(b), measured_of(v), v.pass, v.withheld));
  };

  Witness g = c.witness;
  g.kind = WitnessKind::Gaussian;
  for (int bj : m.j_values) {
    NormSpec n;
    n.kind = NormKind::BlockL2;
    n.j = bj;
    BoundSpec b;
    b.kind = BoundKind::MidBand;
    b.r2_min = c.bounds.midband_r2_min;
    one(g, n, mid_t, b);
  }
  for (int bj : m.high_j_values) {
    Witness w = c.witness;
    w.kind = WitnessKind::DyadicBlock;
    w.j = bj;
    NormSpec n;
    n.kind = NormKind::L2;
    BoundSpec b;
    b.kind = BoundKind::Exponential;
    b.kappa_min = c.bounds.kappa_min;
    b.r2_gap = c.bounds.r2_gap;
    one(w, n, high_t, b);
  }
  ctx.write("midband.csv", csv.str());
  ctx.write_json("midband.json", j);
  return outcome.code();
}

// ---------------------------------------------------------------- report

int cmd_report(const Context& ctx) {
  const RunConfig& c = ctx.cfg;
  std::vector<std::string> missing;
  std::vector<std::pair<std::string, json>> inputs;
  for (const auto& name : c.report_inputs) {
    fs::path p = fs::path(name).is_absolute() ? fs::path(name) : ctx.dir / name;
    std::ifstream f(p, std::ios::binary);
    if (!f) {
      missing.push_back(p.string());
      continue;
    }
    try {
      inputs.emplace_back(name, json::parse(f));
    } catch (const json::parse_error& e) {
      ctx.err << "report: cannot parse " << p.string() << ": " << e.what() << "\n";
      return kUsageError;
    }
  }
  if (!missing.empty()) {
    ctx.err << "report: missing artifacts:\n";
    for (const auto& m : missing) ctx.err << "  " << m << "\n";
    return kUsageError;
  }

  json rows = json::array(), sources = json::array();
  bool any_fail = false, any_withheld = false;
  for (const auto& [name, in] : inputs) {
    sources.push_back({{"file", name},
                       {"command", in.value("command", "")},
                       {"config_hash", in.value("config_hash", "")},
                       {"tool_version", in.value("tool_version", "")},
                       {"format_version", in.value("format_version", 0)}});
    if (!in.contains("verdicts")) continue;
    for (const auto& v : in["verdicts"]) {
      json r = v;
      r["source"] = name;
      bool pass = v.value("pass", false), withheld = v.value("withheld", false);
      if (withheld)
        any_withheld = true;
      else if (!pass)
        any_fail = true;
      rows.push_back(r);
    }
  }
  std::string overall = any_fail ? "FAIL" : any_withheld ? "WITHHELD" : "PASS";

  json j = ctx.header();
  j["overall"] = overall;
  j["sources"] = sources;
  j["rows"] = rows;
  j["passed"] = std::count_if(rows.begin(), rows.end(), [](const json& r) { return r.value("pass", false); });
  j["total"] = rows.size();

  std::ostringstream md;
  md << "# decay_lab report\n\n";
  md << "- tool: " << kToolVersion << "\n";
  md << "- config hash: " << hash_hex(config_hash(c)) << "\n";
  md << "- generated: " << j["generated_at"].get<std::string>() << "\n";
  md << "- overall: **" << overall << "** (" << j["passed"].get<long>() << " of " << rows.size()
     << " checks pass)\n\n";
  md << "| source | check | expected | measured | result |\n";
  md << "|---|---|---|---|---|\n";
  auto cell = [](std::string s) {
    for (auto& ch : s)
      if (ch == '|' || ch == '\n') ch = ' ';
    return s;
  };
  for (const auto& r : rows) {
    std::string res = r.value("withheld", false) ? "WITHHELD" : r.value("pass", false) ? "PASS" : "FAIL";
    md << "| " << cell(r.value("source", "")) << " | " << cell(r.value("name", "")) << " | "
       << cell(r.value("claim", "")) << " | " << cell(r.value("measured", "")) << " | " << res << " |\n";
  }
  md << "\n## Inputs\n\n";
  for (const auto& s : sources)
    md << "- " << s["file"].get<std::string>() << ": command " << s["command"].get<std::string>()
       << ", config hash " << s["config_hash"].get<std::string>() << "\n";

  ctx.write("report.md", md.str());
  ctx.write_json("report.json", j);
  return any_fail ? kVerdictFailure : any_withheld ? kNonConvergence : kPass;
}

}  // namespace

// Which verdict, if any, a (witness, norm) pair is checked against.
std::optional<BoundSpec> resolve_bound(const NormEntry& e, const Witness& w, const BoundSettings& b) {
  BoundSpec s;
  s.sigma_tol = b.sigma_tol;
  s.r2_min = b.r2_min;
  s.plateau_fraction = b.plateau_fraction;
  s.kappa_min = b.kappa_min;
  s.r2_gap = b.r2_gap;
  double p = e.kind == "Linf" ? inf : e.kind == "besov" ? e.p : 2.0;
  double sigma_default = theoretical_rate(p);

  std::string kind = e.bound;
  if (kind == "none") return std::nullopt;
  if (kind == "auto") {
    if (w.kind == WitnessKind::Zero) return std::nullopt;
    int j = e.kind == "block_l2" ? e.j : w.j;
    if (e.kind == "block_l2" || is_block(w.kind)) {
      if (j < 0) return std::nullopt;
      BoundSpec r = by_index(j, b);
      r.kappa_min = b.kappa_min;
      r.r2_gap = b.r2_gap;
      return r;
    }
    if (e.band == "high") {
      kind = "exponential";
    } else if (e.kind == "Linf") {
      if (w.kind == WitnessKind::Heat) {
        kind = "upper_power_law";
        sigma_default = -1.5;
      } else {
        kind = "lower_bound";
      }
    } else {
      // the anisotropic bump is not an extremiser for p < inf
      if (w.kind == WitnessKind::Psi) return std::nullopt;
      kind = "upper_power_law";
    }
  }
  s.sigma_theory = e.sigma_theory.value_or(sigma_default);
  if (kind == "upper_power_law") {
    s.kind = BoundKind::UpperPowerLaw;
  } else if (kind == "lower_bound") {
    s.kind = BoundKind::LowerBound;
    s.sigma_tol = b.lower_sigma_tol;
  } else if (kind == "exponential") {
    s.kind = BoundKind::Exponential;
  } else {
    s.kind = BoundKind::MidBand;
    s.r2_min = b.midband_r2_min;
  }
  return s;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical decay laboratory for the linearised compressible system", "decay_lab"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, output_dir;
  std::optional<int> threads;
  app.add_option("--config", config_path, "JSON config file (see print-defaults)");
  app.add_option("--threads", threads, "worker threads; overrides DECAY_LAB_THREADS and the config")
      ->check(CLI::PositiveNumber);
  app.add_option("--output-dir", output_dir, "directory for CSV / JSON / markdown outputs");

  const std::vector<std::pair<std::string, std::string>> commands{
      {"verify-eigen", "eigenvalue and propagator invariant suite"},
      {"besov-norm", "Besov norms of the witness over the time grid"},
      {"decay-sweep", "norm sweeps with fitted rates and verdicts"},
      {"lower-bound", "half-space integrals, limit constant and t^2 sup tables"},
      {"midband", "mid- and high-frequency block decay"},
      {"report", "aggregate earlier outputs into report.md / report.json"},
      {"print-defaults", "print the default (or the loaded) config"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kPass : kUsageError;
  }
  std::string command = app.get_subcommands().front()->get_name();

  RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = load_config(config_path);
    if (const char* env = std::getenv("DECAY_LAB_THREADS"); env && !threads) {
      char* end = nullptr;
      long n = std::strtol(env, &end, 10);
      if (end == env || *end != '\0' || n < 1 || n > 4096)
        throw ConfigError(std::string("DECAY_LAB_THREADS: expected a positive integer, got '") + env + "'");
      cfg.threads = int(n);
    }
    if (threads) cfg.threads = *threads;
    if (!output_dir.empty()) cfg.output_dir = output_dir;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kUsageError;
  }

  if (command == "print-defaults") {
    out << dump_config(cfg);
    return kPass;
  }

  Context ctx{cfg, command, fs::path(cfg.output_dir), out, err};
  try {
    if (command == "verify-eigen") return cmd_verify_eigen(ctx);
    if (command == "besov-norm") return cmd_besov_norm(ctx);
    if (command == "decay-sweep") return cmd_decay_sweep(ctx);
    if (command == "lower-bound") return cmd_lower_bound(ctx);
    if (command == "midband") return cmd_midband(ctx);
    if (command == "report") return cmd_report(ctx);
  } catch (const std::invalid_argument& e) {
    err << command << ": " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << command << ": " << e.what() << "\n";
    return kNonConvergence;
  }
  return kUsageError;
}

}  // namespace decaylab::cli
