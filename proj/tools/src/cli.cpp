#include "pnpbif_cli/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "pnpbif/bifurcation.hpp"
#include "pnpbif/errors.hpp"
#include "pnpbif/geometry.hpp"
#include "pnpbif/governing.hpp"
#include "pnpbif_cli/output.hpp"

namespace pnpbif::cli {

namespace {

using nlohmann::ordered_json;

/// Error that maps to an exit code without being a library error.
struct Exit {
  int code;
  std::string message;
};

// ---------------------------------------------------------------------------
// shared option groups

struct GeometryOptions {
  double alpha = 1.0 / 3.0;
  double beta = 2.0 / 3.0;
  double a = 1.0 / 3.0;
  double b = 2.0 / 3.0;
  std::string profile;

  void add(CLI::App& app) {
    app.add_option("--alpha", alpha, "alpha = H(a)/H(1), ignored with --profile")
        ->capture_default_str();
    app.add_option("--beta", beta, "beta = H(b)/H(1), ignored with --profile")
        ->capture_default_str();
    app.add_option("--a", a, "left end of the charged section")->capture_default_str();
    app.add_option("--b", b, "right end of the charged section")->capture_default_str();
    app.add_option("--profile", profile, "tabulated 'x h D' profile file");
  }

  ChannelProfile build() const {
    if (profile.empty()) return ChannelProfile::from_coefficients(a, b, alpha, beta);
    return make_channel_profile(load_profile(profile), {a, b, 1.0});
  }
};

struct SolverOptions {
  SolverConfig cfg;

  void add(CLI::App& app) {
    app.add_option("--residual-tol", cfg.residual_tol, "residual max-norm tolerance")
        ->capture_default_str();
    app.add_option("--step-tol", cfg.step_tol, "step / bracket tolerance")->capture_default_str();
    app.add_option("--max-iters", cfg.max_iters, "iteration limit per solve")
        ->capture_default_str();
    app.add_option("--workers", cfg.workers, "threads for multi-start (0 = all cores)")
        ->capture_default_str();
  }
};

struct SweepArgs {
  int k = 1;
  std::vector<double> r_values{1.0, 2.0, 3.0, 4.0};
  int l_count = 20;
  double l_max = 10.0;
  std::vector<int> grid{5, 7, 7};

  void add(CLI::App& app) {
    app.add_option("--k", k, "species of the bifurcating ratio (1 or 2)")
        ->check(CLI::IsMember({1, 2}))
        ->capture_default_str();
    app.add_option("--r", r_values, "nominal right concentrations")
        ->delimiter(',')
        ->capture_default_str();
    app.add_option("--l-count", l_count, "l nodes per branch")->capture_default_str();
    app.add_option("--l-max", l_max, "upper end of the l range")->capture_default_str();
    app.add_option("--grid", grid, "start counts A,I,V")
        ->delimiter(',')
        ->expected(3)
        ->capture_default_str();
  }

  SweepOptions options() const {
    if (l_count < 1) throw Exit{kUsage, "--l-count must be >= 1"};
    if (!(l_max > 0.0)) throw Exit{kUsage, "--l-max must be > 0"};
    for (double r : r_values) {
      if (!(r > 0.0)) throw Exit{kUsage, "every --r value must be > 0"};
    }
    SweepOptions o;
    o.l_upper = l_max;
    o.l_count = l_count;
    for (std::size_t i = 0; i < 3; ++i) {
      if (grid[i] < 1) throw Exit{kUsage, "--grid counts must be >= 1"};
      o.aiv_box.counts[i] = grid[i];
    }
    return o;
  }
};

Species species(int k) { return k == 2 ? Species::anion : Species::cation; }

// Writes to `path`, or to `fallback` when the path is empty.
void emit(const std::string& path, std::ostream& fallback,
          const std::function<void(std::ostream&)>& body) {
  if (path.empty()) {
    body(fallback);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Exit{kUsage, "cannot write " + path};
  body(f);
}

std::string ratio_field(const std::optional<double>& v) {
  return v ? fmt17(*v) : std::string("degenerate");
}

ordered_json ratio_json(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json("degenerate");
}

// ---------------------------------------------------------------------------
// flux

struct FluxArgs {
  std::optional<double> l, r, Q0, L, R;
  double V = 0.0;
  std::string format = "csv";
  std::string output;
  GeometryOptions geo;
  SolverOptions solver;
};

void add_flux(CLI::App& app, FluxArgs& a) {
  app.add_option("--l", a.l, "scaled left concentration L/Q0");
  app.add_option("--r", a.r, "scaled right concentration R/Q0");
  app.add_option("--V", a.V, "dimensionless potential")->required();
  app.add_option("--Q0", a.Q0, "charge level; switches to unscaled output with --L/--R");
  app.add_option("--L", a.L, "left concentration (unscaled mode)");
  app.add_option("--R", a.R, "right concentration (unscaled mode)");
  app.add_option("--format", a.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app.add_option("--output", a.output, "output file (default stdout)");
  a.geo.add(app);
  a.solver.add(app);
}

int cmd_flux(const FluxArgs& a, std::ostream& out) {
  const auto cp = a.geo.build();
  const bool unscaled = a.Q0.has_value();
  std::vector<std::string> header;
  std::vector<std::vector<double>> numeric;
  std::vector<std::array<std::optional<double>, 2>> ratios;
  std::vector<double> residuals;

  if (unscaled) {
    if (a.l || a.r) throw Exit{kUsage, "--l/--r cannot be combined with --Q0"};
    if (!a.L || !a.R) throw Exit{kUsage, "--Q0 needs --L and --R"};
    PhysicalScaling ps;
    ps.Q0 = *a.Q0;
    ps.L = *a.L;
    ps.R = *a.R;
    ps.validate();
    header = {"A", "B", "I", "F", "J1", "J2", "J1_0", "J2_0", "lambda1", "lambda2"};
    std::vector<PhysicalFluxes> rows;
    try {
      rows = fluxes_for_Q0(*a.Q0, *a.L, *a.R, a.V, cp, a.solver.cfg);
    } catch (const SolverError&) {
    }
    for (const auto& p : rows) {
      numeric.push_back({p.A, p.B, p.I, p.F, p.J1, p.J2, p.J1_0, p.J2_0});
      ratios.push_back({p.lambda1, p.lambda2});
    }
  } else {
    if (a.L || a.R) throw Exit{kUsage, "--L/--R need --Q0"};
    if (!a.l || !a.r) throw Exit{kUsage, "--l and --r are required (or --Q0 --L --R)"};
    const ScaledBoundary bc(*a.l, *a.r, a.V);
    header = {"A",    "B",    "I",       "F",       "j1",      "j2",
              "j1_0", "j2_0", "lambda1", "lambda2", "residual"};
    for (const auto& s : solve_governing(bc, cp, a.solver.cfg)) {
      numeric.push_back({s.state.A, s.state.B, s.state.I, s.state.f, s.fluxes.j1, s.fluxes.j2,
                         s.fluxes.j1_0, s.fluxes.j2_0});
      ratios.push_back({s.fluxes.lambda1, s.fluxes.lambda2});
      residuals.push_back(s.residual);
    }
  }

  emit(a.output, out, [&](std::ostream& os) {
    if (a.format == "json") {
      ordered_json arr = ordered_json::array();
      for (std::size_t i = 0; i < numeric.size(); ++i) {
        ordered_json o;
        for (std::size_t c = 0; c < numeric[i].size(); ++c) o[header[c]] = numeric[i][c];
        o[header[8]] = ratio_json(ratios[i][0]);
        o[header[9]] = ratio_json(ratios[i][1]);
        if (!unscaled) o["residual"] = residuals[i];
        arr.push_back(o);
      }
      os << arr.dump(2) << '\n';
      return;
    }
    CsvWriter w(os);
    w.row(header);
    for (std::size_t i = 0; i < numeric.size(); ++i) {
      std::vector<std::string> row;
      for (double v : numeric[i]) row.push_back(fmt17(v));
      row.push_back(ratio_field(ratios[i][0]));
      row.push_back(ratio_field(ratios[i][1]));
      if (!unscaled) row.push_back(fmt17(residuals[i]));
      w.row(row);
    }
  });
  return numeric.empty() ? kNoSolution : kSuccess;
}

// ---------------------------------------------------------------------------
// bifurcate / sweep

const std::vector<std::string> kPointColumns = {
    "k", "sigma", "r",  "l",       "A",        "B",         "I",
    "V", "j1",    "j2", "lambda2", "residual", "lam_check", "dlam_dV_check"};

std::vector<std::string> point_fields(const BifurcationPoint& p) {
  return {std::to_string(static_cast<int>(p.k)),
          fmt17(p.sigma),
          fmt17(p.r),
          fmt17(p.l),
          fmt17(p.A),
          fmt17(p.B),
          fmt17(p.I),
          fmt17(p.V),
          fmt17(p.j1),
          fmt17(p.j2),
          fmt17(p.lambda2()),
          fmt17(p.residual),
          fmt17(p.validation.lambda_k),
          fmt17(p.validation.dlambda_dV)};
}

void write_rejects(std::ostream& os, int k, double sigma,
                   const std::vector<BifurcationReject>& rejects, bool header) {
  CsvWriter w(os);
  if (header) w.row({"k", "sigma", "l", "A", "I", "V", "reason"});
  for (const auto& r : rejects) {
    w.row({std::to_string(k), fmt17(sigma), fmt17(r.x[0]), fmt17(r.x[1]), fmt17(r.x[2]),
           fmt17(r.x[3]), r.reason});
  }
}

struct BifurcateArgs {
  int k = 1;
  std::optional<double> sigma;
  std::vector<int> grid{5, 5, 7, 7};
  std::vector<double> box{0.0, 10.0, 0.0, 10.0, -60.0, 60.0, -80.0, 80.0};
  std::string output;
  std::string rejects;
  GeometryOptions geo;
  SolverOptions solver;
};

void add_bifurcate(CLI::App& app, BifurcateArgs& a) {
  app.add_option("--k", a.k, "species of the bifurcating ratio (1 or 2)")
      ->check(CLI::IsMember({1, 2}))
      ->capture_default_str();
  app.add_option("--sigma", a.sigma, "fixed ratio l/r")->required();
  app.add_option("--grid", a.grid, "start counts l,A,I,V")
      ->delimiter(',')
      ->expected(4)
      ->capture_default_str();
  app.add_option("--box", a.box, "start box l_lo,l_hi,A_lo,A_hi,I_lo,I_hi,V_lo,V_hi")
      ->delimiter(',')
      ->expected(8)
      ->capture_default_str();
  app.add_option("--output", a.output, "CSV file for accepted points (default stdout)");
  app.add_option("--rejects", a.rejects,
                 "CSV file for rejected roots (default OUTPUT.rejects.csv, or stderr)");
  a.geo.add(app);
  a.solver.add(app);
}

int cmd_bifurcate(const BifurcateArgs& a, std::ostream& out, std::ostream& err) {
  const double sigma = *a.sigma;
  if (!(sigma > 0.0) || !(std::abs(std::log(sigma)) > 1e-8)) {
    throw Exit{kUsage, "--sigma must be positive and differ from 1 (|ln sigma| > 1e-8)"};
  }
  const auto cp = a.geo.build();
  MultiStartBox box;
  for (std::size_t d = 0; d < 4; ++d) {
    box.lower.push_back(a.box[2 * d]);
    box.upper.push_back(a.box[2 * d + 1]);
    box.counts.push_back(a.grid[d]);
  }
  box.validate();

  const auto res = solve_bifurcation(species(a.k), sigma, cp, box, a.solver.cfg);
  for (const auto& w : res.warnings) err << "warning: " << w << '\n';

  emit(a.output, out, [&](std::ostream& os) {
    CsvWriter w(os);
    w.row(kPointColumns);
    for (const auto& p : res.points) w.row(point_fields(p));
  });
  std::string rejects_path = a.rejects;
  if (rejects_path.empty() && !a.output.empty()) rejects_path = a.output + ".rejects.csv";
  if (!rejects_path.empty()) {
    emit(rejects_path, err, [&](std::ostream& os) { write_rejects(os, a.k, sigma, res.rejects, true); });
  } else {
    for (const auto& r : res.rejects) err << "rejected: " << r.reason << '\n';
  }
  return res.points.empty() ? kNoSolution : kSuccess;
}

struct SweepCmdArgs {
  SweepArgs sweep;
  std::string output;
  std::string summary;
  GeometryOptions geo;
  SolverOptions solver;
};

const std::vector<std::string> kBranchColumns = {
    "branch_r", "k", "sigma", "r",       "l",        "A",         "B",           "I",
    "V",        "j1", "j2",   "lambda2", "residual", "lam_check", "dlam_dV_check"};

void write_branches(std::ostream& os, const std::vector<Branch>& branches) {
  CsvWriter w(os);
  w.row(kBranchColumns);
  for (const auto& b : branches) {
    for (const auto& p : b.points) {
      auto f = point_fields(p);
      f.insert(f.begin(), fmt17(b.r_nominal));
      w.row(f);
    }
  }
}

ordered_json summary_json(const Branch& b) {
  const auto& s = b.summary;
  ordered_json o;
  o["r"] = b.r_nominal;
  o["points"] = s.points;
  o["rejects"] = b.rejects.size();
  o["l_star"] = s.l_star ? ordered_json(*s.l_star) : ordered_json(nullptr);
  o["l_star_interior"] = s.l_star_interior;
  auto mids = [](const std::vector<SignChange>& v) {
    std::vector<double> m;
    for (const auto& c : v) m.push_back(c.mid());
    return m;
  };
  o["j1_sign_changes"] = mids(s.j1_sign_changes);
  o["j2_sign_changes"] = mids(s.j2_sign_changes);
  o["j1_increasing"] = to_string(s.j1_increasing);
  o["j2_decreasing"] = to_string(s.j2_decreasing);
  o["lambda2_unimodal_in_V"] = to_string(s.lambda2_unimodal_in_V);
  o["lambda2_unimodal_in_I"] = to_string(s.lambda2_unimodal_in_I);
  o["lambda2_unimodal_in_l"] = to_string(s.lambda2_unimodal_in_l);
  o["sign_V_equals_sign_I"] = to_string(s.sign_V_equals_sign_I);
  o["V_negative"] = to_string(s.V_negative);
  o["I_negative"] = to_string(s.I_negative);
  o["flux_signs_around_l_star"] = to_string(s.flux_signs_around_l_star);
  o["max_l_step"] = s.max_grid_step;
  return o;
}

void add_sweep(CLI::App& app, SweepCmdArgs& a) {
  a.sweep.add(app);
  app.add_option("--output", a.output, "branch CSV (default stdout)");
  app.add_option("--summary", a.summary, "JSON file with per-branch summaries");
  a.geo.add(app);
  a.solver.add(app);
}

int cmd_sweep(const SweepCmdArgs& a, std::ostream& out) {
  const auto opt = a.sweep.options();
  const auto cp = a.geo.build();
  const auto branches = branch_sweep(species(a.sweep.k), a.sweep.r_values, cp, a.solver.cfg, opt);
  emit(a.output, out, [&](std::ostream& os) { write_branches(os, branches); });
  if (!a.summary.empty()) {
    emit(a.summary, out, [&](std::ostream& os) {
      ordered_json arr = ordered_json::array();
      for (const auto& b : branches) arr.push_back(summary_json(b));
      os << arr.dump(2) << '\n';
    });
  }
  std::size_t total = 0;
  for (const auto& b : branches) total += b.points.size();
  return total == 0 ? kNoSolution : kSuccess;
}

// ---------------------------------------------------------------------------
// check-conjectures

struct ClauseRow {
  std::string branch;
  std::string group;
  std::string clause;
  bool hard;
  Verdict verdict;
  std::string detail;
};

Verdict verdict_of(bool ok) { return ok ? Verdict::pass : Verdict::fail; }

std::string join(const std::vector<SignChange>& v) {
  std::string s;
  for (const auto& c : v) s += (s.empty() ? "" : " ") + fmt17(c.mid());
  return s.empty() ? "none" : s;
}

// Both fluxes change sign exactly once, and the two crossings and the
// lambda2 maximiser lie within one local l-step (the bracketing interval).
Verdict single_flux_zero(const BranchSummary& s) {
  if (s.points < 2 || !s.l_star) return Verdict::skipped;
  if (s.j1_sign_changes.size() != 1 || s.j2_sign_changes.size() != 1) return Verdict::fail;
  const auto& c1 = s.j1_sign_changes[0];
  const auto& c2 = s.j2_sign_changes[0];
  const double step = std::max(c1.width(), c2.width());
  return verdict_of(std::abs(c1.mid() - c2.mid()) <= step &&
                    std::abs(c1.mid() - *s.l_star) <= step &&
                    std::abs(c2.mid() - *s.l_star) <= step);
}

std::vector<ClauseRow> conjecture_rows(const std::vector<Branch>& branches) {
  std::vector<ClauseRow> rows;
  for (const auto& b : branches) {
    const auto& s = b.summary;
    const std::string br = fmt17(b.r_nominal);
    const std::string npts = std::to_string(s.points) + " points";
    const std::string lstar = s.l_star ? "l*=" + fmt17(*s.l_star) : "l*=none";
    rows.push_back({br, "branch", "has accepted points", true, verdict_of(s.points > 0), npts});
    rows.push_back({br, "critical-signs", "V < 0 at every point", true, s.V_negative, npts});
    rows.push_back({br, "critical-signs", "I < 0 at every point", true, s.I_negative, npts});
    rows.push_back({br, "lambda2-shape", "lambda2 unimodal in V with interior max", true,
                    s.lambda2_unimodal_in_V, npts});
    rows.push_back({br, "lambda2-shape", "lambda2 unimodal in I with interior max", true,
                    s.lambda2_unimodal_in_I, npts});
    rows.push_back({br, "lambda2-shape", "lambda2 unimodal in l with interior max", true,
                    s.lambda2_unimodal_in_l, lstar});
    rows.push_back({br, "flux-monotonicity", "j1 strictly increasing in l", true, s.j1_increasing,
                    npts});
    rows.push_back({br, "flux-monotonicity", "j2 strictly decreasing in l", true,
                    s.j2_decreasing, npts});
    rows.push_back({br, "flux-signs", "j1<0<j2 below l*, j2<0<j1 above l*", true,
                    s.points ? s.flux_signs_around_l_star : Verdict::skipped, lstar});
    rows.push_back({br, "flux-signs", "j1 and j2 change sign once, within one l-step of l*", true,
                    single_flux_zero(s),
                    lstar + "; j1 zero at " + join(s.j1_sign_changes) + "; j2 zero at " +
                        join(s.j2_sign_changes)});
    rows.push_back({br, "sign-agreement", "sign(V) = sign(I) at every point", true,
                    s.sign_V_equals_sign_I, npts});
  }
  for (const auto& o : cross_branch_orderings(branches)) {
    rows.push_back({"all", "cross-r", o.clause, false, o.verdict, o.detail});
  }
  return rows;
}

struct CheckArgs {
  SweepArgs sweep;
  std::string output;
  std::string points;
  GeometryOptions geo;
  SolverOptions solver;
};

void add_check(CLI::App& app, CheckArgs& a) {
  a.sweep.add(app);
  app.add_option("--output", a.output, "clause table CSV (default stdout)");
  app.add_option("--points", a.points, "branch CSV with every accepted point");
  a.geo.add(app);
  a.solver.add(app);
}

int cmd_check(const CheckArgs& a, std::ostream& out, std::ostream& err) {
  const auto opt = a.sweep.options();
  const auto cp = a.geo.build();
  const auto branches = branch_sweep(species(a.sweep.k), a.sweep.r_values, cp, a.solver.cfg, opt);
  const auto rows = conjecture_rows(branches);

  emit(a.output, out, [&](std::ostream& os) {
    CsvWriter w(os);
    w.row({"branch_r", "group", "clause", "kind", "verdict", "detail"});
    for (const auto& r : rows) {
      w.row({r.branch, r.group, r.clause, r.hard ? "hard" : "reported", to_string(r.verdict),
             r.detail});
    }
  });
  if (!a.points.empty()) {
    emit(a.points, out, [&](std::ostream& os) { write_branches(os, branches); });
  }

  int failures = 0;
  for (const auto& r : rows) {
    if (r.hard && r.verdict == Verdict::fail) {
      if (failures++ == 0) err << "failed hard clauses:\n";
      err << "  r=" << r.branch << " [" << r.group << "] " << r.clause << '\n';
    }
  }
  return failures ? kConjectureFailure : kSuccess;
}

// ---------------------------------------------------------------------------
// geometry

struct GeometryArgs {
  std::string profile;
  bool uniform = false;
  double a = 1.0 / 3.0;
  double b = 2.0 / 3.0;
  std::string output;
};

void add_geometry(CLI::App& app, GeometryArgs& a) {
  auto* p = app.add_option("--profile", a.profile, "tabulated 'x h D' profile file");
  app.add_flag("--uniform", a.uniform, "use D*h = 1")->excludes(p);
  app.add_option("--a", a.a, "left end of the charged section")->capture_default_str();
  app.add_option("--b", a.b, "right end of the charged section")->capture_default_str();
  app.add_option("--output", a.output, "JSON file (default stdout)");
}

int cmd_geometry(const GeometryArgs& a, std::ostream& out) {
  const auto prof = a.profile.empty() ? TabulatedProfile::uniform() : load_profile(a.profile);
  const auto g = alpha_beta(prof, {a.a, a.b, 1.0});
  ordered_json o;
  o["alpha"] = g.alpha;
  o["beta"] = g.beta;
  o["H_a"] = g.H_a;
  o["H_b"] = g.H_b;
  o["H_1"] = g.H_1;
  emit(a.output, out, [&](std::ostream& os) { os << o.dump(2) << '\n'; });
  return kSuccess;
}

// ---------------------------------------------------------------------------
// plot

struct PlotArgs {
  std::string input;
  std::string series;
  std::string output;
  std::string group_by;
};

void add_plot(CLI::App& app, PlotArgs& a) {
  app.add_option("--input", a.input, "branch CSV from bifurcate or sweep")->required();
  app.add_option("--series", a.series, "what to draw")
      ->required()
      ->check(CLI::IsMember({"lambda2-vs-V", "lambda2-vs-l", "j-vs-l", "I-vs-l", "V-vs-l"}));
  app.add_option("--output", a.output, "SVG file (default stdout)");
  app.add_option("--group-by", a.group_by, "column whose values split the rows into series");
}

double parse_number(const std::string& s, const std::string& column) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw Exit{kUsage, "non-numeric value '" + s + "' in column " + column};
  }
  return v;
}

int cmd_plot(const PlotArgs& a, std::ostream& out) {
  std::ifstream in(a.input, std::ios::binary);
  if (!in) throw Exit{kUsage, "cannot read " + a.input};
  const auto table = read_csv(in);
  if (table.header.empty() || table.rows.empty()) throw Exit{kUsage, "no data rows"};

  std::string xcol = "l";
  std::vector<std::string> ycols;
  if (a.series == "lambda2-vs-V") xcol = "V", ycols = {"lambda2"};
  if (a.series == "lambda2-vs-l") ycols = {"lambda2"};
  if (a.series == "j-vs-l") ycols = {"j1", "j2"};
  if (a.series == "I-vs-l") ycols = {"I"};
  if (a.series == "V-vs-l") ycols = {"V"};

  auto need = [&](const std::string& c) {
    const auto idx = table.column(c);
    if (!idx) throw Exit{kUsage, "missing column " + c};
    return *idx;
  };
  const std::size_t xi = need(xcol);
  std::optional<std::size_t> gi;
  if (!a.group_by.empty()) gi = need(a.group_by);

  PlotSpec spec;
  spec.title = a.series;
  spec.x_label = xcol;
  spec.y_label = ycols.size() == 1 ? ycols[0] : "j";
  std::vector<std::string> groups;
  for (const auto& row : table.rows) {
    const std::string g = gi ? row[*gi] : "";
    if (std::find(groups.begin(), groups.end(), g) == groups.end()) groups.push_back(g);
  }
  for (const auto& ycol : ycols) {
    const std::size_t yi = need(ycol);
    for (const auto& g : groups) {
      PlotSeries s;
      s.name = gi ? ycol + " (" + a.group_by + "=" + g + ")" : ycol;
      for (const auto& row : table.rows) {
        if (gi && row[*gi] != g) continue;
        s.x.push_back(parse_number(row[xi], xcol));
        s.y.push_back(parse_number(row[yi], ycol));
      }
      spec.series.push_back(std::move(s));
    }
  }
  emit(a.output, out, [&](std::ostream& os) { os << render_svg(spec); });
  return kSuccess;
}

// ---------------------------------------------------------------------------

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

constexpr const char* kCheckFooter =
    "Hard clauses (sign and shape verdicts per branch) decide the exit code: 0 when all pass,\n"
    "4 otherwise. Cross-r ordering clauses are reported only. A branch for nominal r\n"
    "solves sigma = l/r at every l node; each point's own r is l/sigma.";

}  // namespace

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw ParseError("--config needs a file name", 0);
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (path.empty()) return rest;

  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file " + path, 0);
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", number);
    std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    if (key.empty()) throw ParseError("empty key", number);
    entries.emplace_back(key, value);
  }

  auto given = [&](const std::string& key) {
    const std::string flag = "--" + key;
    for (const auto& a : rest) {
      if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    }
    return false;
  };
  // insert after the subcommand name so that the options bind to it
  std::size_t pos = 0;
  while (pos < rest.size() && rest[pos].rfind("-", 0) == 0) ++pos;
  if (pos < rest.size()) ++pos;
  std::vector<std::string> injected;
  for (const auto& [key, value] : entries) {
    if (!given(key)) injected.push_back("--" + key + "=" + value);
  }
  rest.insert(rest.begin() + static_cast<std::ptrdiff_t>(pos), injected.begin(), injected.end());
  return rest;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Flux ratios and their bifurcations in a reduced ion-channel model"};
  app.require_subcommand(1);
  app.add_option("--config", "plain-text 'key = value' file; command-line flags take precedence");

  FluxArgs flux;
  add_flux(*app.add_subcommand("flux", "fluxes and flux ratios at given boundary data"), flux);
  BifurcateArgs bif;
  add_bifurcate(*app.add_subcommand("bifurcate", "bifurcation points at a fixed sigma = l/r"), bif);
  SweepCmdArgs sweep;
  add_sweep(*app.add_subcommand("sweep", "bifurcation branches over nominal r values"), sweep);
  CheckArgs check;
  auto* check_cmd = app.add_subcommand("check-conjectures", "pass/fail table for branch shape claims");
  add_check(*check_cmd, check);
  check_cmd->footer(kCheckFooter);
  GeometryArgs geo;
  add_geometry(*app.add_subcommand("geometry", "alpha and beta from a tabulated profile"), geo);
  PlotArgs plot;
  add_plot(*app.add_subcommand("plot", "SVG line plot of a branch CSV"), plot);

  try {
    auto args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    const auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "flux") return cmd_flux(flux, out);
    if (name == "bifurcate") return cmd_bifurcate(bif, out, err);
    if (name == "sweep") return cmd_sweep(sweep, out);
    if (name == "check-conjectures") return cmd_check(check, out, err);
    if (name == "geometry") return cmd_geometry(geo, out);
    if (name == "plot") return cmd_plot(plot, out);
  } catch (const Exit& e) {
    err << "error: " << e.message << '\n';
    return e.code;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const RangeError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace pnpbif::cli
