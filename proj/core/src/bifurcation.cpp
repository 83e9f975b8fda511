#include "pnpbif/bifurcation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pnpbif/errors.hpp"
#include "pnpbif/governing.hpp"

namespace pnpbif {

namespace {

constexpr double kLogSigmaGuard = 1e-8;
constexpr double kDiagonalGuard = 1e-10;

void domain_check(bool ok, const char* what) {
  if (!ok) throw DomainError(std::string("bif_residual: ") + what);
}

// Everything the residual forms share, with all guards applied.
struct Pieces {
  double l, r, A, B, I, V;
  double d, sA, sB;
  double log_sigma, L;  // ln(sigma), ln(sigma B / A)
  double kappa;
  double Lam;           // ln(A(sB+1) / (B(sA+1)))
  double rho;
  double gamma1, gamma2;
  double alpha, beta;
};

Pieces pieces(double sigma, const BifVector& x, const ChannelProfile& cp) {
  Pieces p{};
  p.l = x[0];
  p.A = x[1];
  p.I = x[2];
  p.V = x[3];
  domain_check(std::isfinite(p.l) && std::isfinite(p.A) && std::isfinite(p.I) &&
                   std::isfinite(p.V),
               "non-finite unknowns");
  domain_check(sigma > 0.0, "sigma must be positive");
  p.log_sigma = std::log(sigma);
  domain_check(std::abs(p.log_sigma) > kLogSigmaGuard, "|ln sigma| too small");
  domain_check(p.l > 0.0, "l must be positive");
  p.r = p.l / sigma;
  domain_check(p.r > 0.0, "r must be positive");
  p.alpha = cp.alpha();
  p.beta = cp.beta();
  const double a_max = p.alpha * p.r / (1.0 - p.beta) + p.l;
  domain_check(p.A > 0.0 && p.A < a_max, "A outside (0, A_max)");
  p.B = (1.0 - p.beta) / p.alpha * (p.l - p.A) + p.r;
  domain_check(p.B > 0.0, "B must be positive");
  p.d = p.A - p.l;
  domain_check(std::abs(p.d) > kDiagonalGuard * std::max(1.0, p.l), "A = l");
  domain_check(p.I != 0.0, "I = 0");
  p.sA = std::hypot(1.0, p.A);
  p.sB = std::hypot(1.0, p.B);
  const double den = p.I - p.d * p.sA;
  const double num = p.I - p.d * p.sB;
  domain_check(den != 0.0 && num != 0.0 && (den > 0.0) == (num > 0.0),
               "I inside the excluded current band");
  p.gamma1 = 1.0 / den;
  p.gamma2 = 1.0 / num;
  p.L = std::log(sigma * p.B / p.A);
  p.kappa = sigma * p.log_sigma / (p.alpha * p.l * (sigma - 1.0));
  p.Lam = std::log(p.A * (p.sB + 1.0) / (p.B * (p.sA + 1.0)));
  const double diff = (p.A - p.B) * (p.A + p.B) / (p.sA + p.sB);
  p.rho = (p.beta - p.alpha) / p.alpha * p.d * p.d + diff * p.d;
  return p;
}

// Components 1-3, shared verbatim by both residual forms.
std::array<double, 3> first_three(Species k, const Pieces& p) {
  const double s = valence_sign(k);
  const double diff = (p.A - p.B) * (p.A + p.B) / (p.sA + p.sB);
  const double c1 = p.rho - p.I * std::log1p(p.d * diff * p.gamma1);
  const double c2 = p.V - (p.Lam - (p.I * p.L - p.rho) / p.d);
  const double denom = p.L + p.kappa * p.d;
  domain_check(denom != 0.0, "vanishing denominator in the current equation");
  const double c3 =
      p.I - (s * p.kappa * p.d * p.d + (p.Lam + s * p.log_sigma) * p.d + p.rho) / denom;
  return {c1, c2, c3};
}

BifVector finish(const std::array<double, 3>& c, double c4) {
  BifVector out{c[0], c[1], c[2], c4};
  for (double v : out) domain_check(std::isfinite(v), "non-finite residual");
  return out;
}

double parity(Species k) { return k == Species::cation ? -1.0 : 1.0; }  // (-1)^k

}  // namespace

AuxiliaryQuantities auxiliary_quantities(double sigma, const BifVector& x,
                                         const ChannelProfile& cp) {
  const auto p = pieces(sigma, x, cp);
  return {p.rho, p.gamma1, p.gamma2, p.I * (p.gamma2 - p.gamma1) + p.rho / p.I};
}

BifVector bif_residual(Species k, double sigma, const BifVector& x, const ChannelProfile& cp) {
  const auto p = pieces(sigma, x, cp);
  const auto c = first_three(k, p);
  const double M = p.I * (p.gamma2 - p.gamma1) + p.rho / p.I;
  const double ab = (1.0 - p.beta) / p.alpha;
  const double P = (p.beta - p.alpha) / p.alpha - p.d * (p.A * p.gamma1 + ab * p.B * p.gamma2);
  const double lhs = P * (p.L + p.d * p.kappa) - P * M +
                     (p.I + parity(k) * p.d) * p.kappa * M / p.d;
  const double rhs = (p.I * p.I - p.d * p.d) / p.d * M * (p.gamma1 / p.A + ab * p.gamma2 / p.B);
  return finish(c, lhs - rhs);
}

BifVector bif_term_scale(Species k, double sigma, const BifVector& x, const ChannelProfile& cp) {
  const auto p = pieces(sigma, x, cp);
  const double s = valence_sign(k);
  const double diff = (p.A - p.B) * (p.A + p.B) / (p.sA + p.sB);
  const double t1 = std::abs(p.rho) + std::abs(p.I * std::log1p(p.d * diff * p.gamma1));
  const double t2 = std::abs(p.V) + std::abs(p.Lam) + std::abs(p.I * p.L / p.d) +
                    std::abs(p.rho / p.d);
  const double t3 = std::abs(p.I) + (std::abs(s * p.kappa * p.d * p.d) + std::abs(p.Lam * p.d) +
                                     std::abs(p.log_sigma * p.d) + std::abs(p.rho)) /
                                        std::abs(p.L + p.kappa * p.d);
  const double M = p.I * (p.gamma2 - p.gamma1) + p.rho / p.I;
  const double ab = (1.0 - p.beta) / p.alpha;
  const double P = (p.beta - p.alpha) / p.alpha - p.d * (p.A * p.gamma1 + ab * p.B * p.gamma2);
  const double t4 = std::abs(P * (p.L + p.d * p.kappa)) + std::abs(P * M) +
                    std::abs((p.I + parity(k) * p.d) * p.kappa * M / p.d) +
                    std::abs((p.I * p.I - p.d * p.d) / p.d * M *
                             (p.gamma1 / p.A + ab * p.gamma2 / p.B));
  return finish({t1, t2, t3}, t4);
}

BifVector bif_residual_unexpanded(Species k, double sigma, const BifVector& x,
                                  const ChannelProfile& cp) {
  const auto p = pieces(sigma, x, cp);
  const auto c = first_three(k, p);
  const ScaledBoundary bc(p.l, p.r, p.V);
  const double hA = 1e-6 * std::max(1.0, std::abs(p.A));
  const double hI = 1e-6 * std::max(1.0, std::abs(p.I));
  const double F_A = (governing_residual(p.A + hA, p.I, bc, cp) -
                      governing_residual(p.A - hA, p.I, bc, cp)) /
                     (2.0 * hA);
  const double F_I = (governing_residual(p.A, p.I + hI, bc, cp) -
                      governing_residual(p.A, p.I - hI, bc, cp)) /
                     (2.0 * hI);
  const double I_A =
      (scaled_current(p.A + hA, bc, cp) - scaled_current(p.A - hA, bc, cp)) / (2.0 * hA);
  const double sk = parity(k);
  const double total = F_A + F_I * I_A;
  const double lhs = (F_I - sk * F_A) * p.V;
  const double rhs = p.L * total - p.log_sigma * F_A +
                     sk * (p.I * p.L / p.d * total + p.log_sigma * F_I);
  return finish(c, lhs - rhs);
}

MultiStartBox default_bifurcation_box() {
  return {{0.0, 0.0, -60.0, -80.0}, {10.0, 10.0, 60.0, 80.0}, {5, 5, 7, 7}};
}

std::optional<BifurcationPoint> validate_bifurcation(Species k, double sigma, const BifVector& x,
                                                     const ChannelProfile& cp,
                                                     const SolverConfig& cfg,
                                                     const ValidationOptions& vopt,
                                                     std::string* reason) {
  auto reject = [&](const std::string& why) -> std::optional<BifurcationPoint> {
    if (reason) *reason = why;
    return std::nullopt;
  };
  BifVector res;
  try {
    res = bif_residual(k, sigma, x, cp);
  } catch (const DomainError& e) {
    return reject(std::string("infeasible: ") + e.what());
  }
  double res_norm = 0.0;
  for (double v : res) res_norm = std::max(res_norm, std::abs(v));
  if (!(res_norm <= cfg.residual_tol)) return reject("residual above tolerance");

  BifurcationPoint pt;
  pt.k = k;
  pt.sigma = sigma;
  pt.l = x[0];
  pt.A = x[1];
  pt.I = x[2];
  pt.V = x[3];
  pt.r = pt.l / sigma;
  pt.residual = res_norm;

  const ScaledBoundary bc(pt.l, pt.r, pt.V);
  pt.B = concentration_b(pt.A, bc, cp);
  const auto sols = solve_governing(bc, cp, cfg);
  const auto* g = nearest_in_A(sols, pt.A);
  if (!g) return reject("governing solver found no root at (l, r, V)");
  if (std::abs(g->state.A - pt.A) > 1e-6 * std::max(1.0, pt.A)) {
    std::ostringstream os;
    os << "governing root A=" << g->state.A << " does not match";
    return reject(os.str());
  }
  const auto lam = g->fluxes.lambda(k);
  if (!lam) return reject("lambda_k undefined (zero-charge flux vanishes)");
  pt.validation.lambda_k = *lam;
  if (!(std::abs(*lam - 1.0) <= vopt.lambda_tol)) {
    std::ostringstream os;
    os.precision(17);
    os << "|lambda_k - 1| = " << std::abs(*lam - 1.0) << " above tolerance";
    return reject(os.str());
  }

  auto lambda_at = [&](double V) -> std::optional<double> {
    const auto s = solve_governing(bc.with_V(V), cp, cfg);
    const auto* n = nearest_in_A(s, g->state.A);
    if (!n) return std::nullopt;
    return n->fluxes.lambda(k);
  };
  const auto lp = lambda_at(pt.V + vopt.dV);
  const auto lm = lambda_at(pt.V - vopt.dV);
  if (!lp || !lm) return reject("lambda_k undefined at V +- dV");
  pt.validation.dlambda_dV = (*lp - *lm) / (2.0 * vopt.dV);
  if (!(std::abs(pt.validation.dlambda_dV) <= vopt.dlambda_tol)) {
    std::ostringstream os;
    os.precision(17);
    os << "|d lambda_k / dV| = " << std::abs(pt.validation.dlambda_dV) << " above tolerance";
    return reject(os.str());
  }

  const auto other_lambda = g->fluxes.lambda(other(k));
  if (!other_lambda) return reject("other flux ratio undefined");
  pt.lambda_other = *other_lambda;
  const auto j = scaled_fluxes(pt.A, pt.I, bc);
  pt.j1 = j.j1;
  pt.j2 = j.j2;
  return pt;
}

BifurcationResult solve_bifurcation(Species k, double sigma, const ChannelProfile& cp,
                                    const MultiStartBox& box, const SolverConfig& cfg,
                                    const ValidationOptions& vopt) {
  BifurcationResult out;
  if (!(sigma > 0.0) || !(std::abs(std::log(sigma)) > kLogSigmaGuard)) {
    out.warnings.push_back("sigma must be positive with |ln sigma| > 1e-8; nothing solved");
    return out;
  }
  if (box.dimension() != 4) throw InvalidArgument("solve_bifurcation: box must be 4-dimensional");

  // The search runs on each component divided by 1 + the magnitude of its
  // terms; the raw residual shrinks toward l = 0 without a root there.
  const SystemFunction F_search = [&](const Vector& v) {
    const BifVector x{v[0], v[1], v[2], v[3]};
    auto r = bif_residual(k, sigma, x, cp);
    const auto t = bif_term_scale(k, sigma, x, cp);
    for (std::size_t i = 0; i < 4; ++i) r[i] /= 1.0 + t[i];
    return Vector(r.begin(), r.end());
  };
  const SystemFunction F = [&](const Vector& v) {
    const auto r = bif_residual(k, sigma, {v[0], v[1], v[2], v[3]}, cp);
    return Vector(r.begin(), r.end());
  };
  const auto roots = multi_start(F_search, box, cfg);

  SolverConfig polish = cfg;
  polish.workers = 1;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    Vector v = roots.roots[i];
    try {
      v = solve_system(F, v, polish).x;
    } catch (const Error&) {
    }
    const BifVector x{v[0], v[1], v[2], v[3]};
    std::string why;
    auto pt = validate_bifurcation(k, sigma, x, cp, cfg, vopt, &why);
    if (pt) {
      pt->start_count = roots.start_counts[i];
      out.points.push_back(*pt);
    } else {
      out.rejects.push_back({x, why});
    }
  }
  std::stable_sort(out.points.begin(), out.points.end(),
                   [](const auto& a, const auto& b) { return a.l < b.l; });
  return out;
}

// ---------------------------------------------------------------------------
// branch sweep

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return "pass";
    case Verdict::fail:
      return "fail";
    case Verdict::skipped:
      return "skipped";
  }
  return "?";
}

namespace {

Verdict all_of(const std::vector<BifurcationPoint>& pts, bool (*pred)(const BifurcationPoint&)) {
  if (pts.empty()) return Verdict::skipped;
  for (const auto& p : pts) {
    if (!pred(p)) return Verdict::fail;
  }
  return Verdict::pass;
}

Verdict strictly(const std::vector<BifurcationPoint>& pts, double (*f)(const BifurcationPoint&),
                 bool increasing) {
  if (pts.size() < 2) return Verdict::skipped;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double dv = f(pts[i]) - f(pts[i - 1]);
    if (increasing ? !(dv > 0.0) : !(dv < 0.0)) return Verdict::fail;
  }
  return Verdict::pass;
}

std::vector<SignChange> sign_changes(const std::vector<BifurcationPoint>& pts,
                                     double (*f)(const BifurcationPoint&)) {
  std::vector<SignChange> out;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (f(pts[i - 1]) * f(pts[i]) < 0.0) out.push_back({pts[i - 1].l, pts[i].l});
  }
  return out;
}

int sgn(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

Verdict discrete_unimodal(std::vector<std::pair<double, double>> xy) {
  if (xy.size() < 3) return Verdict::skipped;
  std::stable_sort(xy.begin(), xy.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  bool rising = true;
  bool saw_rise = false, saw_fall = false;
  for (std::size_t i = 1; i < xy.size(); ++i) {
    const double dy = xy[i].second - xy[i - 1].second;
    if (rising) {
      if (dy < 0.0) {
        rising = false;
        saw_fall = true;
      } else {
        saw_rise = true;
      }
    } else if (dy > 0.0) {
      return Verdict::fail;
    }
  }
  return saw_rise && saw_fall ? Verdict::pass : Verdict::fail;
}

BranchSummary summarize_branch(const std::vector<BifurcationPoint>& pts) {
  BranchSummary s;
  s.points = pts.size();
  if (pts.empty()) return s;

  std::size_t best = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].lambda2() > pts[best].lambda2()) best = i;
  }
  s.argmax_lambda2 = best;
  s.l_star = pts[best].l;
  s.l_star_interior = best > 0 && best + 1 < pts.size();

  auto j1 = [](const BifurcationPoint& p) { return p.j1; };
  auto j2 = [](const BifurcationPoint& p) { return p.j2; };
  s.j1_sign_changes = sign_changes(pts, j1);
  s.j2_sign_changes = sign_changes(pts, j2);
  s.j1_increasing = strictly(pts, j1, true);
  s.j2_decreasing = strictly(pts, j2, false);

  std::vector<std::pair<double, double>> byV, byI, byl;
  for (const auto& p : pts) {
    byV.emplace_back(p.V, p.lambda2());
    byI.emplace_back(p.I, p.lambda2());
    byl.emplace_back(p.l, p.lambda2());
  }
  s.lambda2_unimodal_in_V = discrete_unimodal(byV);
  s.lambda2_unimodal_in_I = discrete_unimodal(byI);
  s.lambda2_unimodal_in_l = discrete_unimodal(byl);

  s.sign_V_equals_sign_I =
      all_of(pts, [](const BifurcationPoint& p) { return sgn(p.V) == sgn(p.I); });
  s.V_negative = all_of(pts, [](const BifurcationPoint& p) { return p.V < 0.0; });
  s.I_negative = all_of(pts, [](const BifurcationPoint& p) { return p.I < 0.0; });

  bool ok = true;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i < best) ok = ok && pts[i].j1 < 0.0 && pts[i].j2 > 0.0;
    if (i > best) ok = ok && pts[i].j1 > 0.0 && pts[i].j2 < 0.0;
  }
  s.flux_signs_around_l_star = ok ? Verdict::pass : Verdict::fail;

  for (std::size_t i = 1; i < pts.size(); ++i) {
    s.max_grid_step = std::max(s.max_grid_step, pts[i].l - pts[i - 1].l);
  }
  return s;
}

std::vector<Branch> branch_sweep(Species k, const std::vector<double>& r_values,
                                 const ChannelProfile& cp, const SolverConfig& cfg,
                                 const SweepOptions& opt) {
  if (opt.l_count < 1 || !(opt.l_lower < opt.l_upper)) {
    throw InvalidArgument("branch_sweep: invalid l range");
  }
  opt.aiv_box.validate();
  if (opt.aiv_box.dimension() != 3) throw InvalidArgument("branch_sweep: box must be (A, I, V)");

  std::vector<Branch> out;
  for (double r : r_values) {
    if (!(r > 0.0)) throw InvalidArgument("branch_sweep: r must be positive");
    Branch br;
    br.r_nominal = r;
    const double h = (opt.l_upper - opt.l_lower) / opt.l_count;
    for (int i = 0; i < opt.l_count; ++i) {
      const double l_node = opt.l_lower + (i + 0.5) * h;
      const double sigma = l_node / r;
      if (!(std::abs(std::log(sigma)) > kLogSigmaGuard)) continue;
      MultiStartBox box;
      box.lower = {l_node - 0.5 * h};
      box.upper = {l_node + 0.5 * h};
      box.counts = {1};
      for (std::size_t d = 0; d < 3; ++d) {
        box.lower.push_back(opt.aiv_box.lower[d]);
        box.upper.push_back(opt.aiv_box.upper[d]);
        box.counts.push_back(opt.aiv_box.counts[d]);
      }
      auto res = solve_bifurcation(k, sigma, cp, box, cfg);
      for (auto& p : res.points) br.points.push_back(p);
      for (auto& rj : res.rejects) br.rejects.push_back(rj);
    }
    std::stable_sort(br.points.begin(), br.points.end(),
                     [](const auto& a, const auto& b) { return a.l < b.l; });
    br.summary = summarize_branch(br.points);
    out.push_back(std::move(br));
  }
  return out;
}

std::vector<CrossBranchOrdering> cross_branch_orderings(const std::vector<Branch>& branches) {
  std::vector<const Branch*> usable;
  for (const auto& b : branches) {
    if (b.summary.argmax_lambda2) usable.push_back(&b);
  }
  std::stable_sort(usable.begin(), usable.end(),
                   [](const Branch* a, const Branch* b) { return a->r_nominal < b->r_nominal; });

  using Critical = const BifurcationPoint&;
  struct Clause {
    const char* name;
    bool (*holds)(Critical p1, Critical p2);  // p1 at the smaller r
  };
  const Clause clauses[] = {
      {"V2* < V1* < 0", [](Critical p1, Critical p2) { return p2.V < p1.V && p1.V < 0.0; }},
      {"I2* < I1* < 0", [](Critical p1, Critical p2) { return p2.I < p1.I && p1.I < 0.0; }},
      {"lambda2(2*) < lambda2(1*)",
       [](Critical p1, Critical p2) { return p2.lambda2() < p1.lambda2(); }},
      {"0 < l2* < l1*", [](Critical p1, Critical p2) { return 0.0 < p2.l && p2.l < p1.l; }},
  };
  std::vector<CrossBranchOrdering> out;
  for (const auto& c : clauses) {
    CrossBranchOrdering o{c.name, Verdict::skipped, "needs >= 2 branches"};
    if (usable.size() >= 2) {
      o.verdict = Verdict::pass;
      o.detail.clear();
      for (std::size_t i = 1; i < usable.size(); ++i) {
        const auto& p1 = usable[i - 1]->points[*usable[i - 1]->summary.argmax_lambda2];
        const auto& p2 = usable[i]->points[*usable[i]->summary.argmax_lambda2];
        if (c.holds(p1, p2)) continue;
        o.verdict = Verdict::fail;
        std::ostringstream os;
        os << "r=" << usable[i - 1]->r_nominal << " vs r=" << usable[i]->r_nominal;
        if (!o.detail.empty()) o.detail += "; ";
        o.detail += os.str();
      }
    }
    out.push_back(o);
  }
  return out;
}

}  // namespace pnpbif
