#include "pnpbif/governing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pnpbif/errors.hpp"

namespace pnpbif {

namespace {

std::optional<double> g_at(double A, const ScaledBoundary& bc, const ChannelProfile& cp) {
  try {
    const double I = scaled_current(A, bc, cp);
    const double g = governing_residual(A, I, bc, cp);
    if (std::isfinite(g)) return g;
  } catch (const DomainError&) {
  }
  return std::nullopt;
}

GoverningSolution make_solution(double A, double I, double residual, double scale,
                                const ScaledBoundary& bc, const ChannelProfile& cp) {
  return {make_state(A, I, bc, cp), make_flux_report(A, I, bc, cp), bc, cp, residual, scale};
}

}  // namespace

std::vector<GoverningSolution> solve_governing(const ScaledBoundary& bc, const ChannelProfile& cp,
                                               const SolverConfig& cfg,
                                               const GoverningOptions& opt) {
  cfg.validate();
  if (opt.samples < 2) throw InvalidArgument("solve_governing: need at least two samples");
  if (bc.l() == bc.r() && bc.V() == 0.0) {
    return {make_solution(bc.l(), 0.0, 0.0, 0.0, bc, cp)};
  }

  const double a_max = max_concentration_a(bc, cp);
  const double delta = opt.margin * a_max;
  const double lo = delta, hi = a_max - delta;
  const auto n = static_cast<std::size_t>(opt.samples);

  std::vector<double> As(n);
  std::vector<std::optional<double>> gs(n);
  for (std::size_t i = 0; i < n; ++i) {
    As[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    gs[i] = g_at(As[i], bc, cp);
  }

  // Domain edges: where a defined sample neighbours an undefined one, bisect
  // toward the gap and keep the last defined point as an extra sample.
  std::vector<std::pair<double, double>> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (gs[i].has_value() == gs[i + 1].has_value()) continue;
    double in = gs[i] ? As[i] : As[i + 1];
    double out = gs[i] ? As[i + 1] : As[i];
    double g_in = gs[i] ? *gs[i] : *gs[i + 1];
    for (int it = 0; it < 80 && std::abs(out - in) > cfg.step_tol * std::max(1.0, in); ++it) {
      const double mid = 0.5 * (in + out);
      if (auto gm = g_at(mid, bc, cp)) {
        in = mid;
        g_in = *gm;
      } else {
        out = mid;
      }
    }
    if (in != As[i] && in != As[i + 1]) edges.emplace_back(in, g_in);
  }
  if (!edges.empty()) {
    for (const auto& [A, gv] : edges) {
      As.push_back(A);
      gs.push_back(gv);
    }
    std::vector<std::size_t> order(As.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return As[a] < As[b]; });
    std::vector<double> As2;
    std::vector<std::optional<double>> gs2;
    for (std::size_t i : order) {
      As2.push_back(As[i]);
      gs2.push_back(gs[i]);
    }
    As.swap(As2);
    gs.swap(gs2);
  }
  const std::size_t m = As.size();

  const ScalarFunction g = [&](double A) {
    const double I = scaled_current(A, bc, cp);
    return governing_residual(A, I, bc, cp);
  };

  std::vector<double> roots;
  for (std::size_t i = 0; i < m; ++i) {
    if (!gs[i]) continue;
    if (*gs[i] == 0.0) {
      roots.push_back(As[i]);
      continue;
    }
    if (i + 1 < m && gs[i + 1] && *gs[i + 1] != 0.0 && ((*gs[i] > 0.0) != (*gs[i + 1] > 0.0))) {
      try {
        roots.push_back(bracket_root(g, As[i], As[i + 1], cfg));
      } catch (const SolverError&) {
      }
    }
  }

  std::vector<GoverningSolution> out;
  for (double A : roots) {
    double I = 0.0, F = 0.0, scale = 0.0;
    try {
      I = scaled_current(A, bc, cp);
      F = governing_residual(A, I, bc, cp);
      scale = governing_residual_scale(A, I, bc, cp);
    } catch (const DomainError&) {
      continue;
    }
    if (!(std::abs(F) <= cfg.residual_tol * std::max(1.0, scale))) continue;
    if (!out.empty() && std::abs(out.back().state.A - A) <= cfg.step_tol * std::max(1.0, A)) {
      continue;
    }
    out.push_back(make_solution(A, I, std::abs(F), scale, bc, cp));
  }
  return out;
}

const char* to_string(RecordStatus s) {
  switch (s) {
    case RecordStatus::ok:
      return "ok";
    case RecordStatus::degenerate:
      return "degenerate";
    case RecordStatus::miss:
      return "miss";
  }
  return "?";
}

std::vector<LambdaRecord> lambda_curve(const std::vector<double>& V_grid, double l, double r,
                                       const ChannelProfile& cp, Species k,
                                       const SolverConfig& cfg) {
  std::vector<LambdaRecord> out;
  for (double V : V_grid) {
    const ScaledBoundary bc(l, r, V);
    const auto sols = solve_governing(bc, cp, cfg);
    if (sols.empty()) {
      out.push_back({V, RecordStatus::miss, std::nullopt, 0.0, 0.0, 0.0});
      continue;
    }
    for (const auto& s : sols) {
      LambdaRecord rec{V, RecordStatus::ok, s.fluxes.lambda(k), s.fluxes.j(k), s.state.A,
                       s.state.I};
      if (!rec.lambda) rec.status = RecordStatus::degenerate;
      out.push_back(rec);
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const LambdaRecord& a, const LambdaRecord& b) {
    return a.V != b.V ? a.V < b.V : a.A < b.A;
  });
  return out;
}

double zero_charge_flux_unscaled(double L, double R, double V, const ChannelProfile& cp,
                                 Species k) {
  if (!(L > 0.0 && R > 0.0)) throw InvalidArgument("zero_charge_flux_unscaled: need L, R > 0");
  const double s = valence_sign(k);
  const double u = L / R - 1.0;
  if (std::abs(u) < 1e-6) {
    const double q = R * (1.0 + u / 2.0 - u * u / 12.0);
    return (q * s * V + (L - R)) / cp.H_1();
  }
  const double ln = std::log(L) - std::log(R);
  return (L - R) * (s * V + ln) / (cp.H_1() * ln);
}

std::vector<PhysicalFluxes> fluxes_for_Q0(double Q0, double L, double R, double V,
                                          const ChannelProfile& cp, const SolverConfig& cfg) {
  PhysicalScaling ps;
  ps.Q0 = Q0;
  ps.L = L;
  ps.R = R;
  ps.validate();
  const auto sols = solve_governing(ps.scaled(V), cp, cfg);
  if (sols.empty()) throw SolverError("fluxes_for_Q0: governing system has no root");

  const double J1_0 = zero_charge_flux_unscaled(L, R, V, cp, Species::cation);
  const double J2_0 = zero_charge_flux_unscaled(L, R, V, cp, Species::anion);
  // cancellation scale of J_k(0) at the reversal potential
  const double j0_scale = std::abs(L - R) * (std::abs(V) + std::abs(std::log(L)) +
                                             std::abs(std::log(R))) /
                          cp.H_1();
  auto ratio = [&](double J, double J0) -> std::optional<double> {
    if (J0 == 0.0 || std::abs(J0) <= 16.0 * std::numeric_limits<double>::epsilon() * j0_scale) {
      return std::nullopt;
    }
    return J / J0;
  };

  std::vector<PhysicalFluxes> out;
  for (const auto& s : sols) {
    const auto u = unscale(s.state, s.fluxes, ps, cp);
    PhysicalFluxes p;
    p.A = u.A;
    p.B = u.B;
    p.I = u.I;
    p.F = u.F;
    p.J1 = u.J1;
    p.J2 = u.J2;
    p.J1_0 = J1_0;
    p.J2_0 = J2_0;
    p.lambda1 = ratio(u.J1, J1_0);
    p.lambda2 = ratio(u.J2, J2_0);
    out.push_back(p);
  }
  return out;
}

const GoverningSolution* nearest_in_A(const std::vector<GoverningSolution>& sols, double A) {
  const GoverningSolution* best = nullptr;
  for (const auto& s : sols) {
    if (!best || std::abs(s.state.A - A) < std::abs(best->state.A - A)) best = &s;
  }
  return best;
}

}  // namespace pnpbif
