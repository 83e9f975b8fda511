#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "pnpbif/model.hpp"
#include "pnpbif/nlsolve.hpp"

namespace pnpbif {

/// Unknowns of the bifurcation system, in this order.
using BifVector = std::array<double, 4>;  // (l, A, I, V)

struct AuxiliaryQuantities {
  double rho;
  double gamma1;  // 1 / (I - (A - l) sqrt(1 + A^2))
  double gamma2;  // 1 / (I - (A - l) sqrt(1 + B^2))
  double M;       // I (gamma2 - gamma1) + rho / I
};

/// Throws DomainError unless l > 0, 0 < A < A_max, B > 0, I strictly
/// outside the excluded current band, I != 0, A != l and |ln sigma| > 1e-8.
AuxiliaryQuantities auxiliary_quantities(double sigma, const BifVector& x,
                                         const ChannelProfile& cp);

/// Four-component residual at fixed sigma = l/r:
///   1. the governing residual with its sign flipped,
///   2. V minus its closed form in (l, A, I),
///   3. I minus its closed form from lambda_k = 1,
///   4. the expanded condition d(lambda_k)/dV = 0.
BifVector bif_residual(Species k, double sigma, const BifVector& x, const ChannelProfile& cp);

/// Sum of the magnitudes of the terms that make up each residual component.
BifVector bif_term_scale(Species k, double sigma, const BifVector& x, const ChannelProfile& cp);

/// Same components 1-3; component 4 is the unexpanded derivative condition
/// built from central-difference partials of F and of I(A, V).
BifVector bif_residual_unexpanded(Species k, double sigma, const BifVector& x,
                                  const ChannelProfile& cp);

struct BifurcationValidation {
  double lambda_k = 0.0;    // from an independent governing solve
  double dlambda_dV = 0.0;  // centred difference over V +- 1e-4
};

struct BifurcationPoint {
  Species k = Species::cation;
  double sigma = 0.0;
  double l = 0.0, A = 0.0, I = 0.0, V = 0.0;
  double r = 0.0, B = 0.0;
  double lambda_other = 0.0;
  double j1 = 0.0, j2 = 0.0;
  double residual = 0.0;
  int start_count = 0;
  BifurcationValidation validation;

  BifVector x() const { return {l, A, I, V}; }
  double lambda2() const { return k == Species::cation ? lambda_other : validation.lambda_k; }
};

struct BifurcationReject {
  BifVector x;
  std::string reason;
};

struct BifurcationResult {
  std::vector<BifurcationPoint> points;  // sorted by l
  std::vector<BifurcationReject> rejects;
  std::vector<std::string> warnings;
};

/// 0 < l <= 10, 0 < A <= 10, -60 <= I <= 60, -80 <= V <= 80 with a 5x5x7x7 grid.
MultiStartBox default_bifurcation_box();

struct ValidationOptions {
  double lambda_tol = 1e-6;
  double dlambda_tol = 1e-4;
  double dV = 1e-4;
};

BifurcationResult solve_bifurcation(Species k, double sigma, const ChannelProfile& cp,
                                    const MultiStartBox& box, const SolverConfig& cfg = {},
                                    const ValidationOptions& vopt = {});

/// Checks a candidate root with the governing solver; returns the point or
/// the reason it was rejected.
std::optional<BifurcationPoint> validate_bifurcation(Species k, double sigma, const BifVector& x,
                                                     const ChannelProfile& cp,
                                                     const SolverConfig& cfg,
                                                     const ValidationOptions& vopt,
                                                     std::string* reason);

// ---------------------------------------------------------------------------
// branch sweep

struct SweepOptions {
  double l_lower = 0.0;
  double l_upper = 10.0;
  int l_count = 20;
  MultiStartBox aiv_box{{0.0, -60.0, -80.0}, {10.0, 60.0, 80.0}, {5, 7, 7}};
};

/// Verdict of a discrete shape test; `skipped` when there are too few points.
enum class Verdict { pass, fail, skipped };

/// A sign change between consecutive branch points at l_left < l_right.
struct SignChange {
  double l_left = 0.0;
  double l_right = 0.0;
  double mid() const { return 0.5 * (l_left + l_right); }
  double width() const { return l_right - l_left; }
};
const char* to_string(Verdict v);

struct BranchSummary {
  std::size_t points = 0;
  std::optional<std::size_t> argmax_lambda2;  // index into the branch
  std::optional<double> l_star;
  bool l_star_interior = false;
  std::vector<SignChange> j1_sign_changes;
  std::vector<SignChange> j2_sign_changes;
  Verdict j1_increasing = Verdict::skipped;
  Verdict j2_decreasing = Verdict::skipped;
  Verdict lambda2_unimodal_in_V = Verdict::skipped;
  Verdict lambda2_unimodal_in_I = Verdict::skipped;
  Verdict lambda2_unimodal_in_l = Verdict::skipped;
  Verdict sign_V_equals_sign_I = Verdict::skipped;
  Verdict V_negative = Verdict::skipped;
  Verdict I_negative = Verdict::skipped;
  Verdict flux_signs_around_l_star = Verdict::skipped;
  double max_grid_step = 0.0;  // largest gap between consecutive l values
};

struct Branch {
  double r_nominal = 0.0;
  std::vector<BifurcationPoint> points;  // sorted by l
  std::vector<BifurcationReject> rejects;
  BranchSummary summary;
};

/// For each nominal r, sigma runs over l_node / r for the cell-centred l
/// nodes of the sweep box; each sigma is solved from starts at l = l_node
/// over the (A, I, V) box. The emitted r of a point is its own l / sigma.
std::vector<Branch> branch_sweep(Species k, const std::vector<double>& r_values,
                                 const ChannelProfile& cp, const SolverConfig& cfg = {},
                                 const SweepOptions& opt = {});

BranchSummary summarize_branch(const std::vector<BifurcationPoint>& points);

/// Discrete unimodality: successive differences of y (ordered by x) are
/// positive, then negative, with exactly one change and an interior maximum.
/// Ties count toward the earlier run.
Verdict discrete_unimodal(std::vector<std::pair<double, double>> xy);

struct CrossBranchOrdering {
  std::string clause;
  Verdict verdict = Verdict::skipped;
  std::string detail;
};

/// Orderings of the critical (argmax lambda2) points between branches with
/// increasing nominal r.
std::vector<CrossBranchOrdering> cross_branch_orderings(const std::vector<Branch>& branches);

}  // namespace pnpbif
