#pragma once

#include <optional>
#include <vector>

#include "pnpbif/model.hpp"
#include "pnpbif/nlsolve.hpp"

namespace pnpbif {

struct GoverningSolution {
  ScaledState state;
  FluxReport fluxes;
  ScaledBoundary bc;
  ChannelProfile cp;
  double residual = 0.0;        // |F(A, I)|
  double residual_scale = 0.0;  // sum of |terms| of F at the root
};

struct GoverningOptions {
  int samples = 2048;
  double margin = 1e-9;  // relative to A_max, at both ends of the scan
};

/// All roots of g(A) = F(A, I(A, V)) on (margin, A_max - margin), ascending
/// in A. The scan never brackets across a sample where g is undefined; the
/// edge of each undefined stretch is located by bisection and added as a sample.
/// A root is accepted when |F| <= residual_tol * max(1, residual_scale),
/// which rejects sign changes produced by a pole.
///
/// The symmetric equilibrium l = r, V = 0 (A = l, I = 0, a double zero of g)
/// is returned directly.
std::vector<GoverningSolution> solve_governing(const ScaledBoundary& bc, const ChannelProfile& cp,
                                               const SolverConfig& cfg = {},
                                               const GoverningOptions& opt = {});

enum class RecordStatus { ok, degenerate, miss };

const char* to_string(RecordStatus s);

struct LambdaRecord {
  double V = 0.0;
  RecordStatus status = RecordStatus::miss;
  std::optional<double> lambda;
  double j = 0.0;
  double A = 0.0;
  double I = 0.0;
};

/// One record per governing root at each V (a miss record when there is
/// none), sorted by (V, A).
std::vector<LambdaRecord> lambda_curve(const std::vector<double>& V_grid, double l, double r,
                                       const ChannelProfile& cp, Species k,
                                       const SolverConfig& cfg = {});

struct PhysicalFluxes {
  double A = 0.0;
  double B = 0.0;
  double I = 0.0;
  double F = 0.0;
  double J1 = 0.0;
  double J2 = 0.0;
  double J1_0 = 0.0;
  double J2_0 = 0.0;
  std::optional<double> lambda1;
  std::optional<double> lambda2;
};

/// Zero-charge flux (L - R)(sV + ln L - ln R) / (H(1)(ln L - ln R)).
double zero_charge_flux_unscaled(double L, double R, double V, const ChannelProfile& cp,
                                 Species k);

/// Solves at l = L/Q0, r = R/Q0 and unscales every root. Throws SolverError
/// when the governing system has no root.
std::vector<PhysicalFluxes> fluxes_for_Q0(double Q0, double L, double R, double V,
                                          const ChannelProfile& cp,
                                          const SolverConfig& cfg = {});

/// The root of `sols` nearest to A, or nullptr.
const GoverningSolution* nearest_in_A(const std::vector<GoverningSolution>& sols, double A);

}  // namespace pnpbif
