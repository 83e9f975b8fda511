#pragma once

// Reduced algebraic model of a two-ion (z1 = 1 = -z2) channel with a
// piecewise-constant permanent charge, in charge-scaled variables.
//
// Notation: A, B are the charge-scaled geometric-mean concentrations at the
// two charge junctions, I the charge-scaled current, l and r the
// charge-scaled bath concentrations and V the dimensionless potential.

#include <optional>

namespace pnpbif {

enum class Species { cation = 1, anion = 2 };

/// (-1)^(k+1): +1 for the cation, -1 for the anion.
constexpr double valence_sign(Species k) { return k == Species::cation ? 1.0 : -1.0; }

constexpr Species other(Species k) {
  return k == Species::cation ? Species::anion : Species::cation;
}

/// Geometry summary of the channel: charge junctions a < b and the reduced
/// coefficients alpha = H(a)/H(1), beta = H(b)/H(1).
class ChannelProfile {
 public:
  ChannelProfile(double a, double b, double H_a, double H_b, double H_1);

  /// Profile from the reduced coefficients alone; H(1) fixes the flux unit.
  static ChannelProfile from_coefficients(double a, double b, double alpha, double beta,
                                          double H_1 = 1.0);
  /// Uniform D*h = 1 with a = 1/3, b = 2/3.
  static ChannelProfile symmetric_default();

  double a() const { return a_; }
  double b() const { return b_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double H_a() const { return H_a_; }
  double H_1() const { return H_1_; }

 private:
  double a_, b_, alpha_, beta_, H_a_, H_1_;
};

/// Charge-scaled boundary data: l = L/Q0, r = R/Q0, potential V.
class ScaledBoundary {
 public:
  ScaledBoundary(double l, double r, double V);

  double l() const { return l_; }
  double r() const { return r_; }
  double sigma() const { return sigma_; }
  double V() const { return V_; }

  ScaledBoundary with_V(double V) const { return {l_, r_, V}; }

 private:
  double l_, r_, sigma_, V_;
};

struct ScaledState {
  double A = 0.0;
  double B = 0.0;
  double I = 0.0;
  double f = 0.0;              // l - A
  std::optional<double> Y;     // undefined when I == 0
};

struct FluxReport {
  double j1 = 0.0;
  double j2 = 0.0;
  double j1_0 = 0.0;
  double j2_0 = 0.0;
  std::optional<double> lambda1;  // empty when j1_0 vanishes
  std::optional<double> lambda2;

  double j(Species k) const { return k == Species::cation ? j1 : j2; }
  double j0(Species k) const { return k == Species::cation ? j1_0 : j2_0; }
  std::optional<double> lambda(Species k) const {
    return k == Species::cation ? lambda1 : lambda2;
  }
};

/// Physical data behind the dimensionless model.
struct PhysicalScaling {
  double Q0 = 1.0;             // half the permanent-charge level, > 0
  double L = 1.0;              // dimensionless left concentration
  double R = 1.0;              // dimensionless right concentration
  double C0 = 1.0;             // characteristic concentration [mol/L]
  double temperature = 298.15; // [K]
  double a0 = 0.0;             // bath endpoints [m]
  double b0 = 1.0;

  void validate() const;
  ScaledBoundary scaled(double V) const { return {L / Q0, R / Q0, V}; }
};

struct UnscaledQuantities {
  double A, B, I, F, J1, J2;
};

struct Dimensionless {
  double V, L, R;
};

namespace constants {
inline constexpr double boltzmann = 1.380649e-23;         // J/K
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double default_temperature = 298.15;    // K
}  // namespace constants

/// B = (1 - beta)/alpha * (l - A) + r. Affine in A; negative past a_max.
double concentration_b(double A, const ScaledBoundary& bc, const ChannelProfile& cp);

/// Upper end of the admissible A range, where B reaches 0.
double max_concentration_a(const ScaledBoundary& bc, const ChannelProfile& cp);

/// Current I(A, V) eliminated from the flux-matching relations.
/// Throws DomainError on a non-positive log argument or at A = l (0/0).
double scaled_current(double A, const ScaledBoundary& bc, const ChannelProfile& cp);

/// The governing residual F(A, I); zero on solutions. Defined as 0 at the
/// symmetric equilibrium (A, I) = (l, 0). Throws DomainError when I lies in
/// the closed band between (A-l)sqrt(1+A^2) and (A-l)sqrt(1+B^2).
double governing_residual(double A, double I, const ScaledBoundary& bc,
                          const ChannelProfile& cp);

/// Sum of absolute values of the terms of F(A, I); used to judge whether a
/// computed residual is small relative to the cancellation that produced it.
double governing_residual_scale(double A, double I, const ScaledBoundary& bc,
                                const ChannelProfile& cp);

/// rho(A, l) = (beta-alpha)/alpha (A-l)^2 + (sqrt(1+A^2) - sqrt(1+B^2))(A-l).
double rho(double A, const ScaledBoundary& bc, const ChannelProfile& cp);

struct SpeciesFluxes {
  double j1, j2;
};

/// j_k = (l - A + (-1)^(k+1) I)/2.
SpeciesFluxes scaled_fluxes(double A, double I, const ScaledBoundary& bc);

/// Flux of species k without permanent charge, in the same scaling. The
/// removable singularity at l = r is handled by a series branch.
double zero_charge_flux(const ScaledBoundary& bc, const ChannelProfile& cp, Species k);

/// j_k / j_k(0). Throws DegenerateError when j_k(0) vanishes.
double flux_ratio(double A, double I, const ScaledBoundary& bc, const ChannelProfile& cp,
                  Species k);

/// Layer quantity Y from I*Y = -(beta-alpha)(l-A)/alpha + sqrt(1+A^2) - sqrt(1+B^2).
double layer_quantity(double A, double I, const ScaledBoundary& bc, const ChannelProfile& cp);

ScaledState make_state(double A, double I, const ScaledBoundary& bc, const ChannelProfile& cp);
FluxReport make_flux_report(double A, double I, const ScaledBoundary& bc,
                            const ChannelProfile& cp);

UnscaledQuantities unscale(const ScaledState& state, const FluxReport& fluxes,
                           const PhysicalScaling& ps, const ChannelProfile& cp);

/// V = e0 * voltage / (kB * T), L = concentration / C0, R likewise.
Dimensionless nondimensionalize(double voltage_volts, double left_molar, double right_molar,
                                double C0_molar = 1.0,
                                double temperature = constants::default_temperature);

}  // namespace pnpbif
