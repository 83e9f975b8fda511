#include "pnpbif/model.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "pnpbif/errors.hpp"

namespace pnpbif {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// |sigma - 1| below this uses the series for (l - r)/ln(sigma).
constexpr double kSigmaSeriesBand = 1e-6;

void require(bool ok, const char* what) {
  if (!ok) throw InvalidArgument(what);
}

void require_finite(double v, const char* where) {
  if (!std::isfinite(v)) throw DomainError(std::string(where) + ": non-finite result");
}

// sqrt(1+x^2) - sqrt(1+y^2) without cancellation.
double sqrt_diff(double x, double y, double sx, double sy) {
  return (x - y) * (x + y) / (sx + sy);
}

struct ZeroChargeFlux {
  double value;
  double scale;  // magnitude of the terms that cancel in `value`
};

ZeroChargeFlux zero_charge_flux_terms(const ScaledBoundary& bc, const ChannelProfile& cp,
                                      Species k) {
  const double s = valence_sign(k);
  const double l = bc.l(), r = bc.r(), V = bc.V();
  const double u = bc.sigma() - 1.0;
  if (std::abs(u) < kSigmaSeriesBand) {
    // (l - r)/ln(sigma) = r u/ln(1+u) = r (1 + u/2 - u^2/12 + O(u^3)).
    const double q = r * (1.0 + u / 2.0 - u * u / 12.0);
    const double value = 0.5 * cp.alpha() * (q * s * V + (l - r));
    const double scale = 0.5 * cp.alpha() * (std::abs(q * V) + std::abs(l - r));
    return {value, scale};
  }
  const double log_sigma = std::log(l) - std::log(r);
  const double t = s * V + log_sigma;
  const double pre = cp.alpha() * (l - r) / (2.0 * log_sigma);
  const double scale =
      std::abs(pre) * (std::abs(V) + std::abs(std::log(l)) + std::abs(std::log(r)));
  return {pre * t, scale};
}

}  // namespace

ChannelProfile::ChannelProfile(double a, double b, double H_a, double H_b, double H_1)
    : a_(a), b_(b), alpha_(H_a / H_1), beta_(H_b / H_1), H_a_(H_a), H_1_(H_1) {
  require(0.0 < a && a < b && b < 1.0, "ChannelProfile: need 0 < a < b < 1");
  require(H_a > 0.0 && H_1 > 0.0, "ChannelProfile: need H(a) > 0 and H(1) > 0");
  require(0.0 < alpha_ && alpha_ < beta_ && beta_ < 1.0,
          "ChannelProfile: need 0 < alpha < beta < 1");
}

ChannelProfile ChannelProfile::from_coefficients(double a, double b, double alpha, double beta,
                                                 double H_1) {
  return ChannelProfile(a, b, alpha * H_1, beta * H_1, H_1);
}

ChannelProfile ChannelProfile::symmetric_default() {
  return from_coefficients(1.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0, 1.0);
}

ScaledBoundary::ScaledBoundary(double l, double r, double V) : l_(l), r_(r), sigma_(l / r), V_(V) {
  require(std::isfinite(l) && l > 0.0, "ScaledBoundary: need l > 0");
  require(std::isfinite(r) && r > 0.0, "ScaledBoundary: need r > 0");
  require(std::isfinite(V), "ScaledBoundary: V must be finite");
}

void PhysicalScaling::validate() const {
  require(Q0 > 0.0, "PhysicalScaling: need Q0 > 0");
  require(L > 0.0 && R > 0.0, "PhysicalScaling: need L > 0 and R > 0");
  require(C0 > 0.0, "PhysicalScaling: need C0 > 0");
  require(temperature > 0.0, "PhysicalScaling: need temperature > 0");
}

double concentration_b(double A, const ScaledBoundary& bc, const ChannelProfile& cp) {
  return (1.0 - cp.beta()) / cp.alpha() * (bc.l() - A) + bc.r();
}

double max_concentration_a(const ScaledBoundary& bc, const ChannelProfile& cp) {
  return cp.alpha() * bc.r() / (1.0 - cp.beta()) + bc.l();
}

double scaled_current(double A, const ScaledBoundary& bc, const ChannelProfile& cp) {
  if (!(A > 0.0)) throw DomainError("scaled_current: A must be positive");
  const double B = concentration_b(A, bc, cp);
  if (!(B > 0.0)) throw DomainError("scaled_current: B must be positive (A beyond a_max)");
  const double d = A - bc.l();
  if (d == 0.0) throw DomainError("scaled_current: 0/0 at A = l");

  const double arg = (B * bc.l()) / (A * bc.r());
  if (!(arg > 0.0) || !std::isfinite(arg)) throw DomainError("scaled_current: log argument");
  const double log_ratio = std::log(arg);
  if (log_ratio == 0.0) throw DomainError("scaled_current: ln(Bl/(Ar)) vanishes");

  const double sA = std::hypot(1.0, A);
  const double sB = std::hypot(1.0, B);
  // ln(B/A) - ln((sB-1)/(sA-1)) == ln(A(sB+1) / (B(sA+1)))
  const double lam = std::log(A * (sB + 1.0) / (B * (sA + 1.0)));
  const double bracket = lam - bc.V() + sqrt_diff(A, B, sA, sB) +
                         (cp.beta() - cp.alpha()) * d / cp.alpha();
  const double I = d / log_ratio * bracket;
  require_finite(I, "scaled_current");
  return I;
}

namespace {

struct ResidualTerms {
  double log_term;  // I * ln(...)
  double quad;      // (beta-alpha)/alpha (A-l)^2
  double lin;       // (sqrt(1+A^2) - sqrt(1+B^2)) (A-l)
};

ResidualTerms residual_terms(double A, double I, const ScaledBoundary& bc,
                             const ChannelProfile& cp) {
  if (!(A > 0.0)) throw DomainError("governing_residual: A must be positive");
  const double B = concentration_b(A, bc, cp);
  if (!(B >= 0.0)) throw DomainError("governing_residual: B negative (A beyond a_max)");
  const double d = A - bc.l();
  const double sA = std::hypot(1.0, A);
  const double sB = std::hypot(1.0, B);
  const double den = I - d * sA;
  const double num = I - d * sB;
  if (den == 0.0 || num == 0.0 || (num > 0.0) != (den > 0.0)) {
    throw DomainError("governing_residual: I inside the excluded current band");
  }
  const double diff = sqrt_diff(A, B, sA, sB);
  // num/den = 1 + d (sA - sB)/den
  const double log_term = I * std::log1p(d * diff / den);
  return {log_term, (cp.beta() - cp.alpha()) / cp.alpha() * d * d, diff * d};
}

}  // namespace

double governing_residual(double A, double I, const ScaledBoundary& bc,
                          const ChannelProfile& cp) {
  if (A == bc.l() && I == 0.0) return 0.0;
  const auto t = residual_terms(A, I, bc, cp);
  const double F = t.log_term - t.quad - t.lin;
  require_finite(F, "governing_residual");
  return F;
}

double governing_residual_scale(double A, double I, const ScaledBoundary& bc,
                                const ChannelProfile& cp) {
  if (A == bc.l() && I == 0.0) return 0.0;
  const auto t = residual_terms(A, I, bc, cp);
  return std::abs(t.log_term) + std::abs(t.quad) + std::abs(t.lin);
}

double rho(double A, const ScaledBoundary& bc, const ChannelProfile& cp) {
  const double B = concentration_b(A, bc, cp);
  const double d = A - bc.l();
  const double sA = std::hypot(1.0, A);
  const double sB = std::hypot(1.0, B);
  return (cp.beta() - cp.alpha()) / cp.alpha() * d * d + sqrt_diff(A, B, sA, sB) * d;
}

SpeciesFluxes scaled_fluxes(double A, double I, const ScaledBoundary& bc) {
  const double f = bc.l() - A;
  return {0.5 * (f + I), 0.5 * (f - I)};
}

double zero_charge_flux(const ScaledBoundary& bc, const ChannelProfile& cp, Species k) {
  return zero_charge_flux_terms(bc, cp, k).value;
}

double flux_ratio(double A, double I, const ScaledBoundary& bc, const ChannelProfile& cp,
                  Species k) {
  const auto j0 = zero_charge_flux_terms(bc, cp, k);
  if (j0.value == 0.0 || std::abs(j0.value) <= 16.0 * kEps * j0.scale) {
    throw DegenerateError("flux_ratio: zero-charge flux vanishes (reversal potential)");
  }
  const auto j = scaled_fluxes(A, I, bc);
  return (k == Species::cation ? j.j1 : j.j2) / j0.value;
}

double layer_quantity(double A, double I, const ScaledBoundary& bc, const ChannelProfile& cp) {
  if (I == 0.0) throw DegenerateError("layer_quantity: I = 0");
  const double B = concentration_b(A, bc, cp);
  const double sA = std::hypot(1.0, A);
  const double sB = std::hypot(1.0, B);
  const double rhs =
      -(cp.beta() - cp.alpha()) * (bc.l() - A) / cp.alpha() + sqrt_diff(A, B, sA, sB);
  return rhs / I;
}

ScaledState make_state(double A, double I, const ScaledBoundary& bc, const ChannelProfile& cp) {
  ScaledState s;
  s.A = A;
  s.B = concentration_b(A, bc, cp);
  s.I = I;
  s.f = bc.l() - A;
  if (I != 0.0) s.Y = layer_quantity(A, I, bc, cp);
  return s;
}

FluxReport make_flux_report(double A, double I, const ScaledBoundary& bc,
                            const ChannelProfile& cp) {
  FluxReport rep;
  const auto j = scaled_fluxes(A, I, bc);
  rep.j1 = j.j1;
  rep.j2 = j.j2;
  rep.j1_0 = zero_charge_flux(bc, cp, Species::cation);
  rep.j2_0 = zero_charge_flux(bc, cp, Species::anion);
  try {
    rep.lambda1 = flux_ratio(A, I, bc, cp, Species::cation);
  } catch (const DegenerateError&) {
  }
  try {
    rep.lambda2 = flux_ratio(A, I, bc, cp, Species::anion);
  } catch (const DegenerateError&) {
  }
  return rep;
}

UnscaledQuantities unscale(const ScaledState& state, const FluxReport& fluxes,
                           const PhysicalScaling& ps, const ChannelProfile& cp) {
  require(ps.Q0 > 0.0, "unscale: need Q0 > 0");
  const double flux_unit = 2.0 * ps.Q0 / cp.H_a();
  return {state.A * ps.Q0,        state.B * ps.Q0,         state.I * flux_unit,
          state.f * flux_unit,    fluxes.j1 * flux_unit,   fluxes.j2 * flux_unit};
}

Dimensionless nondimensionalize(double voltage_volts, double left_molar, double right_molar,
                                double C0_molar, double temperature) {
  require(temperature > 0.0, "nondimensionalize: need temperature > 0");
  require(C0_molar > 0.0, "nondimensionalize: need C0 > 0");
  const double thermal = constants::boltzmann * temperature / constants::elementary_charge;
  return {voltage_volts / thermal, left_molar / C0_molar, right_molar / C0_molar};
}

}  // namespace pnpbif
