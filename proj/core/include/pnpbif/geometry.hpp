#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "pnpbif/model.hpp"

namespace pnpbif {

/// Cross-section h(x) and diffusion coefficient D(x) tabulated on [0, 1].
/// The grid must start at 0, end at 1 and be strictly increasing; all h and
/// D values must be positive.
class TabulatedProfile {
 public:
  TabulatedProfile(std::vector<double> grid, std::vector<double> h_values,
                   std::vector<double> D_values);

  /// D*h = 1 on a two-point grid.
  static TabulatedProfile uniform();

  std::span<const double> grid() const { return grid_; }
  std::span<const double> h_values() const { return h_; }
  std::span<const double> D_values() const { return D_; }

  /// Cumulative trapezoid integral of 1/(D h) at each grid node.
  std::span<const double> cumulative() const { return cumulative_; }

 private:
  std::vector<double> grid_, h_, D_, cumulative_;
};

/// Permanent charge 2*Q0 on (a, b), zero elsewhere.
struct ChargeProfile {
  double a = 1.0 / 3.0;
  double b = 2.0 / 3.0;
  double Q0 = 1.0;

  void validate() const;
};

struct GeometryCoefficients {
  double alpha, beta, H_a, H_b, H_1;
};

/// H(x) = int_0^x ds / (D(s) h(s)), composite trapezoid on the profile grid;
/// between nodes the integrand is interpolated linearly.
/// Throws RangeError for x outside [0, 1].
double H_of(double x, const TabulatedProfile& p);

GeometryCoefficients alpha_beta(const TabulatedProfile& p, const ChargeProfile& charge);

ChannelProfile make_channel_profile(const TabulatedProfile& p, const ChargeProfile& charge);

/// Parses "x h D" lines; '#' starts a comment line, blank lines are skipped.
/// Throws ParseError carrying the offending line number.
TabulatedProfile parse_profile(std::istream& in);
TabulatedProfile load_profile(const std::filesystem::path& path);

}  // namespace pnpbif
