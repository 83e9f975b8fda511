#include "pnpbif/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>

#include "pnpbif/errors.hpp"

namespace pnpbif {

namespace {

double integrand(const TabulatedProfile& p, std::size_t i) {
  return 1.0 / (p.D_values()[i] * p.h_values()[i]);
}

void check_profile(const std::vector<double>& grid, const std::vector<double>& h,
                   const std::vector<double>& D, std::span<const std::size_t> lines) {
  auto line_of = [&](std::size_t i) -> std::size_t { return lines.empty() ? 0 : lines[i]; };
  if (grid.size() < 2) throw ParseError("profile needs at least two grid points", 0);
  if (h.size() != grid.size() || D.size() != grid.size()) {
    throw ParseError("profile columns have different lengths", 0);
  }
  if (grid.front() != 0.0) throw ParseError("grid must start at x = 0", line_of(0));
  if (grid.back() != 1.0) throw ParseError("grid must end at x = 1", line_of(grid.size() - 1));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw ParseError("grid is not strictly increasing", line_of(i));
    }
    if (!(h[i] > 0.0) || !std::isfinite(h[i])) throw ParseError("h must be > 0", line_of(i));
    if (!(D[i] > 0.0) || !std::isfinite(D[i])) throw ParseError("D must be > 0", line_of(i));
  }
}

TabulatedProfile build(std::vector<double> grid, std::vector<double> h, std::vector<double> D,
                       std::span<const std::size_t> lines) {
  check_profile(grid, h, D, lines);
  return TabulatedProfile(std::move(grid), std::move(h), std::move(D));
}

}  // namespace

TabulatedProfile::TabulatedProfile(std::vector<double> grid, std::vector<double> h_values,
                                   std::vector<double> D_values)
    : grid_(std::move(grid)), h_(std::move(h_values)), D_(std::move(D_values)) {
  try {
    check_profile(grid_, h_, D_, {});
  } catch (const ParseError& e) {
    throw InvalidArgument(std::string("TabulatedProfile: ") + e.what());
  }
  cumulative_.resize(grid_.size());
  cumulative_[0] = 0.0;
  for (std::size_t i = 1; i < grid_.size(); ++i) {
    const double w = 1.0 / (D_[i - 1] * h_[i - 1]) + 1.0 / (D_[i] * h_[i]);
    cumulative_[i] = cumulative_[i - 1] + 0.5 * (grid_[i] - grid_[i - 1]) * w;
  }
}

TabulatedProfile TabulatedProfile::uniform() { return {{0.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}}; }

void ChargeProfile::validate() const {
  if (!(0.0 < a && a < b && b < 1.0)) throw InvalidArgument("ChargeProfile: need 0 < a < b < 1");
  if (!(Q0 > 0.0)) throw InvalidArgument("ChargeProfile: need Q0 > 0");
}

double H_of(double x, const TabulatedProfile& p) {
  if (!(x >= 0.0 && x <= 1.0)) throw RangeError("H_of: x outside [0, 1]");
  const auto grid = p.grid();
  const auto it = std::upper_bound(grid.begin(), grid.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - grid.begin());
  if (hi == grid.size()) return p.cumulative().back();
  const std::size_t lo = hi - 1;
  if (x == grid[lo]) return p.cumulative()[lo];
  const double t = (x - grid[lo]) / (grid[hi] - grid[lo]);
  const double w_lo = integrand(p, lo);
  const double w_x = w_lo + t * (integrand(p, hi) - w_lo);
  return p.cumulative()[lo] + 0.5 * (x - grid[lo]) * (w_lo + w_x);
}

GeometryCoefficients alpha_beta(const TabulatedProfile& p, const ChargeProfile& charge) {
  charge.validate();
  const double H_a = H_of(charge.a, p);
  const double H_b = H_of(charge.b, p);
  const double H_1 = H_of(1.0, p);
  return {H_a / H_1, H_b / H_1, H_a, H_b, H_1};
}

ChannelProfile make_channel_profile(const TabulatedProfile& p, const ChargeProfile& charge) {
  const auto g = alpha_beta(p, charge);
  return ChannelProfile(charge.a, charge.b, g.H_a, g.H_b, g.H_1);
}

TabulatedProfile parse_profile(std::istream& in) {
  std::vector<double> grid, h, D;
  std::vector<std::size_t> lines;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    double x = 0.0, hv = 0.0, Dv = 0.0;
    if (!(fields >> x >> hv >> Dv)) {
      throw ParseError("expected three numbers \"x h D\"", number);
    }
    std::string extra;
    if (fields >> extra) throw ParseError("unexpected trailing field '" + extra + "'", number);
    grid.push_back(x);
    h.push_back(hv);
    D.push_back(Dv);
    lines.push_back(number);
  }
  if (grid.empty()) throw ParseError("no data lines", 0);
  return build(std::move(grid), std::move(h), std::move(D), lines);
}

TabulatedProfile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open profile file " + path.string(), 0);
  return parse_profile(in);
}

}  // namespace pnpbif
