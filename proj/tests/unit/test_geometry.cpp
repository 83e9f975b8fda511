#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "pnpbif/errors.hpp"
#include "pnpbif/geometry.hpp"

using namespace pnpbif;

namespace {

std::filesystem::path data(const char* name) {
  return std::filesystem::path(PNPBIF_TEST_DATA) / name;
}

TabulatedProfile linear_h(int points) {
  std::vector<double> x(points), h(points), D(points, 1.0);
  for (int i = 0; i < points; ++i) {
    x[i] = i == points - 1 ? 1.0 : static_cast<double>(i) / (points - 1);
    h[i] = 1.0 + x[i];
  }
  return {x, h, D};
}

}  // namespace

TEST_CASE("H of a uniform profile") {
  auto p = TabulatedProfile::uniform();
  for (double x : {0.0, 0.1, 1.0 / 3.0, 0.5, 0.99, 1.0}) CHECK(H_of(x, p) == doctest::Approx(x).epsilon(1e-15));
  CHECK_THROWS_AS(H_of(-0.1, p), RangeError);
  CHECK_THROWS_AS(H_of(1.5, p), RangeError);

  TabulatedProfile two({0.0, 0.5, 1.0}, {2.0, 2.0, 2.0}, {1.0, 1.0, 1.0});
  CHECK(H_of(0.3, two) == doctest::Approx(0.15));
  CHECK(H_of(1.0, two) == doctest::Approx(0.5));
}

TEST_CASE("H for h = 1 + x") {
  auto p = linear_h(2001);
  CHECK(std::abs(H_of(1.0, p) - std::log(2.0)) < 1e-6);
}

TEST_CASE("alpha and beta") {
  SUBCASE("uniform") {
    auto g = alpha_beta(TabulatedProfile::uniform(), ChargeProfile{});
    CHECK(g.alpha == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(g.beta == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  }
  SUBCASE("constant factor cancels") {
    TabulatedProfile p({0.0, 1.0}, {2.0, 2.0}, {1.0, 1.0});
    auto g = alpha_beta(p, ChargeProfile{0.25, 0.5, 1.0});
    CHECK(g.alpha == doctest::Approx(0.25));
    CHECK(g.beta == doctest::Approx(0.5));
  }
  SUBCASE("piecewise fixture") {
    auto p = load_profile(data("piecewise.txt"));
    CHECK(p.grid().size() == 2001);
    auto g = alpha_beta(p, ChargeProfile{0.25, 2.0 / 3.0, 1.0});
    CHECK(std::abs(g.alpha - 1.0 / 3.0) < 1e-6);
    CHECK(std::abs(g.beta - 7.0 / 9.0) < 1e-6);
    CHECK(std::abs(g.H_a - 0.25) < 1e-6);
    CHECK(std::abs(g.H_b - 7.0 / 12.0) < 1e-6);
    CHECK(std::abs(g.H_1 - 0.75) < 1e-6);
    auto g2 = alpha_beta(p, ChargeProfile{0.25, 0.75, 1.0});
    CHECK(std::abs(g2.beta - 5.0 / 6.0) < 1e-6);
  }
  SUBCASE("channel profile") {
    auto cp = make_channel_profile(TabulatedProfile::uniform(), ChargeProfile{});
    CHECK(cp.alpha() == doctest::Approx(1.0 / 3.0));
    CHECK(cp.H_1() == doctest::Approx(1.0));
  }
}

TEST_CASE("D scale invariance") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  std::vector<double> x, h, D;
  for (int i = 0; i <= 40; ++i) {
    x.push_back(i / 40.0);
    h.push_back(u(rng));
    D.push_back(u(rng));
  }
  auto g = alpha_beta({x, h, D}, ChargeProfile{0.2, 0.7, 1.0});
  for (double c : {1e-3, 0.5, 7.0, 1e4}) {
    std::vector<double> Dc = D;
    for (double& v : Dc) v *= c;
    auto gc = alpha_beta({x, h, Dc}, ChargeProfile{0.2, 0.7, 1.0});
    CHECK(gc.alpha == doctest::Approx(g.alpha).epsilon(1e-12));
    CHECK(gc.beta == doctest::Approx(g.beta).epsilon(1e-12));
    CHECK(gc.H_1 == doctest::Approx(g.H_1 / c).epsilon(1e-12));
  }
}

TEST_CASE("H is strictly increasing on random profiles") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.05, 5.0), u01(0.0, 1.0);
  std::uniform_int_distribution<int> npts(2, 60);
  int violations = 0;
  for (int p = 0; p < 100; ++p) {
    int n = npts(rng);
    std::vector<double> x{0.0};
    for (int i = 1; i < n - 1; ++i) x.push_back(u01(rng));
    x.push_back(1.0);
    std::sort(x.begin(), x.end());
    x.erase(std::unique(x.begin(), x.end()), x.end());
    std::vector<double> h, D;
    for (std::size_t i = 0; i < x.size(); ++i) {
      h.push_back(u(rng));
      D.push_back(u(rng));
    }
    TabulatedProfile prof(x, h, D);
    for (int k = 0; k < 10; ++k) {
      double s = u01(rng), t = u01(rng);
      if (s == t) continue;
      if (s > t) std::swap(s, t);
      if (!(H_of(s, prof) < H_of(t, prof))) ++violations;
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("second-order refinement on h = 1 + x") {
  ChargeProfile ch{1.0 / 3.0, 2.0 / 3.0, 1.0};
  auto exact_H = [](double x) { return std::log1p(x); };
  double exact_alpha = exact_H(ch.a) / exact_H(1.0);
  double e1 = std::abs(alpha_beta(linear_h(41), ch).alpha - exact_alpha);
  double e2 = std::abs(alpha_beta(linear_h(81), ch).alpha - exact_alpha);
  CHECK(std::log2(e1 / e2) >= 1.9);
}

TEST_CASE("profile parsing") {
  SUBCASE("comments and blank lines") {
    std::istringstream in("# header\n\n0 1 1\n# mid\n0.5 2 1\n1 2 1\n");
    auto p = parse_profile(in);
    CHECK(p.grid().size() == 3);
    CHECK(p.h_values()[1] == 2.0);
  }
  SUBCASE("uniform fixture") {
    auto p = load_profile(data("uniform.txt"));
    auto g = alpha_beta(p, ChargeProfile{});
    CHECK(g.alpha == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("non-increasing grid names its line") {
    try {
      load_profile(data("bad_profile.txt"));
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 5);
    }
  }
  SUBCASE("malformed lines") {
    auto line_of = [](const char* text) {
      std::istringstream in(text);
      try {
        parse_profile(in);
      } catch (const ParseError& e) {
        return e.line();
      }
      return std::size_t{0};
    };
    CHECK(line_of("0 1 1\n0.5 1\n1 1 1\n") == 2);
    CHECK(line_of("0 1 1\n0.5 1 1 9\n1 1 1\n") == 2);
    CHECK(line_of("0 1 1\n0.5 abc 1\n1 1 1\n") == 2);
    CHECK(line_of("0.1 1 1\n1 1 1\n") == 1);
    CHECK(line_of("0 1 1\n0.9 1 1\n") == 2);
    CHECK(line_of("0 1 1\n0.5 -1 1\n1 1 1\n") == 2);
    CHECK(line_of("0 1 1\n0.5 1 0\n1 1 1\n") == 2);
  }
  SUBCASE("invalid direct construction") {
    CHECK_THROWS_AS(TabulatedProfile({0.0, 0.5}, {1.0, 1.0}, {1.0, 1.0}), InvalidArgument);
    CHECK_THROWS_AS(TabulatedProfile({0.0, 1.0}, {1.0}, {1.0, 1.0}), InvalidArgument);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_profile(data("no_such_file.txt")), Error);
  }
  SUBCASE("charge profile") {
    CHECK_THROWS_AS((ChargeProfile{0.7, 0.3, 1.0}.validate()), InvalidArgument);
    CHECK_THROWS_AS((ChargeProfile{0.3, 0.7, 0.0}.validate()), InvalidArgument);
  }
}
