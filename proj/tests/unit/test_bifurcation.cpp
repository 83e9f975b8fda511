#include <doctest.h>

#include <cmath>
#include <random>

#include "pnpbif/bifurcation.hpp"
#include "pnpbif/errors.hpp"
#include "pnpbif/governing.hpp"

using namespace pnpbif;

namespace {

const ChannelProfile kCp = ChannelProfile::symmetric_default();

const BifVector kRootSigma2{17.255988296778262234, 9.587206485329529649, -190.98900720766056388,
                            -44.875338958027186586};
const BifVector kRootSigma3{8.3135034917385816365, 3.5231622683517744701, -51.74223997296428304,
                            -29.019295604950403144};

double max_abs(const BifVector& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("residual vanishes at reference roots") {
  CHECK(max_abs(bif_residual(Species::cation, 2.0, kRootSigma2, kCp)) < 1e-9);
  CHECK(max_abs(bif_residual(Species::cation, 3.0, kRootSigma3, kCp)) < 1e-9);
  auto u = bif_residual_unexpanded(Species::cation, 2.0, kRootSigma2, kCp);
  CHECK(std::abs(u[3]) <= 1e-6);
}

TEST_CASE("guards") {
  BifVector at_l{2.0, 2.0, -3.0, -1.0};
  CHECK_THROWS_AS(bif_residual(Species::cation, 2.0, at_l, kCp), DomainError);
  CHECK_THROWS_AS(bif_residual(Species::cation, 1.0, kRootSigma2, kCp), DomainError);
  BifVector neg_l{-1.0, 2.0, -3.0, -1.0};
  CHECK_THROWS_AS(bif_residual(Species::cation, 2.0, neg_l, kCp), DomainError);
  BifVector zero_I{4.0, 2.0, 0.0, -1.0};
  CHECK_THROWS_AS(bif_residual(Species::cation, 2.0, zero_I, kCp), DomainError);
  BifVector big_A{4.0, 50.0, -3.0, -1.0};
  CHECK_THROWS_AS(bif_residual(Species::cation, 2.0, big_A, kCp), DomainError);
  CHECK_THROWS_AS(bif_residual_unexpanded(Species::cation, 2.0, at_l, kCp), DomainError);
  CHECK_THROWS_AS(auxiliary_quantities(2.0, big_A, kCp), DomainError);
}

TEST_CASE("components 1-3 of both forms are identical") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> ul(0.5, 10.0), uf(0.05, 0.95), uI(-60.0, 60.0),
      uV(-80.0, 80.0);
  int evaluated = 0;
  for (int t = 0; t < 400 && evaluated < 40; ++t) {
    double sigma = 0.5 + 3.0 * uf(rng);
    double l = ul(rng);
    double amax = max_concentration_a(ScaledBoundary(l, l / sigma, 0.0), kCp);
    BifVector x{l, amax * uf(rng), uI(rng), uV(rng)};
    try {
      auto e = bif_residual(Species::cation, sigma, x, kCp);
      auto u = bif_residual_unexpanded(Species::cation, sigma, x, kCp);
      for (int i = 0; i < 3; ++i) CHECK(e[i] == u[i]);
      ++evaluated;
    } catch (const DomainError&) {
    }
  }
  CHECK(evaluated >= 20);
}

TEST_CASE("auxiliary quantities") {
  auto q = auxiliary_quantities(2.0, kRootSigma2, kCp);
  double l = kRootSigma2[0], A = kRootSigma2[1], I = kRootSigma2[2];
  ScaledBoundary bc(l, l / 2.0, 0.0);
  CHECK(q.rho == doctest::Approx(rho(A, bc, kCp)));
  CHECK(q.gamma1 == doctest::Approx(1.0 / (I - (A - l) * std::sqrt(1 + A * A))));
  CHECK(q.M == doctest::Approx(I * (q.gamma2 - q.gamma1) + q.rho / I));
}

TEST_CASE("polishing from a nearby start") {
  SolverConfig cfg;
  SystemFunction F = [](const Vector& v) {
    auto r = bif_residual(Species::cation, 2.0, {v[0], v[1], v[2], v[3]}, kCp);
    return Vector(r.begin(), r.end());
  };
  Vector x0{kRootSigma2[0] * 1.001, kRootSigma2[1] * 0.999, kRootSigma2[2] * 1.001,
            kRootSigma2[3] * 0.999};
  auto s = solve_system(F, x0, cfg);
  CHECK(s.residual_norm < 1e-10);
  for (int i = 0; i < 4; ++i) CHECK(s.x[i] == doctest::Approx(kRootSigma2[i]).epsilon(1e-8));
}

TEST_CASE("solve_bifurcation at sigma = 2") {
  SolverConfig cfg;
  auto res = solve_bifurcation(Species::cation, 2.0, kCp, default_bifurcation_box(), cfg);
  REQUIRE_FALSE(res.points.empty());
  bool found_reference = false;
  for (const auto& p : res.points) {
    CHECK(p.residual <= cfg.residual_tol);
    CHECK(std::abs(p.validation.lambda_k - 1.0) <= 1e-6);
    CHECK(std::abs(p.validation.dlambda_dV) <= 1e-4);
    CHECK(p.V < 0.0);
    CHECK(p.I < 0.0);
    CHECK(p.lambda2() > 1.0);
    CHECK(p.l > 0.0);
    CHECK(p.r > 0.0);
    CHECK(p.A > 0.0);
    CHECK(p.B > 0.0);
    CHECK(p.r == doctest::Approx(p.l / 2.0));
    double j10 = zero_charge_flux(ScaledBoundary(p.l, p.r, p.V), kCp, Species::cation);
    CHECK(std::abs(p.I + p.l - p.A - 2.0 * j10) <= 1e-8 * std::max(1.0, std::abs(p.I)));
    found_reference |= std::abs(p.l - kRootSigma2[0]) < 1e-6 * kRootSigma2[0];
  }
  CHECK(found_reference);
  for (std::size_t i = 1; i < res.points.size(); ++i)
    CHECK(res.points[i - 1].l <= res.points[i].l);
}

TEST_CASE("solve_bifurcation rejects sigma = 1") {
  auto res = solve_bifurcation(Species::cation, 1.0, kCp, default_bifurcation_box());
  CHECK(res.points.empty());
  CHECK_FALSE(res.warnings.empty());
}

TEST_CASE("validate_bifurcation reports reasons") {
  SolverConfig cfg;
  std::string reason;
  auto ok = validate_bifurcation(Species::cation, 3.0, kRootSigma3, kCp, cfg, {}, &reason);
  REQUIRE(ok);
  CHECK(ok->lambda2() == doctest::Approx(1.11621).epsilon(1e-4));
  BifVector off = kRootSigma3;
  off[3] += 0.5;
  auto bad = validate_bifurcation(Species::cation, 3.0, off, kCp, cfg, {}, &reason);
  CHECK_FALSE(bad);
  CHECK_FALSE(reason.empty());
}

TEST_CASE("discrete unimodality") {
  using XY = std::vector<std::pair<double, double>>;
  CHECK(discrete_unimodal(XY{{0, 1}, {1, 3}, {2, 2}}) == Verdict::pass);
  CHECK(discrete_unimodal(XY{{2, 2}, {0, 1}, {1, 3}}) == Verdict::pass);
  CHECK(discrete_unimodal(XY{{0, 1}, {1, 2}, {2, 3}}) == Verdict::fail);
  CHECK(discrete_unimodal(XY{{0, 1}, {1, 3}, {2, 1}, {3, 4}}) == Verdict::fail);
  CHECK(discrete_unimodal(XY{{0, 1}, {1, 2}}) == Verdict::skipped);
  CHECK(std::string(to_string(Verdict::pass)) == "pass");
}

TEST_CASE("branch summary on a synthetic branch") {
  std::vector<BifurcationPoint> pts;
  for (int i = 0; i < 5; ++i) {
    BifurcationPoint p;
    p.l = 1.0 + i;
    p.V = -1.0 - i;
    p.I = -2.0 - i;
    p.j1 = -1.1 + 0.5 * i;
    p.j2 = 1.1 - 0.5 * i;
    p.lambda_other = 1.0 + (i == 2 ? 0.5 : 0.1 * (2 - std::abs(i - 2)));
    pts.push_back(p);
  }
  auto s = summarize_branch(pts);
  CHECK(s.points == 5);
  REQUIRE(s.argmax_lambda2);
  CHECK(*s.argmax_lambda2 == 2);
  CHECK(*s.l_star == 3.0);
  CHECK(s.l_star_interior);
  CHECK(s.j1_increasing == Verdict::pass);
  CHECK(s.j2_decreasing == Verdict::pass);
  CHECK(s.V_negative == Verdict::pass);
  CHECK(s.I_negative == Verdict::pass);
  CHECK(s.sign_V_equals_sign_I == Verdict::pass);
  CHECK(s.lambda2_unimodal_in_l == Verdict::pass);
  REQUIRE(s.j1_sign_changes.size() == 1);
  CHECK(s.j1_sign_changes[0].l_left == 3.0);
  CHECK(s.j1_sign_changes[0].l_right == 4.0);
  CHECK(s.j2_sign_changes.size() == 1);
  CHECK(s.max_grid_step == 1.0);

  auto empty = summarize_branch({});
  CHECK(empty.points == 0);
  CHECK(empty.j1_increasing == Verdict::skipped);
}

TEST_CASE("cross-branch orderings need two branches") {
  std::vector<Branch> one(1);
  for (const auto& c : cross_branch_orderings(one)) CHECK(c.verdict == Verdict::skipped);
}
