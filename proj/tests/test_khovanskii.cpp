#include "common.hpp"
#include "jmod/khovanskii.hpp"

using namespace jmod;
using namespace testing_util;

TEST(Newton, SingleJEquation) {
  auto sys = KhovanskiiSystem::from_polys({jp_parse("j(X1) - 287496")});
  auto sols = newton_solve(sys, SolveConfig{}, ctx());
  ASSERT_EQ(sols.size(), 1u);
  PrecisionScope s(ctx().work_bits());
  EXPECT_LT(abs(sols[0].points[0] - cz("2i")), pow2(-150));
  EXPECT_TRUE(sols[0].nonsingular);
  EXPECT_TRUE(verify_certificate(sys, {{1, HPoint(sols[0].points[0])}}, ctx()));
}

TEST(Newton, EllipticPointIsNotCertified) {
  auto sys = KhovanskiiSystem::from_polys({jp_parse("j(X1) - 1728")});
  auto rep = newton_solve_report(sys, SolveConfig{}, ctx());
  EXPECT_TRUE(rep.solutions.empty());
}

TEST(Newton, TwoVariableSystem) {
  // X2 = 2 X1 and j(X1) = j(X2) - 100; checked against the oracle j
  auto sys = KhovanskiiSystem::from_polys({jp_parse("X2 - 2*X1"), jp_parse("j(X1) - j(X2) + 100")});
  SolveConfig cfg;
  cfg.grid = 3;
  auto sols = newton_solve(sys, cfg, ctx());
  ASSERT_FALSE(sols.empty());
  for (const auto& s : sols) {
    PrecisionScope sc(ctx().work_bits());
    Complex r = oracle::j(s.points[0], 320) - oracle::j(s.points[1], 320) + 100;
    EXPECT_LT(abs(r), pow2(-100) * (Real(1) + abs(oracle::j(s.points[0], 320))));
    EXPECT_LT(abs(s.points[1] - s.points[0] * 2), pow2(-150));
  }
}

TEST(Newton, Deterministic) {
  auto sys = KhovanskiiSystem::from_polys({jp_parse("X1 - j(X1) - 10")});
  auto a = newton_solve(sys, SolveConfig{}, ctx()), b = newton_solve(sys, SolveConfig{}, ctx());
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k].points[0], b[k].points[0]);
}

TEST(System, RejectsNonSquare) {
  EXPECT_THROW(KhovanskiiSystem::from_polys({jp_parse("j(X2) - 1")}), Error);
  EXPECT_THROW(KhovanskiiSystem::from_polys({jp_parse("j3(X1) - 1")}), Error);
}

TEST(Iterated, CompositionHolds) {
  for (long n : {1L, 2L}) {
    auto rep = solve_iterated(n, Complex(Real(10)), SolveConfig{}, ctx(), GaussQ(10));
    ASSERT_FALSE(rep.solve.solutions.empty()) << n;
    PrecisionScope s(ctx().work_bits());
    Complex z = rep.solve.solutions[0].points[0];
    Complex w = z;
    for (long k = 0; k < n; ++k) w = oracle::j(w, 320);
    EXPECT_LT(abs(z - w - 10) / (Real(1) + abs(z)), pow2(-100)) << n;
  }
}

TEST(Curve, ExpConstants) {
  const long bits = ctx().work_bits();
  auto omega = oracle::newton([](const Complex& w) { return w * oracle::cexp(w) - 1; },
                              [](const Complex& w) { return oracle::cexp(w) * (w + 1); }, Complex(Real(0.5)), bits, 60);
  auto fixed = oracle::newton([](const Complex& w) { return oracle::cexp(w) - w; },
                              [](const Complex& w) { return oracle::cexp(w) - 1; },
                              Complex(Real(0.3), Real(1.3)), bits, 60);
  auto w = ec_exp_solve(CurveSpec::parse("X*Y - 1"), SolveConfig{}, ctx());
  auto e = ec_exp_solve(CurveSpec::parse("Y - X"), SolveConfig{}, ctx());
  auto near = [&](const std::vector<Solution>& v, const Complex& t) {
    for (const auto& s : v)
      if (abs(s.points[0] - t) < pow2(-100)) return true;
    return false;
  };
  EXPECT_TRUE(near(w, omega));
  EXPECT_TRUE(near(e, fixed));
}

TEST(Curve, JCurveZeros) {
  // j(z) = z + 1000 in the default strip; each zero checked with the oracle
  SolveConfig cfg;
  cfg.box = std::array<double, 4>{-0.5, 0.5, 0.8, 2.0};
  auto sols = ec_curve_solve(CurveSpec::parse("Y - X - 1000"), cfg, ctx());
  EXPECT_FALSE(sols.empty());
  for (const auto& s : sols) {
    PrecisionScope sc(ctx().work_bits());
    Complex r = oracle::j(s.points[0], 320) - s.points[0] - 1000;
    EXPECT_LT(abs(r), pow2(-100) * Real(1000));
  }
  EXPECT_THROW(CurveSpec::parse("X - 1").validate(), Error);
}
