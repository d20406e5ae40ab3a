#include "common.hpp"
#include "jmod/jpolynomial.hpp"
#include "jmod/modular_forms.hpp"

using namespace jmod;
using namespace testing_util;

TEST(JPoly, ArithmeticAndPrinting) {
  JPoly x = JPoly::var(1), j = JPoly::j(0, 1);
  JPoly p = (x + j) * (x - j);
  EXPECT_EQ(p, x * x - j * j);
  EXPECT_TRUE((p - p).is_zero());
  EXPECT_EQ(jp_parse(p.to_string()), p);
  EXPECT_TRUE(JPoly(5).is_constant());
}

TEST(JPoly, ParseRoundTrip) {
  for (const char* s : {"j(X1)*j1(X2) - 3*X1^2 + 1/2", "j2(X3) + i*X1", "j(X1) - 287496", "j([[2,0],[0,1]]*X1) - j(X1)"}) {
    JPoly p = jp_parse(s);
    EXPECT_EQ(jp_parse(p.to_string()), p) << s;
  }
  EXPECT_THROW(jp_parse("j(X1"), Error);
  EXPECT_THROW(jp_parse("X0"), Error);
}

TEST(JPoly, DerivationRules) {
  JPoly p = jp_parse("X1*j(X1) + j1(X1)^2");
  // d/dX1 = j + X1 j1 + 2 j1 j2
  EXPECT_EQ(jp_diff(p, 1), jp_parse("j(X1) + X1*j1(X1) + 2*j1(X1)*j2(X1)"));
  EXPECT_TRUE(jp_diff(p, 2).is_zero());
  EXPECT_EQ(jp_coord_diff(p, Generator{GenKind::J0, 1}), JPoly::var(1));
}

TEST(JPoly, DerivativeMatchesFiniteDifference) {
  // f(z) = z j(2z) j'(z); compare with a central difference of oracle values
  JPoly p = jp_parse("X1*j([[2,0],[0,1]]*X1)*j1(X1)");
  JPoly dp = jp_diff(p, 1);
  PrecisionScope s(ctx().work_bits());
  Complex z = cz("0.17+1.05i");
  JAssignment a{{1, HPoint(z)}};
  Complex got = jp_eval(dp, a, ctx());
  const long bits = 600;
  PrecisionScope s2(bits);
  Real h = Real::pow2(-120, bits);
  auto f = [&](const Complex& w) {
    auto o1 = oracle::j_jet(w, bits);
    Complex two = w * 2;
    return w * oracle::j(two, bits) * o1[1];
  };
  Complex zp = z.at_precision(bits), zm = z.at_precision(bits);
  zp.re += h;
  zm.re -= h;
  Complex want = (f(zp) - f(zm)) / (h * 2);
  EXPECT_LT(abs(got - want) / abs(want), pow2(-100));
}

TEST(JPoly, EvaluationAgreesWithOracle) {
  JPoly p = jp_parse("j(X1)*j2(X2) - X1");
  Complex z1 = cz("0.3+1.2i"), z2 = cz("-0.4+0.9i");
  JAssignment a{{1, HPoint(z1)}, {2, HPoint(z2)}};
  Complex got = jp_eval(p, a, ctx());
  PrecisionScope s(ctx().work_bits());
  Complex want = oracle::j(z1, 320) * oracle::j_jet(z2, 320)[2] - z1;
  EXPECT_LT(abs(got - want) / abs(want), pow2(-200));
}

TEST(Flatten, NestedExample) {
  FlatSystem fs = flatten("j(j'(X^2) + 4) = 1");
  std::vector<std::string> eqs;
  for (const auto& e : fs.equations) eqs.push_back(e.to_string());
  EXPECT_EQ(eqs, (std::vector<std::string>{"j(X1) = 1", "j1(X2) + 4 = X1", "X3^2 = X2"}));
  EXPECT_EQ(fs.fresh, 2);
}

TEST(Flatten, AlreadyFlat) {
  FlatSystem fs = flatten("j(X1) = X1");
  ASSERT_EQ(fs.equations.size(), 1u);
  EXPECT_EQ(fs.fresh, 0);
}
