#include "common.hpp"
#include "jmod/error.hpp"
#include "jmod/numerics.hpp"

using namespace jmod;
using namespace testing_util;

TEST(Real, PrecisionScopeSetsDefault) {
  {
    PrecisionScope s(512);
    EXPECT_EQ(Real(1).precision(), 512);
  }
  EXPECT_NE(Real(1).precision(), 512);
}

TEST(Real, ElementaryValues) {
  PrecisionScope s(300);
  Real pi = Real::pi(300);
  EXPECT_LT(abs(sin(pi)), Real::pow2(-290, 300));
  EXPECT_EQ(Real::pow2(-3, 300), Real::from_string("0.125", 300));
  Complex w = sqrt(Complex(Real(-4)));
  EXPECT_TRUE(w.re.is_zero());
  EXPECT_EQ(w.im, Real(2));
}

TEST(Parse, ComplexExpressions) {
  Complex a = cz("(1+i*sqrt(3))/2");
  PrecisionScope s(400);
  EXPECT_EQ(a.re, Real::from_string("0.5", 400));
  EXPECT_LT(abs(a.im * a.im - Real::from_string("0.75", 400)), pow2(-390));
  Complex b = cz("2i");
  EXPECT_EQ(b.im, Real(2));
  EXPECT_THROW(cz("1 +"), Error);
  try {
    cz("foo");
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::parse);
  }
}

TEST(IntegerRelation, FindsKnownRelation) {
  PrecisionScope s(ctx().work_bits());
  Real r2 = sqrt(Real(2));
  // 1, sqrt2, 3 - 5 sqrt2 : 3*1 - 5*sqrt2 - x = 0
  Real x = Real(3) - Real(5) * r2;
  auto rel = integer_relation(std::vector<Real>{Real(1), r2, x}, ctx());
  ASSERT_TRUE(rel);
  ASSERT_EQ(rel->coeffs.size(), 3u);
  // oracle: plug back in
  Real res = Real(rel->coeffs[0]) + Real(rel->coeffs[1]) * r2 + Real(rel->coeffs[2]) * x;
  EXPECT_LT(abs(res), pow2(-200));
  EXPECT_GT(rel->coeffs[2], 0);  // last nonzero coefficient positive
  EXPECT_EQ(abs(rel->coeffs[2]), 1);
}

TEST(IntegerRelation, NoneForIndependentValues) {
  PrecisionScope s(ctx().work_bits());
  Real pi = Real::pi(ctx().work_bits());
  Real e = exp(Real(1));
  auto rel = integer_relation(std::vector<Real>{Real(1), pi, e}, ctx());
  EXPECT_FALSE(rel);
}

TEST(MinPoly, RecognisesAlgebraicNumbers) {
  PrecisionScope s(ctx().work_bits());
  Real x = sqrt(Real(2)) + sqrt(Real(3));
  auto p = min_poly_guess(x, 4, ctx());
  ASSERT_TRUE(p);
  // x^4 - 10 x^2 + 1
  EXPECT_EQ(p->to_string(), "X^4 - 10*X^2 + 1");
  auto g = min_poly_guess(Complex(Real(0), Real(1)), 2, ctx());
  ASSERT_TRUE(g);
  EXPECT_EQ(g->to_string(), "X^2 + 1");
  EXPECT_FALSE(min_poly_guess(Real::pi(ctx().work_bits()), 3, ctx()));
}

TEST(Context, Validation) {
  PrecisionContext c;
  EXPECT_EQ(c.tol(), Real::pow2(-128, c.work_bits()));
  c.bits = 16;
  EXPECT_THROW(c.validate(), Error);
}
