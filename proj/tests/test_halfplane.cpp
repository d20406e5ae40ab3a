#include <random>

#include "common.hpp"
#include "jmod/halfplane.hpp"

using namespace jmod;
using namespace testing_util;

TEST(HPoint, RejectsRealAxis) { EXPECT_THROW(HPoint(cz("3")), Error); }

TEST(Action, MoebiusAndOrientation) {
  HPoint z(cz("0.25+2i"));
  HPoint w = act(GL2Q::from_ints(0, -1, 1, 0), z, ctx());
  PrecisionScope s(ctx().work_bits());
  Complex want = Complex(Real(-1)) / z.value();
  EXPECT_LT(abs(w.value() - want), pow2(-250));
  HPoint neg = act(GL2Q::from_ints(1, 0, 0, -1), z, ctx());
  EXPECT_FALSE(neg.upper());
}

TEST(Red, PrimitiveRescaling) {
  GL2Q g{mpq_class(1, 2), mpq_class(3, 4), mpq_class(0), mpq_class(5, 6)};
  PrimitiveIntMatrix m = red(g);
  // 12*g = [[6, 9], [0, 10]], gcd 1
  EXPECT_EQ(m.a, 6);
  EXPECT_EQ(m.b, 9);
  EXPECT_EQ(m.c, 0);
  EXPECT_EQ(m.d, 10);
  EXPECT_EQ(m.n, 60);
}

TEST(Reduce, LandsInFundamentalDomain) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ure(-3, 3), uim(0.01, 0.6);
  for (int t = 0; t < 40; ++t) {
    PrecisionScope s(ctx().work_bits());
    Real re(ure(rng));
    Real im(uim(rng));
    HPoint z(Complex(re, im));
    Reduction r = reduce_fundamental(z, ctx());
    const Complex& w = r.z0.value();
    EXPECT_LE(abs(w.re), Real::from_string("0.5000001", 64));
    EXPECT_GE(abs(w), Real::from_string("0.9999999", 64));
    EXPECT_EQ(r.gamma.det(), 1);
    HPoint back = act(r.gamma.to_gl2q(), r.z0, ctx());
    EXPECT_LT(abs(back.value() - z.value()), pow2(-200));
  }
}

TEST(Special, QuadraticIrrationalities) {
  auto f = is_special(HPoint(cz("i")), ctx());
  ASSERT_TRUE(f);
  EXPECT_EQ(f->discriminant(), -4);
  auto g = is_special(HPoint(cz("(1+i*sqrt(163))/2")), ctx());
  ASSERT_TRUE(g);
  EXPECT_EQ(g->discriminant(), -163);
  EXPECT_FALSE(is_special(HPoint(cz("e+pi*i")), ctx()));
}

TEST(Hecke, RepresentativeCount) {
  for (long n = 1; n <= 12; ++n) {
    auto reps = hecke_representatives(n);
    EXPECT_EQ(static_cast<long>(reps.size()), hecke_index(n));
    for (const auto& m : reps) EXPECT_EQ(m.det(), n);
  }
  EXPECT_EQ(hecke_index(6), 12);
}

TEST(ModularRelation, FindsLevelTwo) {
  HPoint a(cz("2*(e+pi*i)")), b(cz("e+pi*i"));
  auto rel = find_modular_relation(a, b, ctx());
  ASSERT_TRUE(rel);
  EXPECT_EQ(rel->n, 2);
  HPoint img = act(rel->g, b, ctx());
  EXPECT_LT(abs(img.value() - a.value()), pow2(-200));
  EXPECT_FALSE(find_modular_relation(HPoint(cz("e+pi*i")), HPoint(cz("0.1+1.3i")), ctx()));
}
