#include <random>

#include "common.hpp"
#include "jmod/modular_forms.hpp"

using namespace jmod;
using namespace testing_util;

TEST(Jet, MatchesRamanujanOracle) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ure(-2, 2), uim(0.3, 3);
  for (int t = 0; t < 20; ++t) {
    PrecisionScope s(ctx().work_bits());
    Real re(ure(rng));
    Real im(uim(rng));
    Complex z(re, im);
    JJet jt = jet(HPoint(z), ctx(), 3);
    auto o = oracle::j_jet(z, 320);
    const Complex got[] = {jt.j, jt.j1, jt.j2, jt.j3};
    for (int k = 0; k < 4; ++k) {
      Real rel = abs(got[k] - o[static_cast<std::size_t>(k)]) / (Real(1) + abs(o[static_cast<std::size_t>(k)]));
      EXPECT_LT(rel, pow2(-180)) << "order " << k << " at " << to_string(z, 20);
    }
  }
}

TEST(Jet, LowerHalfPlaneByReflection) {
  PrecisionScope s(ctx().work_bits());
  Complex z = cz("0.2+1.1i");
  Complex up = j_value(HPoint(z), ctx());
  Complex down = j_value(HPoint(conj(z)), ctx());
  EXPECT_LT(abs(down - conj(up)), pow2(-200) * abs(up));
}

TEST(Jet, SpecialValues) {
  PrecisionScope s(ctx().work_bits());
  EXPECT_LT(abs(j_value(HPoint(cz("i")), ctx()) - Complex(Real(1728))), pow2(-200));
  EXPECT_LT(abs(j_value(HPoint(cz("(1+i*sqrt(3))/2")), ctx())), pow2(-200));
  EXPECT_LT(abs(j_value(HPoint(cz("i*sqrt(2)")), ctx()) - Complex(Real(8000))), pow2(-200));
}

TEST(Psi, VanishesOnJet) {
  PrecisionScope s(ctx().work_bits());
  JJet jt = jet(HPoint(cz("0.31+0.93i")), ctx(), 3);
  auto o = std::array<Complex, 4>{jt.j, jt.j1, jt.j2, jt.j3};
  EXPECT_LT(abs(oracle::psi(o)), pow2(-150));
  EXPECT_LT(abs(psi(jt, ctx())), pow2(-150) * (Real(1) + abs(jt.j3 / jt.j1)));
  Complex e = eta_j3(jt.j, jt.j1, jt.j2, ctx());
  EXPECT_LT(abs(e - jt.j3) / abs(jt.j3), pow2(-150));
}

TEST(Psi, DegenerateAtElliptic) {
  JJet jt = jet(HPoint(cz("i")), ctx(), 3);
  EXPECT_THROW(psi(jt, ctx()), Error);
  EXPECT_FALSE(jet_nondegenerate(jt, ctx()));
}

TEST(JInverse, RoundTrip) {
  for (const char* v : {"1", "-3000.5+12i", "1e9", "1728+1e-3i"}) {
    PrecisionScope s(ctx().work_bits());
    Complex w = cz(v);
    HPoint z = j_inverse(w, ctx());
    Complex back = oracle::j(z.value(), 320);
    EXPECT_LT(abs(back - w), pow2(-150) * (Real(1) + abs(w))) << v;
  }
}

TEST(Truncation, GrowsWithPrecision) {
  PrecisionContext lo = PrecisionContext::with_bits(128), hi = PrecisionContext::with_bits(1024);
  EXPECT_LT(truncation_order(lo, 0.866), truncation_order(hi, 0.866));
}
