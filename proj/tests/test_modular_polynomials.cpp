#include <cstdio>
#include <fstream>
#include <random>

#include "common.hpp"
#include "jmod/modular_forms.hpp"
#include "jmod/modular_polynomials.hpp"

using namespace jmod;
using namespace testing_util;

TEST(Phi, LevelOneIsXMinusY) {
  ModularPolynomial p = compute_phi(1, ctx());
  EXPECT_EQ(p.coeff(1, 0), 1);
  EXPECT_EQ(p.coeff(0, 1), -1);
  EXPECT_EQ(p.coeffs.size(), 2u);
}

TEST(Phi, LevelTwoMatchesClassicalTable) {
  ModularPolynomial p = compute_phi(2, ctx());
  auto want = oracle::phi2();
  EXPECT_EQ(p.coeffs.size(), want.size());
  for (const auto& [ij, c] : want) EXPECT_EQ(p.coeff(ij.first, ij.second), c) << ij.first << "," << ij.second;
  EXPECT_EQ(p.eval(287496, 1728), 0);
}

TEST(Phi, VanishesOnIsogenousPairs) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ure(-0.5, 0.5), uim(0.6, 1.4);
  for (long n : {3L, 4L, 5L}) {
    ModularPolynomial p = compute_phi(n, ctx());
    EXPECT_TRUE(p.symmetric());
    EXPECT_EQ(p.deg_x, hecke_index(n));
    for (int t = 0; t < 3; ++t) {
      PrecisionScope s(ctx().work_bits());
      Real re(ure(rng));
      Real im(uim(rng));
      Complex z(re, im);
      Complex x = oracle::j(z * n, 400), y = oracle::j(z, 400);
      PhiValue v = phi_evaluate(p, x, y);
      EXPECT_LT(abs(v.value) / v.scale, ctx().tol());
      // and not on an unrelated pair
      Complex w = oracle::j(Complex(z.re + Real(1) / Real(7), z.im), 400);
      PhiValue u = phi_evaluate(p, x, w);
      EXPECT_GT(abs(u.value) / u.scale, ctx().tol());
    }
  }
}

TEST(Phi, IndependenceWitness) {
  Complex x = oracle::j(cz("3*(0.1+1.2i)"), 300), y = oracle::j(cz("0.1+1.2i"), 300);
  auto r = modularly_independent(x, y, ctx());
  EXPECT_FALSE(r.independent);
  EXPECT_EQ(r.witness, 3);
  auto s = modularly_independent(oracle::j(cz("e+pi*i"), 300), y, ctx());
  EXPECT_TRUE(s.independent);
}

TEST(Phi, CacheRoundTrip) {
  const std::string path = ::testing::TempDir() + "phi_cache_test.txt";
  phi_export(path, {2, 3}, ctx());
  auto levels = phi_import(path, ctx());
  EXPECT_EQ(levels, (std::vector<long>{2, 3}));
  {
    std::ofstream bad(path);
    bad << "garbage\n";
  }
  EXPECT_THROW(phi_import(path, ctx()), Error);
  std::remove(path.c_str());
}

TEST(DimG, CountsOrbits) {
  std::vector<HPoint> pts{HPoint(cz("e+pi*i")), HPoint(cz("(e+pi*i)/2 + 1")), HPoint(cz("0.1+1.3i"))};
  EXPECT_EQ(dim_G(pts, {}, ctx()).dim, 2);
  EXPECT_EQ(dim_G(pts, {HPoint(cz("0.1+1.3i"))}, ctx()).dim, 1);
  EXPECT_EQ(dim_G({}, {}, ctx()).dim, 0);
}
