#include <random>

#include "closure_oracle.hpp"
#include "common.hpp"
#include "jmod/closure_geometry.hpp"
#include "jmod/fixtures.hpp"
#include "jmod/json_io.hpp"

using namespace jmod;
using namespace testing_util;

namespace {

Configuration generic_pair() {
  Configuration c;
  c.basis_points = {HPoint(cz("e+pi*i")), HPoint(cz("0.1+1.3i"))};
  return c;
}

}  // namespace

TEST(Validate, GenericPointsAreValid) {
  Configuration c = generic_pair();
  auto r = validation_report(c, ctx());
  EXPECT_TRUE(r.valid);
  EXPECT_TRUE(r.violations.empty());
}

TEST(Validate, FalseRelationRejected) {
  Configuration c = generic_pair();
  c.add_relation("j(X1) - 5");
  auto r = validation_report(c, ctx());
  EXPECT_FALSE(r.valid);
  try {
    config_validate(c, ctx());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::validation);
  }
}

TEST(Validate, UndeclaredModularDependence) {
  Configuration c;
  c.basis_points = {HPoint(cz("2*(e+pi*i)")), HPoint(cz("e+pi*i"))};
  EXPECT_FALSE(validation_report(c, ctx()).valid);
  c.modular.push_back({0, 1, GL2Q::from_ints(2, 0, 0, 1)});
  auto r = validation_report(c, ctx());
  EXPECT_TRUE(r.valid);
  ASSERT_EQ(r.claims.size(), 1u);
  EXPECT_TRUE(r.claims[0].ok);
  // a wrong claim
  c.modular[0].g = GL2Q::from_ints(3, 0, 0, 1);
  EXPECT_FALSE(validation_report(c, ctx()).valid);
}

TEST(Validate, DegenerateSpecialPointIsFlagged) {
  Configuration c;
  c.basis_points = {HPoint(cz("i"))};
  auto r = validation_report(c, ctx());
  EXPECT_TRUE(r.valid);
  EXPECT_FALSE(r.flags.empty());
}

TEST(Delta, GenericPoints) {
  Configuration c = generic_pair();
  DeltaReport d = delta(c, ctx());
  EXPECT_EQ(d.trdeg_estimate, 8);
  EXPECT_EQ(d.dim_g, 2);
  EXPECT_EQ(d.delta, 2);
  EXPECT_EQ(xi_dim(c, ctx()).xi_dim, 2);
}

TEST(Delta, PinnedPointDropsByFour) {
  // j(X1) = 5 gives the orbit trdeg 3 (z, j', j'' still free)
  Configuration c;
  c.basis_points = {j_inverse(Complex(Real(5)), ctx())};
  c.add_relation("j(X1) - 5");
  DeltaReport d = delta(c, ctx());
  EXPECT_EQ(d.trdeg_estimate, 3);
  EXPECT_EQ(d.delta, 0);
}

TEST(Delta, DimDeltaOfGenericSingletonAndEmpty) {
  Configuration c;
  c.basis_points = {HPoint(cz("e+pi*i"))};
  EXPECT_EQ(dim_delta({0}, c, ctx()), 1);
  EXPECT_EQ(dim_delta({}, c, ctx()), 0);
}

TEST(Fixtures, AgreeWithRankOracle) {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 15; ++t) {
    auto f = fixtures::random_fixture(rng, ctx());
    oracle::ClosureOracle o(f, ctx().bits);
    ClosureAnalysis a(f.config, ctx());
    auto labels = o.labels();
    DeltaReport d = a.delta();
    EXPECT_EQ(d.trdeg_estimate, o.trdeg(labels)) << "fixture " << t;
    EXPECT_EQ(d.dim_g, static_cast<long>(labels.size()));
    EXPECT_EQ(a.xi().xi_dim, o.xi()) << "fixture " << t;
  }
}

TEST(Fixtures, SubmodularOnOracleAndLibrary) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int t = 0; t < 10; ++t) {
    fixtures::Options opt;
    opt.max_points = 5;
    auto f = fixtures::random_fixture(rng, ctx(), opt);
    oracle::ClosureOracle o(f, ctx().bits);
    ClosureAnalysis a(f.config, ctx());
    auto labels = o.labels();
    std::vector<int> la, lb, lu, li;
    std::vector<std::size_t> ba, bb, bu, bi;
    for (std::size_t k = 0; k < labels.size(); ++k) {
      bool x = coin(rng), y = coin(rng);
      if (x) la.push_back(labels[k]), ba.push_back(k);
      if (y) lb.push_back(labels[k]), bb.push_back(k);
      if (x || y) lu.push_back(labels[k]), bu.push_back(k);
      if (x && y) li.push_back(labels[k]), bi.push_back(k);
    }
    EXPECT_LE(o.delta(lu) + o.delta(li), o.delta(la) + o.delta(lb));
    EXPECT_EQ(a.delta_of(bu).delta, o.delta(lu));
    EXPECT_EQ(a.delta_of(bi).delta, o.delta(li));
  }
}

TEST(Fixtures, ClosureIsMinimal) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 8; ++t) {
    auto f = fixtures::random_fixture(rng, ctx());
    oracle::ClosureOracle o(f, ctx().bits);
    ClosureAnalysis a(f.config, ctx());
    auto labels = o.labels();
    for (std::size_t b = 0; b < labels.size(); ++b) {
      long best = 1L << 30;
      for (unsigned m = 0; m < (1u << labels.size()); ++m) {
        if (!(m & (1u << b))) continue;
        std::vector<int> ls;
        for (std::size_t q = 0; q < labels.size(); ++q)
          if (m & (1u << q)) ls.push_back(labels[q]);
        best = std::min(best, o.delta(ls));
      }
      auto cl = a.ss_closure({b});
      EXPECT_EQ(cl.report.delta, best);
      EXPECT_TRUE(a.self_sufficient(cl.orbits));
    }
  }
}

TEST(Submodular, MergedConfigurations) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 5; ++t) {
    fixtures::Options opt;
    opt.max_points = 4;
    auto f = fixtures::random_fixture(rng, ctx(), opt);
    std::vector<std::size_t> pa, pb;
    for (std::size_t k = 0; k < f.orbit.size(); ++k) (k % 2 ? pa : pb).push_back(k);
    pa.push_back(0);
    auto r = check_submodular(restrict_configuration(f.config, pa), restrict_configuration(f.config, pb), ctx());
    EXPECT_TRUE(r.holds);
  }
}

TEST(Json, ConfigRoundTrip) {
  Configuration c = generic_pair();
  c.basis_points[1] = j_inverse(Complex(Real(5)), ctx());
  c.add_relation("j(X2) - 5");
  json j = config_to_json(c, 80);
  Configuration back = config_from_json(j, ctx());
  EXPECT_EQ(back.n(), 2u);
  EXPECT_EQ(back.relations.size(), 1u);
  PrecisionScope s(ctx().work_bits());
  EXPECT_LT(abs(back.basis_points[0].value() - c.basis_points[0].value()), pow2(-250));
  EXPECT_THROW(config_from_json(json::parse(R"({"points": ["1"]})"), ctx()), Error);
}

namespace {

// a point pinned by j = 5
Configuration rigid_point(const HPoint& p) {
  Configuration cfg;
  cfg.basis_points = {p};
  cfg.add_relation("j(X1) - 5");
  return cfg;
}

}  // namespace

TEST(SelfSufficient, TranslatePairAndPinnedPoint) {
  // X2 = X1 + 1 with all four coordinate identities declared: trdeg 4 for 2 points
  Configuration c;
  HPoint z(cz("e+pi*i"));
  c.basis_points = {z, HPoint(cz("e+pi*i+1"))};
  c.modular.push_back({1, 0, GL2Q::from_ints(1, 1, 0, 1)});
  for (const char* r : {"X2 - X1 - 1", "j(X2) - j(X1)", "j1(X2) - j1(X1)", "j2(X2) - j2(X1)"}) c.add_relation(r);
  ClosureAnalysis a(c, ctx());
  EXPECT_EQ(a.delta().trdeg_estimate, 4);
  EXPECT_EQ(a.delta().delta, 1);
  EXPECT_TRUE(a.self_sufficient({}));

  Configuration p = rigid_point(j_inverse(Complex(Real(5)), ctx()));
  ClosureAnalysis b(p, ctx());
  EXPECT_EQ(b.delta().delta, 0);
  EXPECT_TRUE(b.self_sufficient({}));
  EXPECT_TRUE(b.self_sufficient(b.all_orbits()));
}

TEST(Closure, AbsorbsTiedOrbit) {
  // orbit 2 is tied to orbit 1 by j(X2) = j(X1) + X1 + 3: delta({1,2}) = 8 - 1 - 6 = 1,
  // delta({1}) = 1, delta({2}) = 1 as well; ties keep the smaller set
  Configuration c;
  HPoint z1(cz("0.2+1.1i"));
  PrecisionScope s(ctx().work_bits());
  Complex target = j_value(z1, ctx()) + z1.value() + 3;
  c.basis_points = {z1, j_inverse(target, ctx())};
  c.add_relation("j(X2) - j(X1) - X1 - 3");
  ClosureAnalysis a(c, ctx());
  auto cl = a.ss_closure({0});
  EXPECT_EQ(cl.orbits, std::vector<std::size_t>{0});
  EXPECT_EQ(cl.report.delta, 1);
  EXPECT_EQ(a.delta().delta, 1);
}

TEST(Monotonicity, AddingRelationsNeverIncreases) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 8; ++t) {
    auto f = fixtures::random_fixture(rng, ctx());
    Configuration c = f.config;
    Configuration fewer = c;
    if (fewer.relations.empty()) continue;
    fewer.relations.pop_back();
    EXPECT_LE(trdeg_estimate(c, ctx()), trdeg_estimate(fewer, ctx()));
    EXPECT_LE(xi_dim(c, ctx()).xi_dim, xi_dim(fewer, ctx()).xi_dim);
  }
}

TEST(Xi, SingleRelationOnTwoPoints) {
  Configuration c = generic_pair();
  PrecisionScope s(ctx().work_bits());
  Complex target = oracle::j(c.basis_points[0].value(), 320) * 2 + 7;
  c.basis_points[1] = j_inverse(target, ctx());
  c.add_relation("j(X2) - 2*j(X1) - 7");
  EXPECT_EQ(xi_dim(c, ctx()).xi_dim, 1);
  EXPECT_EQ(trdeg_estimate(c, ctx()), 7);
}

TEST(SelfSufficient, NegativeDeltaAtSpecialPoint) {
  // z = i: z^2 + 1 = 0, j = 1728, j' = 0 leave only j'' free, so delta = 1 - 3
  Configuration c;
  c.basis_points = {HPoint(cz("i"))};
  for (const char* r : {"X1^2 + 1", "j(X1) - 1728", "j1(X1)"}) c.add_relation(r);
  ClosureAnalysis a(c, ctx());
  EXPECT_EQ(a.delta().trdeg_estimate, 1);
  EXPECT_EQ(a.delta().delta, -2);
  EXPECT_FALSE(a.self_sufficient({}));
  EXPECT_EQ(a.dim_delta({}), -2);
  // over the special base the orbit does not count
  c.base_kind = BaseKind::special;
  EXPECT_EQ(delta(c, ctx()).delta, 1);
}
