// Acceptance run: one PASS/FAIL line per criterion. Reference values come
// from tests/oracles.hpp, not from the library under test.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <string>

#include "closure_oracle.hpp"
#include "jmod/closure_geometry.hpp"
#include "jmod/fixtures.hpp"
#include "jmod/khovanskii.hpp"
#include "jmod/modular_forms.hpp"
#include "jmod/modular_polynomials.hpp"
#include "jmod/numerics.hpp"
#include "jmod/parse.hpp"
#include "jmod/selftest.hpp"
#include "oracles.hpp"

using namespace jmod;

namespace {

const PrecisionContext ctx;
const long wb = ctx.work_bits();

Real p2(long e) { return Real::pow2(e, wb); }
Complex cz(const char* s) { return parse_complex(s, wb + 64); }

int failures = 0;

void criterion(int id, const std::string& name, double limit_s, const std::function<std::string(bool&)>& body) {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  try {
    detail = body(ok);
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string("exception: ") + e.what();
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_s > 0 && secs >= limit_s) {
    ok = false;
    detail += " [over time limit " + std::to_string(limit_s) + " s]";
  }
  if (!ok) ++failures;
  std::printf("%s %d %s (%.2f s): %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), secs, detail.c_str());
  std::fflush(stdout);
}

std::string sci(const Real& x) { return x.is_zero() ? "0" : x.to_string(3); }

}  // namespace

int main() {
  criterion(1, "special values", 5.0, [](bool& ok) {
    struct Case { const char* z; const char* target; };
    const Case cases[] = {{"i", "1728"},
                          {"(1+i*sqrt(3))/2", "0"},
                          {"2*i", "287496"},
                          {"i*sqrt(2)", "8000"},
                          {"(1+i*sqrt(163))/2", "-262537412640768000"}};
    Real worst(0);
    for (const auto& c : cases) {
      PrecisionScope s(wb);
      Complex v = j_value(HPoint(cz(c.z)), ctx);
      mpz_class t(c.target);
      Real err = abs(v - Complex(Real(t)));
      // the oracle must agree with the classical integer too
      Real oerr = abs(oracle::j(cz(c.z), 320) - Complex(Real(t)));
      auto mp = min_poly_guess(v, 1, ctx);
      bool conf = mp && mp->coeffs.size() == 2 && mp->coeffs[1] == 1 && mp->coeffs[0] == -t;
      ok = ok && err <= Real::from_string("1e-40", wb) && oerr <= Real::from_string("1e-40", wb) && conf;
      worst = max(worst, err);
    }
    return "worst |j - target| = " + sci(worst);
  });

  criterion(2, "identity suite", 0, [](bool& ok) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> ure(-1, 1), uim(0.4, 2.5);
    std::uniform_int_distribution<int> word(0, 1), len(1, 6);
    Real inv(0), refl(0), psi_r(0), eta(0), fd(0);
    for (int t = 0; t < 100; ++t) {
      PrecisionScope s(wb);
      Real re(ure(rng));
      Real im(uim(rng));
      Complex z(re, im);
      JJet jt = jet(HPoint(z), ctx, 3);
      GL2Q g;
      const int l = len(rng);
      for (int k = 0; k < l; ++k) g = g * (word(rng) ? GL2Q::from_ints(0, -1, 1, 0) : GL2Q::from_ints(1, 1, 0, 1));
      Complex jg = j_value(act(g, HPoint(z), PrecisionContext::with_bits(2 * ctx.bits)), ctx);
      inv = max(inv, abs(jg - jt.j) / (Real(1) + abs(jt.j)));
      refl = max(refl, abs(j_value(HPoint(Complex(-z.re, z.im)), ctx) - conj(jt.j)) / (Real(1) + abs(jt.j)));
      std::array<Complex, 4> y{jt.j, jt.j1, jt.j2, jt.j3};
      Complex r = jt.j2 / jt.j1;
      psi_r = max(psi_r, abs(oracle::psi(y)) / (abs(jt.j3 / jt.j1) + abs(r * r)));
      eta = max(eta, abs(eta_j3(jt.j, jt.j1, jt.j2, ctx) - jt.j3) / (Real(1) + abs(jt.j3)));
      // finite differences of the oracle j at high precision
      const long hb = 4 * ctx.bits;
      PrecisionScope s2(hb);
      Real h = Real::pow2(-100, hb);
      Complex zp = z.at_precision(hb), zm = z.at_precision(hb);
      zp.re += h;
      zm.re -= h;
      auto a = oracle::j_jet(zp, hb), b = oracle::j_jet(zm, hb);
      const Complex* ex[] = {&jt.j1, &jt.j2, &jt.j3};
      for (std::size_t k = 0; k < 3; ++k) {
        Complex d = (a[k] - b[k]) / (h * 2);
        fd = max(fd, abs(d - *ex[k]) / abs(*ex[k]));
      }
    }
    ok = inv <= p2(-100) && refl <= p2(-100) && psi_r <= p2(-100) && eta <= p2(-100) && fd <= p2(-64);
    return "invariance " + sci(inv) + ", reflection " + sci(refl) + ", psi " + sci(psi_r) + ", eta " + sci(eta) +
           ", finite differences " + sci(fd);
  });

  criterion(3, "modular polynomials", 60.0, [](bool& ok) {
    ModularPolynomial p1 = compute_phi(1, ctx);
    ok = p1.coeffs.size() == 2 && p1.coeff(1, 0) == 1 && p1.coeff(0, 1) == -1;
    ModularPolynomial p2c = compute_phi(2, ctx);
    auto table = oracle::phi2();
    bool match = p2c.coeffs.size() == table.size();
    for (const auto& [ij, c] : table) match = match && p2c.coeff(ij.first, ij.second) == c;
    ok = ok && match;
    mpz_class exact = 0;
    for (const auto& [ij, c] : table) {
      mpz_class x, y;
      mpz_ui_pow_ui(x.get_mpz_t(), 287496, static_cast<unsigned long>(ij.first));
      mpz_ui_pow_ui(y.get_mpz_t(), 1728, static_cast<unsigned long>(ij.second));
      exact += c * x * y;
    }
    ok = ok && exact == 0 && p2c.eval(287496, 1728) == 0;
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> ure(-0.5, 0.5), uim(0.5, 1.5);
    Real worst(0);
    for (long n : {2L, 3L}) {
      ModularPolynomial p = compute_phi(n, ctx);
      ok = ok && p.symmetric() && p.deg_x == hecke_index(n);
      for (int t = 0; t < 10; ++t) {
        PrecisionScope s(wb);
        Real re(ure(rng));
        Real im(uim(rng));
        Complex z(re, im);
        PhiValue v = phi_evaluate(p, oracle::j(z * n, wb), oracle::j(z, wb));
        worst = max(worst, abs(v.value) / v.scale);
      }
    }
    ok = ok && worst <= ctx.tol();
    return std::string("phi2 table ") + (match ? "matches" : "differs") + ", phi2(287496,1728) = " + exact.get_str() +
           ", worst scaled residual " + sci(worst);
  });

  criterion(4, "khovanskii and EC", 120.0, [](bool& ok) {
    SolveConfig cfg;
    std::string d;
    {
      auto sys = KhovanskiiSystem::from_polys({jp_parse("j(X1) - 287496")});
      auto sols = newton_solve(sys, cfg, ctx);
      PrecisionScope s(wb);
      bool at2i = sols.size() == 1 && abs(sols[0].points[0] - cz("2i")) <= p2(-100) &&
                  verify_certificate(sys, {{1, HPoint(sols[0].points[0])}}, ctx);
      ok = ok && at2i;
      d += std::string("2i ") + (at2i ? "certified" : "missing");
    }
    {
      auto rep = newton_solve_report(KhovanskiiSystem::from_polys({jp_parse("j(X1) - 1728")}), cfg, ctx);
      ok = ok && rep.solutions.empty();
      d += ", j=1728 certified " + std::to_string(rep.solutions.size());
    }
    for (long n : {1L, 2L, 3L}) {
      auto rep = solve_iterated(n, Complex(Real(10)), cfg, ctx, GaussQ(10));
      long good = 0;
      for (const auto& s : rep.solve.solutions) {
        PrecisionScope sc(wb);
        Complex w = s.points[0];
        for (long k = 0; k < n; ++k) w = oracle::j(w, ctx.bits + 64);
        Real comp = abs(s.points[0] - w - 10) / (Real(1) + abs(s.points[0]));
        if (s.residual <= p2(-100) && s.nonsingular && comp <= p2(-100)) ++good;
      }
      ok = ok && good >= 1;
      d += ", iterj" + std::to_string(n) + " " + std::to_string(good);
    }
    {
      auto omega = oracle::newton([](const Complex& w) { return w * oracle::cexp(w) - 1; },
                                  [](const Complex& w) { return oracle::cexp(w) * (w + 1); }, Complex(Real(0.5)), wb, 60);
      auto fixed = oracle::newton([](const Complex& w) { return oracle::cexp(w) - w; },
                                  [](const Complex& w) { return oracle::cexp(w) - 1; }, Complex(Real(0.3), Real(1.3)),
                                  wb, 60);
      auto near = [&](const std::vector<Solution>& v, const Complex& t) {
        for (const auto& s : v)
          if (abs(s.points[0] - t) <= Real::from_string("1e-30", wb)) return true;
        return false;
      };
      bool a = near(ec_exp_solve(CurveSpec::parse("X*Y - 1"), cfg, ctx), omega);
      bool b = near(ec_exp_solve(CurveSpec::parse("Y - X"), cfg, ctx), fixed);
      ok = ok && a && b;
      d += std::string(", omega ") + (a ? "ok" : "missing") + ", exp fixed point " + (b ? "ok" : "missing");
    }
    return d;
  });

  criterion(5, "closure geometry", 0, [](bool& ok) {
    std::mt19937_64 rng(555);
    long agree = 0, closures = 0, checked = 0;
    for (int t = 0; t < 50; ++t) {
      auto f = fixtures::random_fixture(rng, ctx);
      oracle::ClosureOracle o(f, ctx.bits);
      ClosureAnalysis a(f.config, ctx);
      auto labels = o.labels();
      DeltaReport d = a.delta();
      if (d.trdeg_estimate == o.trdeg(labels) && d.dim_g == static_cast<long>(labels.size()) &&
          d.delta == o.delta(labels) && a.xi().xi_dim == o.xi())
        ++agree;
      if (labels.size() <= 10) {
        ++checked;
        bool all = true;
        for (std::size_t b = 0; b < labels.size(); ++b) {
          long best = 1L << 30;
          for (unsigned m = 0; m < (1u << labels.size()); ++m) {
            if (!(m & (1u << b))) continue;
            std::vector<int> ls;
            for (std::size_t q = 0; q < labels.size(); ++q)
              if (m & (1u << q)) ls.push_back(labels[q]);
            best = std::min(best, o.delta(ls));
          }
          all = all && a.ss_closure({b}).report.delta == best;
        }
        if (all) ++closures;
      }
    }
    long submod = 0;
    std::uniform_int_distribution<int> coin(0, 1);
    for (int t = 0; t < 50; ++t) {
      fixtures::Options opt;
      opt.max_points = 5;
      auto f = fixtures::random_fixture(rng, ctx, opt);
      oracle::ClosureOracle o(f, ctx.bits);
      std::vector<std::size_t> pa, pb;
      for (std::size_t k = 0; k < f.orbit.size(); ++k) {
        if (coin(rng)) pa.push_back(k);
        if (coin(rng)) pb.push_back(k);
      }
      auto rep = check_submodular(restrict_configuration(f.config, pa), restrict_configuration(f.config, pb), ctx);
      // oracle on the orbit-closed sets inside the fixture
      std::vector<int> la, lb, lu, li;
      for (std::size_t k : pa)
        if (!std::count(la.begin(), la.end(), f.orbit[k])) la.push_back(f.orbit[k]);
      for (std::size_t k : pb)
        if (!std::count(lb.begin(), lb.end(), f.orbit[k])) lb.push_back(f.orbit[k]);
      for (int l : o.labels()) {
        bool x = std::count(la.begin(), la.end(), l) > 0, y = std::count(lb.begin(), lb.end(), l) > 0;
        if (x || y) lu.push_back(l);
        if (x && y) li.push_back(l);
      }
      bool oracle_holds = o.delta(lu) + o.delta(li) <= o.delta(la) + o.delta(lb);
      if (rep.holds && oracle_holds) ++submod;
    }
    Configuration g;
    g.basis_points = {HPoint(cz("e+pi*i"))};
    ClosureAnalysis a(g, ctx);
    long one = a.dim_delta({0}), zero = a.dim_delta({});
    ok = agree == 50 && submod == 50 && closures == checked && one == 1 && zero == 0;
    return "rank agreement " + std::to_string(agree) + "/50, submodular " + std::to_string(submod) +
           "/50, closures " + std::to_string(closures) + "/" + std::to_string(checked) + ", dim_delta singleton " +
           std::to_string(one) + ", empty " + std::to_string(zero);
  });

  criterion(6, "flattening", 0, [](bool& ok) {
    FlatSystem fs = flatten("j(j'(X^2) + 4) = 1");
    std::vector<std::string> eqs;
    for (const auto& e : fs.equations) eqs.push_back(e.to_string());
    ok = eqs == std::vector<std::string>{"j(X1) = 1", "j1(X2) + 4 = X1", "X3^2 = X2"};
    // solve the flat system from the chain and check the nested equation with the oracle
    SolveConfig cfg;
    HPoint x1 = j_inverse(Complex(Real(1)), ctx);
    KhovanskiiSystem s2 = KhovanskiiSystem::from_polys({jp_parse("j1(X1)")});
    s2.offsets = {Complex(Real(4)) - x1.value()};
    std::vector<JPoly> polys;
    for (const auto& e : fs.equations) polys.push_back(e.poly());
    auto sys = KhovanskiiSystem::from_polys(polys);
    std::string sol = "no solution in the searched region";
    for (const auto& c : newton_solve(s2, cfg, ctx)) {
      PrecisionScope s(wb);
      Complex x3 = sqrt(c.points[0]);
      if (x3.im.sign() <= 0) continue;
      auto full = polish(sys, {x1.value(), c.points[0], x3}, cfg, ctx);
      if (!full || !full->nonsingular) continue;
      Complex z = full->points[2];
      auto inner = oracle::j_jet(z * z, wb);
      Real err = abs(oracle::j(inner[1] + 4, wb) - 1);
      ok = ok && err <= p2(-100);
      sol = "X = " + to_string(z, 20) + ", nested residual " + sci(err);
      break;
    }
    return std::string(ok ? "flat system matches; " : "mismatch; ") + sol;
  });

  criterion(7, "determinism", 0, [](bool& ok) {
    SelftestOptions o;
    o.identity_points = 10;
    o.fixtures = 10;
    std::string a = run_selftest(ctx, o).dump(), b = run_selftest(ctx, o).dump();
    ok = a == b;
    return ok ? "selftest JSON identical across runs" : "selftest JSON differs";
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
