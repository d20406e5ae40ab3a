#pragma once

// Khovanskii systems over H^n: Jacobians, damped multi-start Newton,
// certificates, the iterated-j system, and zero finding on plane curves
// under z -> (z, j(z)) and z -> (z, exp z) by the argument principle.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "jmod/context.hpp"
#include "jmod/error.hpp"
#include "jmod/halfplane.hpp"
#include "jmod/jpolynomial.hpp"
#include "jmod/linalg.hpp"
#include "jmod/modular_forms.hpp"
#include "jmod/real.hpp"

namespace jmod {

/// f_i + offsets[i] = 0, i = 1..n, in the variables X1..Xn. Offsets carry
/// constants that are not Gaussian rationals.
struct KhovanskiiSystem {
  long n = 0;
  std::vector<JPoly> polys;
  std::vector<Complex> offsets;

  static KhovanskiiSystem from_polys(std::vector<JPoly> polys) {
    KhovanskiiSystem s;
    s.n = static_cast<long>(polys.size());
    s.polys = std::move(polys);
    s.validate();
    return s;
  }

  void validate() const {
    if (n < 1) fail(ErrorKind::invalid_argument, "a Khovanskii system needs at least one equation");
    if (static_cast<long>(polys.size()) != n) fail(ErrorKind::invalid_argument, "system is not square");
    if (!offsets.empty() && offsets.size() != polys.size())
      fail(ErrorKind::invalid_argument, "offset count does not match equation count");
    for (const auto& p : polys)
      for (long v : p.variables())
        if (v > n) fail(ErrorKind::invalid_argument, "equation uses X" + std::to_string(v) + " beyond X" + std::to_string(n));
    for (const auto& p : polys)
      if (p.has_kind(GenKind::J3) || p.has_kind(GenKind::W))
        fail(ErrorKind::invalid_argument, "equations may only use X, j, j1, j2");
  }

  Complex offset(std::size_t i, long bits) const {
    if (offsets.empty()) return Complex::with_precision(bits);
    return offsets[i].at_precision(bits);
  }
};

struct Solution {
  std::vector<Complex> points;
  Real residual;
  Real jac_smallest_sv;
  Real jac_largest_sv;
  bool nonsingular = false;
};

struct SolveConfig {
  double re_min = -0.5, re_max = 0.5;
  double im_min = 0.55, im_max = 10.0;
  int grid = 6;                      ///< starts per axis per variable
  double damping = 1.0;              ///< initial step fraction
  int max_iter = 200;
  std::vector<GL2Q> translates;      ///< extra images of every start
  std::optional<Real> jacobian_threshold;  ///< relative; default 2^(-bits/4)
  std::uint64_t seed = 1;
  std::size_t max_starts = 400;
  std::optional<std::array<double, 4>> box;  ///< re_lo, re_hi, im_lo, im_hi for the curve solvers
  std::size_t max_boxes = 4000;

  void validate() const {
    if (!(im_min > 0) || !(im_max > im_min)) fail(ErrorKind::invalid_argument, "need 0 < im_min < im_max");
    if (!(re_max > re_min)) fail(ErrorKind::invalid_argument, "need re_min < re_max");
    if (grid < 1) fail(ErrorKind::invalid_argument, "grid density must be >= 1");
    if (!(damping > 0 && damping <= 1)) fail(ErrorKind::invalid_argument, "damping must lie in (0, 1]");
    if (max_iter < 1) fail(ErrorKind::invalid_argument, "max_iter must be >= 1");
  }

  Real threshold(const PrecisionContext& ctx) const {
    if (jacobian_threshold) return jacobian_threshold->at_precision(ctx.work_bits());
    return Real::pow2(-(ctx.bits / 4), ctx.work_bits());
  }
};

// ---------------------------------------------------------------------------

namespace detail {

/// The system with its formal Jacobian, evaluated together so jets are
/// computed once per point.
struct PreparedSystem {
  const KhovanskiiSystem* sys = nullptr;
  std::vector<std::vector<JPoly>> jac;  ///< jac[i][k] = d f_i / d X_{k+1}
  std::set<Generator> gens;

  explicit PreparedSystem(const KhovanskiiSystem& s) : sys(&s) {
    s.validate();
    for (const auto& f : s.polys) {
      std::vector<JPoly> row;
      for (long k = 1; k <= s.n; ++k) row.push_back(jp_diff(f, k));
      jac.push_back(std::move(row));
    }
    for (const auto& f : s.polys) {
      auto g = f.generators();
      gens.insert(g.begin(), g.end());
    }
    for (const auto& row : jac)
      for (const auto& e : row) {
        auto g = e.generators();
        gens.insert(g.begin(), g.end());
      }
  }

  JAssignment assignment(const std::vector<Complex>& pts) const {
    JAssignment a;
    for (std::size_t k = 0; k < pts.size(); ++k) a.emplace(static_cast<long>(k + 1), HPoint(pts[k]));
    return a;
  }

  std::map<Generator, Complex> values(const std::vector<Complex>& pts, const PrecisionContext& ctx) const {
    JPoly all;
    for (const auto& g : gens) all = all + JPoly::gen(g);
    return generator_values(all, assignment(pts), ctx);
  }

  struct Eval {
    std::vector<Complex> f;
    std::vector<Real> scale;
    Real residual;
    CMatrix jac;
  };

  Eval evaluate(const std::vector<Complex>& pts, const PrecisionContext& ctx, bool with_jac) const {
    const long wb = ctx.work_bits();
    auto vals = values(pts, ctx);
    Eval out;
    out.residual = Real::with_precision(wb);
    for (std::size_t i = 0; i < sys->polys.size(); ++i) {
      JEval e = eval_with(sys->polys[i], vals, wb);
      Complex v = e.value + sys->offset(i, wb);
      Real r = abs(v);
      if (r > out.residual) out.residual = r;
      out.f.push_back(std::move(v));
      out.scale.push_back(e.scale + abs(sys->offset(i, wb)));
    }
    if (with_jac) {
      const std::size_t n = sys->polys.size();
      out.jac = CMatrix(n, n, wb);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) out.jac(i, k) = eval_with(jac[i][k], vals, wb).value;
    }
    return out;
  }
};

inline bool in_half_plane(const std::vector<Complex>& pts, double im_floor) {
  for (const auto& p : pts)
    if (!p.is_finite() || !(p.im > Real(im_floor))) return false;
  return true;
}

}  // namespace detail

struct JacobianReport {
  CMatrix matrix;
  Complex det;
  Real smallest_sv;
  Real largest_sv;
};

inline JacobianReport jacobian(const KhovanskiiSystem& s, const JAssignment& a, const PrecisionContext& ctx) {
  detail::PreparedSystem ps(s);
  std::vector<Complex> pts;
  for (long k = 1; k <= s.n; ++k) {
    auto it = a.find(k);
    if (it == a.end()) fail(ErrorKind::invalid_argument, "variable X" + std::to_string(k) + " is not assigned");
    pts.push_back(it->second.value());
  }
  auto e = ps.evaluate(pts, ctx, true);
  auto sv = singular_values(e.jac);
  return {e.jac, determinant(e.jac), sv.back(), sv.front()};
}

/// Residual <= tol and a Jacobian that is numerically nonsingular:
/// smallest singular value > threshold * max(1, largest).
inline bool verify_certificate(const KhovanskiiSystem& s, const JAssignment& a, const PrecisionContext& ctx,
                               const SolveConfig& cfg = {}) {
  try {
    detail::PreparedSystem ps(s);
    std::vector<Complex> pts;
    for (long k = 1; k <= s.n; ++k) {
      auto it = a.find(k);
      if (it == a.end()) return false;
      pts.push_back(it->second.value());
    }
    auto e = ps.evaluate(pts, ctx, true);
    if (e.residual > ctx.tol()) return false;
    auto sv = singular_values(e.jac);
    return sv.back() > cfg.threshold(ctx) * max(Real(1), sv.front());
  } catch (const Error& err) {
    if (err.kind() == ErrorKind::domain) return false;
    throw;
  }
}

namespace detail {

/// Damped Newton from `start`. Returns the final point when the residual
/// drops to `accept`; stops early once the residual stagnates.
inline std::optional<std::vector<Complex>> newton_run(const PreparedSystem& ps, std::vector<Complex> z,
                                                      const SolveConfig& cfg, const PrecisionContext& ctx,
                                                      const Real& accept, int max_iter) {
  const long wb = ctx.work_bits();
  PrecisionScope scope(wb);
  for (auto& p : z) p = p.at_precision(wb);
  const double floor_im = cfg.im_min / 4;
  if (!in_half_plane(z, floor_im)) return std::nullopt;
  PreparedSystem::Eval cur;
  try {
    cur = ps.evaluate(z, ctx, true);
  } catch (const Error&) {
    return std::nullopt;
  }
  const Real noise = Real::pow2(-(wb - 24), wb);
  for (int it = 0; it < max_iter; ++it) {
    Real scale(1);
    for (const auto& s : cur.scale) scale = max(scale, s);
    if (cur.residual <= noise * scale) break;
    std::vector<Complex> rhs;
    for (const auto& v : cur.f) rhs.push_back(-v);
    auto step = lu_solve(cur.jac, rhs);
    if (!step) break;
    Real lambda(cfg.damping);
    bool moved = false;
    for (int h = 0; h < 40; ++h) {
      std::vector<Complex> cand = z;
      for (std::size_t k = 0; k < cand.size(); ++k) cand[k] += (*step)[k] * lambda;
      if (in_half_plane(cand, floor_im)) {
        try {
          auto e = ps.evaluate(cand, ctx, true);
          if (e.residual < cur.residual) {
            z = std::move(cand);
            cur = std::move(e);
            moved = true;
            break;
          }
        } catch (const Error&) {
        }
      }
      lambda /= 2;
    }
    if (!moved) break;
  }
  if (cur.residual <= accept) return z;
  return std::nullopt;
}

inline bool pure_j_single(const KhovanskiiSystem& s) {
  if (s.n != 1) return false;
  for (const auto& g : s.polys[0].generators())
    if (g.kind != GenKind::J0 || g.twisted()) return false;
  return true;
}

inline bool same_solution(const Solution& a, const Solution& b, bool orbit_mode, const PrecisionContext& ctx) {
  if (orbit_mode) {
    PrecisionContext c = ctx;
    c.nmax = std::max(ctx.nmax, 1);
    return find_modular_relation(HPoint(a.points[0]), HPoint(b.points[0]), c).has_value();
  }
  for (std::size_t k = 0; k < a.points.size(); ++k) {
    Complex ra = reduce_fundamental(HPoint(a.points[k]), ctx).z0.value();
    Complex rb = reduce_fundamental(HPoint(b.points[k]), ctx).z0.value();
    if (!points_close(ra, rb, ctx)) {
      // boundary identifications of the fundamental domain
      bool matched = false;
      for (const GL2Q& e : boundary_moves()) {
        if (points_close(act(e, HPoint(ra), ctx).value(), rb, ctx)) {
          matched = true;
          break;
        }
      }
      if (!matched) return false;
    }
  }
  return true;
}

}  // namespace detail

struct SolveReport {
  std::vector<Solution> solutions;  ///< certified (nonsingular) solutions
  std::vector<Solution> singular;   ///< converged with a singular Jacobian
  std::size_t starts = 0;
};

/// Polishes one converged point and classifies it.
inline std::optional<Solution> polish(const KhovanskiiSystem& s, const std::vector<Complex>& start,
                                      const SolveConfig& cfg, const PrecisionContext& ctx) {
  detail::PreparedSystem ps(s);
  auto z = detail::newton_run(ps, start, cfg, ctx, ctx.tol(), cfg.max_iter);
  if (!z) return std::nullopt;
  auto e = ps.evaluate(*z, ctx, true);
  auto sv = singular_values(e.jac);
  Solution sol;
  sol.points = *z;
  sol.residual = e.residual;
  sol.jac_smallest_sv = sv.back();
  sol.jac_largest_sv = sv.front();
  sol.nonsingular = sv.back() > cfg.threshold(ctx) * max(Real(1), sv.front());
  return sol;
}

/// Multi-start damped Newton. Starts: a per-variable grid over the strip
/// (log-spaced in Im), sampled with the seed when the product is too large,
/// each also moved by cfg.translates; plus `extra_starts`.
inline SolveReport newton_solve_report(const KhovanskiiSystem& s, const SolveConfig& cfg, const PrecisionContext& ctx,
                                       const std::vector<std::vector<Complex>>& extra_starts = {}) {
  cfg.validate();
  s.validate();
  const std::size_t n = static_cast<std::size_t>(s.n);
  std::vector<Complex> per_var;
  {
    PrecisionScope scope(64);
    const int g = cfg.grid;
    for (int a = 0; a < g; ++a) {
      for (int b = 0; b < g; ++b) {
        double re = cfg.re_min + (a + 0.5) / g * (cfg.re_max - cfg.re_min);
        double im = cfg.im_min * std::pow(cfg.im_max / cfg.im_min, (b + 0.5) / g);
        per_var.push_back(Complex(Real(re), Real(im)));
      }
    }
  }
  std::vector<std::vector<Complex>> starts = extra_starts;
  const double total = std::pow(static_cast<double>(per_var.size()), static_cast<double>(n));
  if (total <= static_cast<double>(cfg.max_starts)) {
    std::vector<std::size_t> idx(n, 0);
    for (;;) {
      std::vector<Complex> st;
      for (std::size_t k = 0; k < n; ++k) st.push_back(per_var[idx[k]]);
      starts.push_back(std::move(st));
      std::size_t k = 0;
      while (k < n && ++idx[k] == per_var.size()) idx[k++] = 0;
      if (k == n) break;
    }
  } else {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_int_distribution<std::size_t> pick(0, per_var.size() - 1);
    for (std::size_t t = 0; t < cfg.max_starts; ++t) {
      std::vector<Complex> st;
      for (std::size_t k = 0; k < n; ++k) st.push_back(per_var[pick(rng)]);
      starts.push_back(std::move(st));
    }
  }
  if (!cfg.translates.empty()) {
    const std::size_t base = starts.size();
    PrecisionContext lc = PrecisionContext::with_bits(64);
    for (const GL2Q& g : cfg.translates) {
      for (std::size_t t = 0; t < base; ++t) {
        std::vector<Complex> st;
        for (const auto& p : starts[t]) st.push_back(act(g, HPoint(p), lc).value());
        starts.push_back(std::move(st));
      }
    }
  }

  // Cheap low-precision pass, then full-precision polish of the survivors.
  PrecisionContext low = PrecisionContext::with_bits(64);
  low.nmax = ctx.nmax;
  detail::PreparedSystem ps(s);
  SolveReport rep;
  rep.starts = starts.size();
  const bool orbit_mode = detail::pure_j_single(s);
  std::vector<std::vector<Complex>> candidates;
  for (const auto& st : starts) {
    auto z = detail::newton_run(ps, st, cfg, low, Real::pow2(-30, low.work_bits()), 60);
    if (!z) continue;
    bool dup = false;
    for (const auto& c : candidates) {
      bool same = true;
      for (std::size_t k = 0; k < n && same; ++k) same = abs(c[k] - (*z)[k]) <= Real::pow2(-24, 96) * (Real(1) + abs(c[k]));
      if (same) { dup = true; break; }
    }
    if (!dup) candidates.push_back(std::move(*z));
  }
  for (const auto& c : candidates) {
    auto sol = polish(s, c, cfg, ctx);
    if (!sol) continue;
    if (orbit_mode) {
      // j-only equation: report the fundamental-domain representative
      Complex z0 = reduce_fundamental(HPoint(sol->points[0]), ctx).z0.value();
      if (!detail::points_close(z0, sol->points[0], ctx))
        if (auto again = polish(s, {z0}, cfg, ctx)) sol = std::move(again);
    }
    auto& bucket = sol->nonsingular ? rep.solutions : rep.singular;
    bool dup = false;
    for (const auto& b : bucket)
      if (detail::same_solution(b, *sol, orbit_mode, ctx)) { dup = true; break; }
    if (!dup) bucket.push_back(std::move(*sol));
  }
  return rep;
}

inline std::vector<Solution> newton_solve(const KhovanskiiSystem& s, const SolveConfig& cfg, const PrecisionContext& ctx) {
  return newton_solve_report(s, cfg, ctx).solutions;
}

// ---------------------------------------------------------------------------
// Iterated j: z = j_n(z) + a.

/// X1 - j(Xn) - a, X2 - j(X1), ..., Xn - j(X_{n-1}).
inline KhovanskiiSystem build_iterated_system(long n, const GaussQ& a) {
  if (n < 1) fail(ErrorKind::invalid_argument, "iterated system needs n >= 1");
  std::vector<JPoly> polys;
  polys.push_back(JPoly::var(1) - JPoly::j(0, n) - JPoly(a));
  for (long k = 2; k <= n; ++k) polys.push_back(JPoly::var(k) - JPoly::j(0, k - 1));
  return KhovanskiiSystem::from_polys(std::move(polys));
}

/// Same system with a non-rational constant a.
inline KhovanskiiSystem build_iterated_system(long n, const Complex& a) {
  KhovanskiiSystem s = build_iterated_system(n, GaussQ(0));
  s.offsets.assign(static_cast<std::size_t>(n), Complex::with_precision(a.precision()));
  s.offsets[0] = -a;
  return s;
}

/// n-fold composition of j.
inline Complex j_iterate(long n, const Complex& z, const PrecisionContext& ctx) {
  Complex w = z;
  for (long k = 0; k < n; ++k) w = j_value(HPoint(w), ctx);
  return w;
}

/// Starting points from the inverse-branch iteration
///   X1 <- j^-1(j^-1(... j^-1(X1 - a)))
/// with every inverse taken in the fundamental domain; the branch map is a
/// contraction away from the elliptic points, so this lands on a solution
/// of the iterated system that Newton then polishes.
inline std::optional<std::vector<Complex>> iterated_fixed_point(long n, const Complex& a, const Complex& seed) {
  PrecisionContext low = PrecisionContext::with_bits(96);
  PrecisionScope scope(low.work_bits());
  Complex x1 = seed.at_precision(low.work_bits());
  const Complex aw = a.at_precision(low.work_bits());
  std::vector<Complex> chain(static_cast<std::size_t>(n));
  for (int it = 0; it < 200; ++it) {
    Complex v = x1 - aw;
    try {
      for (long k = n; k >= 1; --k) {
        HPoint w = j_inverse(v, low);
        chain[static_cast<std::size_t>(k - 1)] = w.value();
        v = w.value();
      }
    } catch (const Error&) {
      return std::nullopt;
    }
    Real change = abs(chain[0] - x1);
    x1 = chain[0];
    if (change <= Real::pow2(-60, low.work_bits())) return chain;
  }
  return std::nullopt;
}

struct IteratedReport {
  KhovanskiiSystem system;
  SolveReport solve;
  std::vector<Real> composition_residuals;  ///< |z1 - j_n(z1) - a| per solution
};

inline IteratedReport solve_iterated(long n, const Complex& a, const SolveConfig& cfg, const PrecisionContext& ctx,
                                     std::optional<GaussQ> exact = std::nullopt) {
  IteratedReport rep{exact ? build_iterated_system(n, *exact) : build_iterated_system(n, a), {}, {}};
  std::vector<std::vector<Complex>> extra;
  PrecisionScope scope(64);
  const std::vector<Complex> seeds = {Complex(Real(0), Real(2)), Complex(Real(0.25), Real(1.1)),
                                      Complex(Real(-0.3), Real(1.5))};
  for (const auto& sd : seeds)
    if (auto fp = iterated_fixed_point(n, a, sd)) extra.push_back(std::move(*fp));
  SolveConfig c = cfg;
  if (n > 1) {
    // Grid starts are hopeless in high dimension; rely on the branch
    // iteration plus a small grid.
    c.max_starts = std::min<std::size_t>(c.max_starts, 64);
  }
  rep.solve = newton_solve_report(rep.system, c, ctx, extra);
  for (const auto& sol : rep.solve.solutions) {
    Complex lhs = sol.points[0] - j_iterate(n, sol.points[0], ctx) - a.at_precision(ctx.work_bits());
    rep.composition_residuals.push_back(abs(lhs));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Plane curves: zeros of F(z) = p(z, j(z)) or p(z, exp z).

/// p(X, Y) + constant with X = X1, Y = X2.
struct CurveSpec {
  JPoly p;
  std::optional<Complex> constant;

  static CurveSpec parse(const std::string& text) { return {parse_plane_polynomial(text), std::nullopt}; }

  long degree_x() const { return p.degree_in(Generator{GenKind::X, 1}); }
  long degree_y() const { return p.degree_in(Generator{GenKind::X, 2}); }

  /// A polynomial without Y never involves j (or exp): rejected. Polynomials
  /// in Y alone are accepted.
  void validate() const {
    if (p.has_twists() || p.max_var() > 2) fail(ErrorKind::invalid_argument, "curve must be a polynomial in X and Y");
    if (degree_y() < 1)
      fail(ErrorKind::invalid_argument, "curve does not involve Y (a vertical line or a polynomial in X alone)");
  }
};

struct BoxCount {
  std::array<double, 4> box;  ///< re_lo, re_hi, im_lo, im_hi
  double winding = 0;         ///< sampled winding sum
  long count = 0;             ///< rounded zero count
  long found = 0;             ///< polished zeros inside
};

struct CurveReport {
  std::vector<Solution> solutions;
  std::vector<Solution> singular;
  std::vector<BoxCount> top;  ///< counts for the searched region(s)
  bool exhausted = false;     ///< box budget ran out
};

namespace detail {

/// F and F' at z.
using CurveFn = std::function<std::pair<Complex, Complex>(const Complex&, const PrecisionContext&)>;

inline CurveFn curve_function(const CurveSpec& v, bool use_exp) {
  JPoly px = jp_diff(v.p, 1), py = jp_diff(v.p, 2);
  return [p = v.p, px, py, cst = v.constant, use_exp](const Complex& z, const PrecisionContext& ctx) {
    const long wb = ctx.work_bits();
    PrecisionScope scope(wb);
    Complex y, dy;
    if (use_exp) {
      y = exp(z.at_precision(wb));
      dy = y;
    } else {
      JJet jt = jet(HPoint(z), ctx, 1);
      y = jt.j;
      dy = jt.j1;
    }
    std::map<Generator, Complex> vals;
    vals.emplace(Generator{GenKind::X, 1}, z.at_precision(wb));
    vals.emplace(Generator{GenKind::X, 2}, y);
    Complex f = eval_with(p, vals, wb).value;
    if (cst) f += cst->at_precision(wb);
    Complex fp = eval_with(px, vals, wb).value + eval_with(py, vals, wb).value * dy;
    return std::make_pair(f, fp);
  };
}

constexpr double kTwoPi = 6.283185307179586;

inline double phase(const Complex& w) { return std::atan2(w.im.to_double(), w.re.to_double()); }

inline double wrap(double a) {
  while (a > M_PI) a -= kTwoPi;
  while (a < -M_PI) a += kTwoPi;
  return a;
}

/// Argument increment of F along the segment p0 -> p1, adaptively sampled.
inline std::optional<double> edge_winding(const CurveFn& f, const Complex& p0, const Complex& p1,
                                          const PrecisionContext& low) {
  struct Seg {
    double t0, t1;
    double a0, a1;
    int depth;
  };
  auto at = [&](double t) -> std::optional<double> {
    PrecisionScope scope(low.work_bits());
    Complex z = p0 + (p1 - p0) * Real(t);
    try {
      Complex v = f(z, low).first;
      if (!v.is_finite() || v.is_zero()) return std::nullopt;
      return phase(v);
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  const int initial = 8;
  std::vector<double> ph;
  for (int k = 0; k <= initial; ++k) {
    auto a = at(static_cast<double>(k) / initial);
    if (!a) return std::nullopt;
    ph.push_back(*a);
  }
  double total = 0;
  std::vector<Seg> stack;
  for (int k = initial - 1; k >= 0; --k)
    stack.push_back({static_cast<double>(k) / initial, static_cast<double>(k + 1) / initial, ph[k], ph[k + 1], 0});
  long evals = 0;
  while (!stack.empty()) {
    Seg s = stack.back();
    stack.pop_back();
    double d = wrap(s.a1 - s.a0);
    double tm = 0.5 * (s.t0 + s.t1);
    auto am = at(tm);
    if (!am) return std::nullopt;
    if (++evals > 200000) return std::nullopt;
    double d1 = wrap(*am - s.a0), d2 = wrap(s.a1 - *am);
    if (std::abs(d) < 0.5 && std::abs(d1 + d2 - d) < 1e-9) {
      total += d;
      continue;
    }
    if (s.depth > 40) return std::nullopt;
    stack.push_back({tm, s.t1, *am, s.a1, s.depth + 1});
    stack.push_back({s.t0, tm, s.a0, *am, s.depth + 1});
  }
  return total;
}

inline std::optional<double> box_winding(const CurveFn& f, const std::array<double, 4>& b, const PrecisionContext& low) {
  PrecisionScope scope(low.work_bits());
  const Complex c00{Real(b[0]), Real(b[2])}, c10{Real(b[1]), Real(b[2])}, c11{Real(b[1]), Real(b[3])},
      c01{Real(b[0]), Real(b[3])};
  double total = 0;
  for (auto [p, q] : {std::pair{&c00, &c10}, {&c10, &c11}, {&c11, &c01}, {&c01, &c00}}) {
    auto w = edge_winding(f, *p, *q, low);
    if (!w) return std::nullopt;
    total += *w;
  }
  return total / kTwoPi;
}

struct CurveSearch {
  CurveFn f;
  const SolveConfig* cfg;
  PrecisionContext ctx;
  PrecisionContext low;
  bool half_plane;
  CurveReport* out;
  std::size_t boxes = 0;

  bool inside(const Complex& z, const std::array<double, 4>& b, double slack) const {
    double x = z.re.to_double(), y = z.im.to_double();
    double sx = (b[1] - b[0]) * slack, sy = (b[3] - b[2]) * slack;
    return x >= b[0] - sx && x <= b[1] + sx && y >= b[2] - sy && y <= b[3] + sy;
  }

  /// Newton polish of a single zero; nullopt unless it converges.
  std::optional<Solution> newton(Complex z, const PrecisionContext& c, int iters) const {
    const long wb = c.work_bits();
    PrecisionScope scope(wb);
    z = z.at_precision(wb);
    auto cur = f(z, c);
    Real res = abs(cur.first);
    const Real noise = Real::pow2(-(wb - 24), wb);
    for (int it = 0; it < iters; ++it) {
      if (res <= noise * (Real(1) + abs(z))) break;
      if (cur.second.is_zero()) break;
      Complex step = cur.first / cur.second;
      Real lambda(1);
      bool moved = false;
      for (int h = 0; h < 30; ++h) {
        Complex cand = z - step * lambda;
        if (cand.is_finite() && (!half_plane || cand.im > Real(cfg->im_min / 8))) {
          try {
            auto e = f(cand, c);
            Real r = abs(e.first);
            if (r < res) {
              z = cand;
              cur = e;
              res = r;
              moved = true;
              break;
            }
          } catch (const Error&) {
          }
        }
        lambda /= 2;
      }
      if (!moved) break;
    }
    Solution s;
    s.points = {z};
    s.residual = res;
    s.jac_smallest_sv = abs(cur.second);
    s.jac_largest_sv = s.jac_smallest_sv;
    s.nonsingular = !s.jac_smallest_sv.is_zero() && s.jac_smallest_sv > cfg->threshold(ctx);
    return s;
  }

  void record(Solution s) {
    auto& bucket = s.nonsingular ? out->solutions : out->singular;
    // A zero of multiplicity m is only located to about eps^(1/m).
    const Real near = s.nonsingular ? ctx.tol() : Real::pow2(-(ctx.bits / 8), ctx.work_bits());
    for (const auto& b : bucket)
      if (abs(b.points[0] - s.points[0]) <= near * (Real(1) + abs(s.points[0]))) return;
    bucket.push_back(std::move(s));
  }

  /// Returns the number of zeros polished inside b.
  long process(const std::array<double, 4>& b, long count, int depth) {
    if (count <= 0) return 0;
    if (++boxes > cfg->max_boxes) {
      out->exhausted = true;
      return 0;
    }
    const double w = b[1] - b[0], h = b[3] - b[2];
    PrecisionScope scope(ctx.work_bits());
    if (count == 1) {
      Complex c(Real(0.5 * (b[0] + b[1])), Real(0.5 * (b[2] + b[3])));
      auto lowsol = newton(c, low, 60);
      if (lowsol && lowsol->residual <= Real::pow2(-30, 96) * (Real(1) + abs(lowsol->points[0])) &&
          inside(lowsol->points[0], b, 0.0)) {
        auto full = newton(lowsol->points[0], ctx, cfg->max_iter);
        if (full && full->residual <= ctx.tol()) {
          record(std::move(*full));
          return 1;
        }
      }
    }
    if (std::max(w, h) < 1e-12 || depth > 200) {
      // Tiny box with a multiple zero (or a stubborn simple one).
      Complex c(Real(0.5 * (b[0] + b[1])), Real(0.5 * (b[2] + b[3])));
      auto full = newton(c, ctx, cfg->max_iter);
      if (full && full->residual <= ctx.tol()) {
        record(std::move(*full));
        return 1;
      }
      return 0;
    }
    // Off-centre splits along the longer side; retry other fractions if a
    // zero sits on the cut.
    for (double frac : {0.6180339887, 0.4142135624, 0.5772156649, 0.3819660113}) {
      std::array<double, 4> lo = b, hi = b;
      if (w >= h) {
        double cut = b[0] + frac * w;
        lo[1] = cut;
        hi[0] = cut;
      } else {
        double cut = b[2] + frac * h;
        lo[3] = cut;
        hi[2] = cut;
      }
      auto wl = box_winding(f, lo, low), wh = box_winding(f, hi, low);
      if (!wl || !wh) continue;
      long cl = std::lround(*wl), ch = std::lround(*wh);
      if (std::abs(*wl - cl) > 0.25 || std::abs(*wh - ch) > 0.25 || cl < 0 || ch < 0) continue;
      return process(lo, cl, depth + 1) + process(hi, ch, depth + 1);
    }
    return 0;
  }
};

inline CurveReport curve_solve(const CurveSpec& v, const SolveConfig& cfg, const PrecisionContext& ctx, bool use_exp,
                               const std::vector<std::array<double, 4>>& regions) {
  v.validate();
  cfg.validate();
  CurveReport rep;
  CurveSearch search{curve_function(v, use_exp), &cfg, ctx, PrecisionContext::with_bits(64), !use_exp, &rep};
  for (auto region : regions) {
    std::optional<double> w;
    for (int attempt = 0; attempt < 4 && !w; ++attempt) {
      w = box_winding(search.f, region, search.low);
      if (!w) {
        // a zero on the boundary: nudge the box outwards
        double e = 1e-3 * (attempt + 1);
        region = {region[0] - e, region[1] + e, region[2] - (use_exp ? e : -e), region[3] + e};
      }
    }
    BoxCount bc{region, w ? *w : std::nan(""), w ? std::lround(*w) : 0, 0};
    if (w && std::abs(*w - bc.count) <= 0.25) bc.found = search.process(region, bc.count, 0);
    rep.top.push_back(bc);
  }
  return rep;
}

}  // namespace detail

/// Zeros of p(z, j(z)) in the strip (widened by 1/64 on each side so that
/// zeros on Re z = +-1/2 are interior), plus the strip moved by every pure
/// translation among cfg.translates.
inline CurveReport ec_curve_solve_report(const CurveSpec& v, const SolveConfig& cfg, const PrecisionContext& ctx) {
  std::vector<std::array<double, 4>> regions;
  if (cfg.box) {
    regions.push_back(*cfg.box);
  } else {
    const double pad = 1.0 / 64;
    regions.push_back({cfg.re_min - pad, cfg.re_max + pad, cfg.im_min, cfg.im_max});
    for (const GL2Q& g : cfg.translates) {
      if (g.c != 0 || g.a != g.d) continue;
      double shift = mpq_class(g.b / g.d).get_d();
      regions.push_back({cfg.re_min - pad + shift, cfg.re_max + pad + shift, cfg.im_min, cfg.im_max});
    }
  }
  return detail::curve_solve(v, cfg, ctx, false, regions);
}

/// All zeros found, simple ones first; multiple zeros carry nonsingular = false.
inline std::vector<Solution> ec_curve_solve(const CurveSpec& v, const SolveConfig& cfg, const PrecisionContext& ctx) {
  CurveReport r = ec_curve_solve_report(v, cfg, ctx);
  r.solutions.insert(r.solutions.end(), r.singular.begin(), r.singular.end());
  return r.solutions;
}

/// Zeros of p(z, exp z) in cfg.box (default [-4, 4] x [-4, 4]).
inline CurveReport ec_exp_solve_report(const CurveSpec& v, const SolveConfig& cfg, const PrecisionContext& ctx) {
  std::array<double, 4> box = cfg.box ? *cfg.box : std::array<double, 4>{-4.0, 4.0, -4.0, 4.0};
  return detail::curve_solve(v, cfg, ctx, true, {box});
}

inline std::vector<Solution> ec_exp_solve(const CurveSpec& v, const SolveConfig& cfg, const PrecisionContext& ctx) {
  CurveReport r = ec_exp_solve_report(v, cfg, ctx);
  r.solutions.insert(r.solutions.end(), r.singular.begin(), r.singular.end());
  return r.solutions;
}

}  // namespace jmod
