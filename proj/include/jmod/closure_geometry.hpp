#pragma once

// Finite configurations of points with declared relations: validation of the
// declared data, orbit dimension, Jacobian-rank transcendence estimates, the
// predimension delta, self-sufficiency and the minimal-delta closure.
//
// Variables: X1..Xn are the basis points, X(n+1)..X(n+m) the declared base
// points. All subset questions are asked about unions of orbit blocks.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "jmod/context.hpp"
#include "jmod/error.hpp"
#include "jmod/halfplane.hpp"
#include "jmod/jpolynomial.hpp"
#include "jmod/linalg.hpp"
#include "jmod/modular_forms.hpp"
#include "jmod/modular_polynomials.hpp"

namespace jmod {

enum class BaseKind { rationals, special, declared };

inline std::string to_string(BaseKind k) {
  switch (k) {
    case BaseKind::rationals: return "rationals";
    case BaseKind::special: return "special";
    case BaseKind::declared: return "declared";
  }
  return "?";
}

struct DeclaredRelation {
  JPoly poly;
  std::optional<Real> residual;  ///< |f| / scale, filled by validation
};

/// g z_j = z_i; indices are 0-based into basis ++ base.
struct ModularClaim {
  std::size_t i = 0, j = 0;
  GL2Q g;
};

struct Configuration {
  std::vector<HPoint> basis_points;
  BaseKind base_kind = BaseKind::rationals;
  std::vector<HPoint> base_points;  ///< only for declared
  std::vector<DeclaredRelation> relations;
  std::vector<ModularClaim> modular;

  std::size_t n() const { return basis_points.size(); }
  std::size_t m() const { return base_points.size(); }
  std::vector<HPoint> all_points() const {
    std::vector<HPoint> v = basis_points;
    v.insert(v.end(), base_points.begin(), base_points.end());
    return v;
  }
  void add_relation(const JPoly& p) { relations.push_back({p, std::nullopt}); }
  void add_relation(const std::string& text) { add_relation(jp_parse(text)); }
};

struct ClaimCheck {
  std::size_t i = 0, j = 0;
  long level = 0;
  Real action_residual;
  std::optional<Real> phi_residual;         ///< |Phi_N| / scale
  std::optional<Real> derivative_residual;  ///< first differentiated relation, relative
  bool ok = false;
};

struct ValidationReport {
  bool valid = true;
  std::vector<std::string> violations;
  std::vector<std::string> flags;
  std::vector<Real> relation_residuals;
  std::vector<ClaimCheck> claims;
};

struct XiReport {
  long n_generators = 0;
  long relation_rank = 0;
  long xi_dim = 0;
};

struct DeltaReport {
  long trdeg_estimate = 0;
  long dim_g = 0;
  long delta = 0;
};

namespace detail {

inline std::string var_name(std::size_t idx) { return "X" + std::to_string(idx + 1); }

inline Real rel_threshold(const PrecisionContext& ctx) { return Real::pow2(-(ctx.bits / 4), ctx.work_bits()); }

/// Sum of |c| times the partial-derivative monomials; bounds rounding in Phi_X, Phi_Y.
inline std::pair<Real, Real> phi_partial_scales(const ModularPolynomial& p, const Real& ax, const Real& ay) {
  Real sx(0), sy(0);
  for (const auto& [ij, c] : p.coeffs) {
    const auto [i, j] = ij;
    Real ac = abs(Real(c));
    if (i > 0) sx += ac * static_cast<long>(i) * pow(ax, i - 1) * pow(ay, j);
    if (j > 0) sy += ac * static_cast<long>(j) * pow(ax, i) * pow(ay, j - 1);
  }
  return {sx, sy};
}

inline bool is_coordinate_generator(const Generator& g) {
  return !g.twisted() && (g.kind == GenKind::X || g.kind == GenKind::J0 || g.kind == GenKind::J1 ||
                          g.kind == GenKind::J2);
}

}  // namespace detail

/// Checks every declared datum; never throws for a failed check, only for
/// unusable input. config_validate is the throwing form.
inline ValidationReport validation_report(Configuration& c, const PrecisionContext& ctx) {
  ValidationReport rep;
  const long wb = ctx.work_bits();
  PrecisionScope scope(wb);
  const std::size_t total = c.n() + c.m();
  if (c.base_kind != BaseKind::declared && c.m() > 0)
    rep.violations.push_back("base points given but base kind is " + to_string(c.base_kind));
  auto pts = c.all_points();
  JAssignment assign;
  for (std::size_t k = 0; k < total; ++k) assign.emplace(static_cast<long>(k + 1), pts[k]);

  std::vector<JJet> jets;
  for (const auto& p : pts) jets.push_back(jet(p, ctx, 1));

  // declared relations
  for (std::size_t r = 0; r < c.relations.size(); ++r) {
    const JPoly& f = c.relations[r].poly;
    std::string tag = "relation #" + std::to_string(r + 1) + " (" + f.to_string() + ")";
    bool usable = true;
    for (const auto& g : f.generators()) {
      if (g.var < 1 || static_cast<std::size_t>(g.var) > total) {
        rep.violations.push_back(tag + ": variable X" + std::to_string(g.var) + " is not a configuration point");
        usable = false;
        break;
      }
      if (!detail::is_coordinate_generator(g)) {
        rep.violations.push_back(tag + ": only X, j, j1, j2 of untwisted variables may appear");
        usable = false;
        break;
      }
    }
    if (!usable) {
      rep.relation_residuals.push_back(Real(-1));
      continue;
    }
    JEval e = jp_eval_scaled(f, assign, ctx);
    Real res = abs(e.value) / e.scale;
    c.relations[r].residual = res;
    rep.relation_residuals.push_back(res);
    if (res > ctx.tol()) rep.violations.push_back(tag + ": residual " + res.to_string(6) + " exceeds tolerance");
  }

  // modular claims, axiom (c) and its first derivative
  std::vector<std::size_t> parent(total);
  for (std::size_t k = 0; k < total; ++k) parent[k] = k;
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t q = 0; q < c.modular.size(); ++q) {
    const ModularClaim& cl = c.modular[q];
    std::string tag = "claim #" + std::to_string(q + 1);
    if (cl.i >= total || cl.j >= total) {
      rep.violations.push_back(tag + ": index out of range");
      continue;
    }
    tag += " (" + cl.g.to_string() + "*" + detail::var_name(cl.j) + " = " + detail::var_name(cl.i) + ")";
    if (cl.g.det() == 0) {
      rep.violations.push_back(tag + ": matrix is singular");
      continue;
    }
    ClaimCheck chk;
    chk.i = cl.i;
    chk.j = cl.j;
    PrimitiveIntMatrix pm = red(cl.g);
    chk.level = pm.n.get_si();
    chk.ok = true;
    const Complex& zj = pts[cl.j].value();
    const Complex& zi = pts[cl.i].value();
    Complex den = zj * Real(pm.c);
    den.re += Real(pm.d);
    if (den.is_zero()) {
      rep.violations.push_back(tag + ": cz + d vanishes");
      continue;
    }
    HPoint image = act(cl.g, pts[cl.j], ctx);
    chk.action_residual = abs(image.value() - zi) / (Real(1) + abs(zi));
    if (chk.action_residual > ctx.tol()) {
      chk.ok = false;
      rep.violations.push_back(tag + ": action residual " + chk.action_residual.to_string(6));
    }
    auto& cache = PhiCache::instance();
    if (chk.level > cache.ceiling() && !cache.find(chk.level)) {
      rep.flags.push_back(tag + ": Phi_" + std::to_string(chk.level) + " beyond the cache ceiling, not checked");
    } else {
      ModularPolynomial phi = compute_phi(chk.level, ctx);
      const Complex& x = jets[cl.i].j;  // j(g z_j)
      const Complex& y = jets[cl.j].j;
      PhiValue pv = phi_evaluate(phi, x, y);
      chk.phi_residual = abs(pv.value) / pv.scale;
      if (*chk.phi_residual > ctx.tol()) {
        chk.ok = false;
        rep.violations.push_back(tag + ": Phi_" + std::to_string(chk.level) + " residual " +
                                 chk.phi_residual->to_string(6));
      }
      // d/dz Phi(j(gz), j(z)) = Phi_X j'(gz) det/(cz+d)^2 + Phi_Y j'(z)
      Complex factor = Complex(Real(mpz_class(pm.a * pm.d - pm.b * pm.c))) / (den * den);
      Complex t1 = pv.dx * jets[cl.i].j1 * factor;
      Complex t2 = pv.dy * jets[cl.j].j1;
      auto [sx, sy] = detail::phi_partial_scales(phi, abs(x), abs(y));
      Real scale = Real(1) + sx * abs(jets[cl.i].j1) * abs(factor) + sy * abs(jets[cl.j].j1);
      chk.derivative_residual = abs(t1 + t2) / scale;
      if (*chk.derivative_residual > ctx.tol()) {
        chk.ok = false;
        rep.violations.push_back(tag + ": differentiated relation residual " +
                                 chk.derivative_residual->to_string(6));
      }
    }
    if (chk.ok) {
      std::size_t a = find(cl.i), b = find(cl.j);
      parent[std::max(a, b)] = std::min(a, b);
    }
    rep.claims.push_back(std::move(chk));
  }

  // axiom (e): degenerate jets only at special points
  const Real tol = ctx.tol();
  for (std::size_t k = 0; k < c.n(); ++k) {
    const JJet& jt = jets[k];
    std::vector<std::string> why;
    if (abs(jt.j) <= tol * 1729) why.push_back("j = 0");
    if (abs(jt.j - Complex(1728)) <= tol * 1729) why.push_back("j = 1728");
    if (abs(jt.j1) <= tol * (Real(1) + abs(jt.j))) why.push_back("j' = 0");
    if (why.empty()) continue;
    std::string what;
    for (const auto& w : why) what += (what.empty() ? "" : ", ") + w;
    auto q = is_special(pts[k], ctx);
    std::string tag = "axiom (e) at " + detail::var_name(k) + ": " + what;
    if (q)
      rep.flags.push_back(tag + "; special, form (" + q->a.get_str() + "," + q->b.get_str() + "," + q->c.get_str() + ")");
    else
      rep.violations.push_back(tag + " but the point is not special");
  }

  // basis: undeclared modular dependencies among basis points
  for (std::size_t b = 0; b < c.n(); ++b) {
    for (std::size_t a = 0; a < b; ++a) {
      if (find(a) == find(b)) continue;
      auto rel = find_modular_relation(pts[a], pts[b], ctx);
      if (!rel) continue;
      rep.violations.push_back("not a basis: " + rel->g.to_string() + "*" + detail::var_name(b) + " = " +
                               detail::var_name(a) + " (level " + rel->n.get_str() + ") is not declared");
      std::size_t ra = find(a), rb = find(b);
      parent[std::max(ra, rb)] = std::min(ra, rb);
    }
  }
  rep.valid = rep.violations.empty();
  return rep;
}

inline ValidationReport config_validate(Configuration& c, const PrecisionContext& ctx) {
  ValidationReport rep = validation_report(c, ctx);
  if (!rep.valid) {
    std::string msg = "configuration violates:";
    for (const auto& v : rep.violations) msg += "\n  " + v;
    fail(ErrorKind::validation, msg);
  }
  return rep;
}

// ---------------------------------------------------------------------------

/// Precomputed state of a validated configuration: orbit blocks, the
/// coordinate Jacobian of the relations and its column-restricted ranks.
class ClosureAnalysis {
 public:
  static constexpr std::size_t max_orbits = 20;

  ClosureAnalysis(Configuration c, const PrecisionContext& ctx) : c_(std::move(c)), ctx_(ctx) {
    report_ = config_validate(c_, ctx_);
    build_orbits();
    build_jacobian();
  }

  const Configuration& config() const { return c_; }
  const ValidationReport& validation() const { return report_; }
  const PrecisionContext& context() const { return ctx_; }

  /// Orbit blocks: sorted 0-based basis indices.
  const std::vector<std::vector<std::size_t>>& orbits() const { return orbits_; }
  bool orbit_free(std::size_t b) const { return free_[b]; }

  /// Smallest union of orbit blocks containing the given basis indices.
  std::vector<std::size_t> orbits_of_points(const std::vector<std::size_t>& points) const {
    std::set<std::size_t> ids;
    for (std::size_t p : points) {
      if (p >= c_.n()) fail(ErrorKind::invalid_argument, "point index " + std::to_string(p + 1) + " out of range");
      ids.insert(orbit_of_[p]);
    }
    return {ids.begin(), ids.end()};
  }

  std::vector<std::size_t> points_of(const std::vector<std::size_t>& orbit_ids) const {
    std::vector<std::size_t> pts;
    for (std::size_t b : orbit_ids) pts.insert(pts.end(), orbits_.at(b).begin(), orbits_.at(b).end());
    std::sort(pts.begin(), pts.end());
    return pts;
  }

  /// trdeg of the coordinates of the given basis points over the base.
  long trdeg_points(const std::vector<std::size_t>& pts) const {
    std::vector<bool> keep(c_.n() + c_.m(), false);
    for (std::size_t k = c_.n(); k < keep.size(); ++k) keep[k] = true;
    const long base_only = rank_excluding(keep);
    for (std::size_t p : pts) keep[p] = true;
    return 4 * static_cast<long>(pts.size()) + rank_excluding(keep) - base_only;
  }

  DeltaReport delta_of(const std::vector<std::size_t>& orbit_ids) const {
    DeltaReport r;
    r.trdeg_estimate = trdeg_points(points_of(orbit_ids));
    for (std::size_t b : orbit_ids)
      if (free_[b]) ++r.dim_g;
    r.delta = r.trdeg_estimate - 3 * r.dim_g;
    return r;
  }

  std::vector<std::size_t> all_orbits() const {
    std::vector<std::size_t> v(orbits_.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = k;
    return v;
  }

  DeltaReport delta() const { return delta_of(all_orbits()); }
  long trdeg_estimate() const { return trdeg_points(points_of(all_orbits())); }
  long dim_g() const { return delta().dim_g; }

  XiReport xi() const {
    XiReport r;
    r.n_generators = static_cast<long>(c_.n());
    if (c_.relations.empty() || c_.n() == 0) {
      r.xi_dim = r.n_generators;
      return r;
    }
    const long wb = ctx_.work_bits();
    PrecisionScope scope(wb);
    CMatrix m(c_.relations.size(), c_.n(), wb);
    for (std::size_t row = 0; row < c_.relations.size(); ++row)
      for (std::size_t k = 0; k < c_.n(); ++k) {
        JPoly d = jp_diff(c_.relations[row].poly, static_cast<long>(k + 1));
        if (!d.is_zero()) m(row, k) = jp_eval(d, assign_, ctx_);
      }
    r.relation_rank = static_cast<long>(numerical_rank(m, detail::rel_threshold(ctx_)));
    r.xi_dim = r.n_generators - r.relation_rank;
    return r;
  }

  void check_size() const {
    if (orbits_.size() > max_orbits)
      fail(ErrorKind::size_limit, std::to_string(orbits_.size()) + " orbit blocks exceed the brute-force cap of " +
                                      std::to_string(max_orbits));
  }

  /// delta(sub u S) - delta(sub) >= 0 for every S among the remaining blocks.
  bool self_sufficient(const std::vector<std::size_t>& sub) const {
    check_size();
    auto rest = complement(sub);
    const long base = delta_of(sub).delta;
    const std::size_t r = rest.size();
    for (unsigned long mask = 1; mask < (1UL << r); ++mask) {
      auto y = with_mask(sub, rest, mask);
      if (delta_of(y).delta < base) return false;
    }
    return true;
  }

  struct Closure {
    std::vector<std::size_t> orbits;
    DeltaReport report;
  };

  /// Superset of x minimizing delta; ties: fewer blocks, then lexicographic.
  Closure ss_closure(const std::vector<std::size_t>& x) const {
    check_size();
    auto rest = complement(x);
    Closure best{normalized(x), delta_of(x)};
    const std::size_t r = rest.size();
    for (unsigned long mask = 1; mask < (1UL << r); ++mask) {
      auto y = with_mask(x, rest, mask);
      DeltaReport d = delta_of(y);
      bool better = d.delta < best.report.delta ||
                    (d.delta == best.report.delta &&
                     (y.size() < best.orbits.size() || (y.size() == best.orbits.size() && y < best.orbits)));
      if (better) best = {y, d};
    }
    return best;
  }

  long dim_delta(const std::vector<std::size_t>& x) const { return ss_closure(x).report.delta; }

 private:
  void build_orbits() {
    auto pts = c_.all_points();
    const std::size_t total = pts.size();
    for (std::size_t k = 0; k < total; ++k) assign_.emplace(static_cast<long>(k + 1), pts[k]);
    std::vector<std::size_t> parent(total);
    for (std::size_t k = 0; k < total; ++k) parent[k] = k;
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    auto unite = [&](std::size_t a, std::size_t b) {
      a = find(a);
      b = find(b);
      parent[std::max(a, b)] = std::min(a, b);
    };
    for (const auto& cl : c_.modular) unite(cl.i, cl.j);
    for (std::size_t b = 0; b < total; ++b)
      for (std::size_t a = 0; a < b; ++a)
        if (find(a) != find(b) && find_modular_relation(pts[a], pts[b], ctx_)) unite(a, b);

    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t k = 0; k < total; ++k) groups[find(k)].push_back(k);
    orbit_of_.assign(c_.n(), 0);
    for (const auto& [root, members] : groups) {
      std::vector<std::size_t> basis;
      bool touches_base = false;
      for (std::size_t k : members) (k < c_.n() ? basis.push_back(k) : void(touches_base = true));
      if (basis.empty()) continue;
      bool special = false;
      if (c_.base_kind == BaseKind::special) special = is_special(pts[basis.front()], ctx_).has_value();
      for (std::size_t k : basis) orbit_of_[k] = orbits_.size();
      orbits_.push_back(std::move(basis));
      free_.push_back(!touches_base && !special);
    }
  }

  void build_jacobian() {
    const std::size_t total = c_.n() + c_.m();
    const long wb = ctx_.work_bits();
    PrecisionScope scope(wb);
    jac_ = CMatrix(c_.relations.size(), 4 * total, wb);
    if (c_.relations.empty()) return;
    // generator values for every coordinate
    std::map<Generator, Complex> vals;
    for (std::size_t k = 0; k < total; ++k) {
      JJet jt = jet(assign_.at(static_cast<long>(k + 1)), ctx_, 2);
      const long v = static_cast<long>(k + 1);
      vals.emplace(Generator{GenKind::X, v}, assign_.at(v).value().at_precision(wb));
      vals.emplace(Generator{GenKind::J0, v}, jt.j);
      vals.emplace(Generator{GenKind::J1, v}, jt.j1);
      vals.emplace(Generator{GenKind::J2, v}, jt.j2);
    }
    const GenKind kinds[] = {GenKind::X, GenKind::J0, GenKind::J1, GenKind::J2};
    for (std::size_t row = 0; row < c_.relations.size(); ++row) {
      const JPoly& f = c_.relations[row].poly;
      for (long v : f.variables()) {
        for (int t = 0; t < 4; ++t) {
          JPoly d = jp_coord_diff(f, Generator{kinds[t], v});
          if (d.is_zero()) continue;
          jac_(row, 4 * static_cast<std::size_t>(v - 1) + static_cast<std::size_t>(t)) = detail::eval_with(d, vals, wb).value;
        }
      }
      // unit rows so that ill-scaled relations weigh the same
      Real s(0);
      for (std::size_t col = 0; col < jac_.cols(); ++col) s += norm(jac_(row, col));
      if (s.is_zero()) continue;
      s = sqrt(s);
      for (std::size_t col = 0; col < jac_.cols(); ++col) jac_(row, col) /= s;
    }
    auto sv = singular_values(jac_);
    cut_ = (sv.empty() ? Real(0) : sv.front()) * detail::rel_threshold(ctx_);
  }

  /// Rank of the Jacobian with the columns of kept points removed.
  long rank_excluding(const std::vector<bool>& keep) const {
    if (jac_.rows() == 0) return 0;
    std::vector<std::size_t> cols;
    for (std::size_t k = 0; k < keep.size(); ++k)
      if (!keep[k])
        for (std::size_t t = 0; t < 4; ++t) cols.push_back(4 * k + t);
    if (cols.empty()) return 0;
    auto it = rank_memo_.find(cols);
    if (it != rank_memo_.end()) return it->second;
    CMatrix sub(jac_.rows(), cols.size(), ctx_.work_bits());
    for (std::size_t r = 0; r < jac_.rows(); ++r)
      for (std::size_t q = 0; q < cols.size(); ++q) sub(r, q) = jac_(r, cols[q]);
    auto sv = singular_values(std::move(sub));
    long rank = static_cast<long>(std::count_if(sv.begin(), sv.end(), [&](const Real& s) { return s > cut_; }));
    rank_memo_.emplace(std::move(cols), rank);
    return rank;
  }

  std::vector<std::size_t> normalized(std::vector<std::size_t> v) const {
    for (std::size_t b : v)
      if (b >= orbits_.size()) fail(ErrorKind::invalid_argument, "orbit " + std::to_string(b) + " out of range");
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  }

  std::vector<std::size_t> complement(const std::vector<std::size_t>& sub) const {
    auto s = normalized(sub);
    std::vector<std::size_t> rest;
    for (std::size_t b = 0; b < orbits_.size(); ++b)
      if (!std::binary_search(s.begin(), s.end(), b)) rest.push_back(b);
    return rest;
  }

  std::vector<std::size_t> with_mask(const std::vector<std::size_t>& sub, const std::vector<std::size_t>& rest,
                                     unsigned long mask) const {
    auto y = normalized(sub);
    for (std::size_t k = 0; k < rest.size(); ++k)
      if (mask & (1UL << k)) y.push_back(rest[k]);
    std::sort(y.begin(), y.end());
    return y;
  }

  Configuration c_;
  PrecisionContext ctx_;
  ValidationReport report_;
  JAssignment assign_;
  std::vector<std::vector<std::size_t>> orbits_;
  std::vector<bool> free_;
  std::vector<std::size_t> orbit_of_;
  CMatrix jac_;
  Real cut_;
  mutable std::map<std::vector<std::size_t>, long> rank_memo_;
};

// ---------------------------------------------------------------------------
// Free-function surface.

inline XiReport xi_dim(const Configuration& c, const PrecisionContext& ctx) { return ClosureAnalysis(c, ctx).xi(); }

inline long trdeg_estimate(const Configuration& c, const PrecisionContext& ctx) {
  return ClosureAnalysis(c, ctx).trdeg_estimate();
}

inline DeltaReport delta(const Configuration& c, const PrecisionContext& ctx) { return ClosureAnalysis(c, ctx).delta(); }

struct SubmodularReport {
  DeltaReport a, b, a_union_b, a_cap_b;
  bool holds = false;
  bool closed_up = false;  ///< A or B was enlarged to a union of orbit blocks
  Configuration union_config;
};

namespace detail {

inline bool same_point(const HPoint& x, const HPoint& y, const PrecisionContext& ctx) {
  return points_close(x.value(), y.value(), ctx);
}

inline JPoly reindex(const JPoly& p, const std::map<long, long>& to) {
  JPoly out;
  for (const auto& [mono, coef] : p.terms()) {
    Monomial m;
    for (const auto& [g, e] : mono) {
      Generator h = g;
      h.var = to.at(g.var);
      m[h] += e;
    }
    out.add_term(m, coef);
  }
  return out;
}

}  // namespace detail

/// Merges two configurations over the same base; point sets are united by
/// proximity and relations are re-indexed. `map_a`, `map_b` receive the
/// union index of every basis point.
inline Configuration merge_configurations(const Configuration& a, const Configuration& b, const PrecisionContext& ctx,
                                          std::vector<std::size_t>& map_a, std::vector<std::size_t>& map_b) {
  if (a.base_kind != b.base_kind || a.m() != b.m())
    fail(ErrorKind::invalid_argument, "configurations do not share a base");
  for (std::size_t k = 0; k < a.m(); ++k)
    if (!detail::same_point(a.base_points[k], b.base_points[k], ctx))
      fail(ErrorKind::invalid_argument, "configurations do not share a base");
  Configuration u;
  u.base_kind = a.base_kind;
  u.base_points = a.base_points;
  u.basis_points = a.basis_points;
  map_a.resize(a.n());
  for (std::size_t k = 0; k < a.n(); ++k) map_a[k] = k;
  map_b.assign(b.n(), 0);
  for (std::size_t k = 0; k < b.n(); ++k) {
    std::optional<std::size_t> hit;
    for (std::size_t q = 0; q < u.basis_points.size() && !hit; ++q)
      if (detail::same_point(b.basis_points[k], u.basis_points[q], ctx)) hit = q;
    if (!hit) {
      hit = u.basis_points.size();
      u.basis_points.push_back(b.basis_points[k]);
    }
    map_b[k] = *hit;
  }
  const std::size_t n = u.n();
  auto var_map = [&](const Configuration& c, const std::vector<std::size_t>& pm) {
    std::map<long, long> to;
    for (std::size_t k = 0; k < c.n(); ++k) to[static_cast<long>(k + 1)] = static_cast<long>(pm[k] + 1);
    for (std::size_t k = 0; k < c.m(); ++k) to[static_cast<long>(c.n() + k + 1)] = static_cast<long>(n + k + 1);
    return to;
  };
  std::set<std::string> seen;
  for (const auto* src : {&a, &b}) {
    auto to = var_map(*src, src == &a ? map_a : map_b);
    for (const auto& r : src->relations) {
      JPoly p = detail::reindex(r.poly, to);
      if (seen.insert(p.to_string()).second) u.relations.push_back({p, std::nullopt});
    }
    for (const auto& cl : src->modular) {
      ModularClaim m{static_cast<std::size_t>(to.at(static_cast<long>(cl.i + 1)) - 1),
                     static_cast<std::size_t>(to.at(static_cast<long>(cl.j + 1)) - 1), cl.g};
      bool dup = false;
      for (const auto& e : u.modular) dup = dup || (e.i == m.i && e.j == m.j && e.g == m.g);
      if (!dup) u.modular.push_back(m);
    }
  }
  // points of B new to the union may be related to points of A
  for (std::size_t q = a.n(); q < n; ++q)
    for (std::size_t p = 0; p < a.n(); ++p)
      if (auto rel = find_modular_relation(u.basis_points[p], u.basis_points[q], ctx)) {
        u.modular.push_back({p, q, rel->g});
        break;
      }
  return u;
}

/// delta(A u B) + delta(A n B) <= delta(A) + delta(B), all four measured
/// inside the merged configuration. A and B are closed up to orbit blocks.
inline SubmodularReport check_submodular(const Configuration& a, const Configuration& b, const PrecisionContext& ctx) {
  ClosureAnalysis(a, ctx);  // each must validate on its own
  ClosureAnalysis(b, ctx);
  SubmodularReport rep;
  std::vector<std::size_t> ma, mb;
  rep.union_config = merge_configurations(a, b, ctx, ma, mb);
  ClosureAnalysis u(rep.union_config, ctx);
  auto oa = u.orbits_of_points(ma);
  auto ob = u.orbits_of_points(mb);
  rep.closed_up = u.points_of(oa).size() != a.n() || u.points_of(ob).size() != b.n();
  std::vector<std::size_t> uni, cap;
  std::set_union(oa.begin(), oa.end(), ob.begin(), ob.end(), std::back_inserter(uni));
  std::set_intersection(oa.begin(), oa.end(), ob.begin(), ob.end(), std::back_inserter(cap));
  rep.a = u.delta_of(oa);
  rep.b = u.delta_of(ob);
  rep.a_union_b = u.delta_of(uni);
  rep.a_cap_b = u.delta_of(cap);
  rep.holds = rep.a_union_b.delta + rep.a_cap_b.delta <= rep.a.delta + rep.b.delta;
  return rep;
}

inline bool self_sufficient(const std::vector<std::size_t>& sub, const Configuration& c, const PrecisionContext& ctx) {
  return ClosureAnalysis(c, ctx).self_sufficient(sub);
}

inline ClosureAnalysis::Closure ss_closure(const std::vector<std::size_t>& x, const Configuration& c,
                                           const PrecisionContext& ctx) {
  return ClosureAnalysis(c, ctx).ss_closure(x);
}

inline long dim_delta(const std::vector<std::size_t>& x, const Configuration& c, const PrecisionContext& ctx) {
  return ClosureAnalysis(c, ctx).dim_delta(x);
}

inline constexpr const char* negative_delta_warning =
    "negative delta: an analytic configuration always has delta >= 0 over its closure, so the declared data "
    "do not model one";

}  // namespace jmod

namespace jmod {

/// The sub-configuration on the given basis points (0-based, in order):
/// relations and claims wholly supported there, base unchanged.
inline Configuration restrict_configuration(const Configuration& c, const std::vector<std::size_t>& keep) {
  Configuration out;
  out.base_kind = c.base_kind;
  out.base_points = c.base_points;
  std::map<long, long> to;
  for (std::size_t k = 0; k < keep.size(); ++k) {
    if (keep[k] >= c.n()) fail(ErrorKind::invalid_argument, "point index out of range");
    out.basis_points.push_back(c.basis_points[keep[k]]);
    to[static_cast<long>(keep[k] + 1)] = static_cast<long>(k + 1);
  }
  for (std::size_t k = 0; k < c.m(); ++k) to[static_cast<long>(c.n() + k + 1)] = static_cast<long>(keep.size() + k + 1);
  for (const auto& r : c.relations) {
    bool inside = true;
    for (long v : r.poly.variables()) inside = inside && to.count(v);
    if (inside) out.relations.push_back({detail::reindex(r.poly, to), std::nullopt});
  }
  // Claims between kept points, composed through dropped ones where needed:
  // walk the claim graph from each kept point, g z_root = z_b.
  const std::size_t total = c.n() + c.m();
  std::vector<std::vector<std::pair<std::size_t, GL2Q>>> adj(total);
  for (const auto& cl : c.modular) {
    if (cl.i >= total || cl.j >= total || cl.g.det() == 0) continue;
    const GL2Q& g = cl.g;
    GL2Q inv{g.d / g.det(), -g.b / g.det(), -g.c / g.det(), g.a / g.det()};
    adj[cl.j].push_back({cl.i, g});
    adj[cl.i].push_back({cl.j, inv});
  }
  auto new_index = [&](std::size_t old) -> std::optional<std::size_t> {
    auto it = to.find(static_cast<long>(old + 1));
    if (it == to.end()) return std::nullopt;
    return static_cast<std::size_t>(it->second - 1);
  };
  std::vector<bool> seen(total, false);
  for (std::size_t root = 0; root < total; ++root) {
    if (seen[root] || !new_index(root)) continue;
    std::vector<std::pair<std::size_t, GL2Q>> stack{{root, GL2Q::identity()}};
    seen[root] = true;
    while (!stack.empty()) {
      auto [v, g] = stack.back();
      stack.pop_back();
      if (v != root)
        if (auto ni = new_index(v)) out.modular.push_back({*ni, *new_index(root), g});
      for (const auto& [w, h] : adj[v]) {
        if (seen[w]) continue;
        seen[w] = true;
        stack.push_back({w, h * g});
      }
    }
  }
  return out;
}

}  // namespace jmod
