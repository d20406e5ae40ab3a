#pragma once

// Classical modular polynomials Phi_N, their evaluation, modular
// independence and the G-orbit partition behind dim_G.
//
// Phi_N(X, j(tau)) = prod_h (X - j(h tau)) over the Hecke representatives h
// of level N. We sample tau at psi(N) + 1 points tau_l = l/(psi+1) + i y0,
// expand the product numerically at each sample, and solve one Vandermonde
// system in Y = j(tau_l) per power of X. The coefficients must come out as
// integers; precision is raised until they do.

#include <gmpxx.h>

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "jmod/context.hpp"
#include "jmod/error.hpp"
#include "jmod/halfplane.hpp"
#include "jmod/linalg.hpp"
#include "jmod/modular_forms.hpp"
#include "jmod/real.hpp"

namespace jmod {

struct ModularPolynomial {
  long level = 1;
  std::map<std::pair<long, long>, mpz_class> coeffs;  ///< (i, j) -> coefficient of X^i Y^j
  long deg_x = 0;
  long deg_y = 0;

  mpz_class coeff(long i, long j) const {
    auto it = coeffs.find({i, j});
    return it == coeffs.end() ? mpz_class(0) : it->second;
  }

  bool symmetric() const {
    for (const auto& [ij, c] : coeffs)
      if (coeff(ij.second, ij.first) != c) return false;
    return true;
  }

  long total_degree() const {
    long t = 0;
    for (const auto& [ij, c] : coeffs) t = std::max(t, ij.first + ij.second);
    return t;
  }

  /// Exact value at integer arguments.
  mpz_class eval(const mpz_class& x, const mpz_class& y) const {
    mpz_class acc = 0;
    for (const auto& [ij, c] : coeffs) {
      mpz_class xp, yp;
      mpz_pow_ui(xp.get_mpz_t(), x.get_mpz_t(), static_cast<unsigned long>(ij.first));
      mpz_pow_ui(yp.get_mpz_t(), y.get_mpz_t(), static_cast<unsigned long>(ij.second));
      acc += c * xp * yp;
    }
    return acc;
  }
};

inline ModularPolynomial phi_one() {
  ModularPolynomial p;
  p.level = 1;
  p.coeffs[{1, 0}] = 1;
  p.coeffs[{0, 1}] = -1;
  p.deg_x = p.deg_y = 1;
  return p;
}

namespace detail {

inline std::vector<Complex> phi_check_points(long count) {
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> re(-0.5, 0.5), im(0.9, 1.3);
  std::vector<Complex> pts;
  for (long k = 0; k < count; ++k) {
    double a = re(rng), b = im(rng);
    pts.push_back(Complex(Real(a), Real(b)));
  }
  return pts;
}

/// One interpolation pass at `bits`. Returns the integer coefficients and
/// the worst distance of any raw coefficient from its rounding (nullopt if
/// the Vandermonde matrix is numerically singular).
struct PhiAttempt {
  ModularPolynomial poly;
  Real worst;
  long magnitude_bits = 0;  ///< log2 of the largest scaled unknown
};

inline std::optional<PhiAttempt> phi_interpolate(long n, long bits) {
  const long psi = hecke_index(n);
  const auto reps = hecke_representatives(n);
  const std::size_t k = static_cast<std::size_t>(psi + 1);
  PrecisionContext ectx = PrecisionContext::with_bits(bits);
  ectx.guard_bits = 32;
  const long wb = ectx.work_bits();
  PrecisionScope scope(wb);
  const Real y0 = Real(3) / 2;
  const Real scale = exp(Real::pi(wb) * 2 * y0);  // |j(tau_l)| ~ scale

  std::vector<Complex> u(k);                       // j(tau_l) / scale
  std::vector<std::vector<Complex>> e(k);          // e[l][m]: coefficient of X^m at sample l
  for (std::size_t l = 0; l < k; ++l) {
    Complex tau(Real(static_cast<long>(l)) / static_cast<long>(k), y0);
    HPoint t(tau);
    u[l] = j_value(t, ectx) / scale;
    std::vector<Complex> poly{Complex(Real::with_precision(wb) + 1)};
    for (const auto& h : reps) {
      Complex root = j_value(act(h.to_gl2q(), t, ectx), ectx);
      std::vector<Complex> next(poly.size() + 1, Complex::with_precision(wb));
      for (std::size_t i = 0; i < poly.size(); ++i) {
        next[i + 1] += poly[i];
        next[i] -= poly[i] * root;
      }
      poly = std::move(next);
    }
    e[l] = std::move(poly);
  }

  CMatrix v(k, k, wb);
  for (std::size_t l = 0; l < k; ++l) {
    Complex p(Real::with_precision(wb) + 1);
    for (std::size_t c = 0; c < k; ++c) {
      v(l, c) = p;
      p = p * u[l];
    }
  }
  LuResult f = lu_decompose(v);
  if (f.singular) return std::nullopt;

  PhiAttempt out;
  out.poly.level = n;
  out.poly.deg_x = out.poly.deg_y = psi;
  out.worst = Real::with_precision(64);
  std::vector<Real> scale_pow(k);
  scale_pow[0] = Real::with_precision(wb) + 1;
  for (std::size_t c = 1; c < k; ++c) scale_pow[c] = scale_pow[c - 1] * scale;
  for (std::size_t m = 0; m < k; ++m) {
    std::vector<Complex> rhs(k);
    for (std::size_t l = 0; l < k; ++l) rhs[l] = e[l][m];
    auto x = lu_solve(f, rhs);
    for (std::size_t c = 0; c < k; ++c) {
      const Real mag = abs(x[c]);
      if (!mag.is_zero()) out.magnitude_bits = std::max(out.magnitude_bits, mag.exponent());
      Complex coef = x[c] / scale_pow[c];
      mpz_class r = coef.re.round_to_mpz();
      Real dist = max(abs(coef.re - Real(r)), abs(coef.im));
      if (dist > out.worst) out.worst = dist.at_precision(64);
      if (r != 0) out.poly.coeffs[{static_cast<long>(m), static_cast<long>(c)}] = r;
    }
  }
  return out;
}

}  // namespace detail

/// Scaled tolerance reference: 1 + sum |c_ij| |x|^i |y|^j.
inline Real phi_scale(const ModularPolynomial& p, const Complex& x, const Complex& y) {
  const long wb = std::max(x.precision(), y.precision());
  PrecisionScope scope(wb);
  const Real ax = abs(x), ay = abs(y);
  std::vector<Real> xp{Real(1)}, yp{Real(1)};
  for (long i = 1; i <= p.deg_x; ++i) xp.push_back(xp.back() * ax);
  for (long i = 1; i <= p.deg_y; ++i) yp.push_back(yp.back() * ay);
  Real s(1);
  for (const auto& [ij, c] : p.coeffs) s += abs(Real(c)) * xp[static_cast<std::size_t>(ij.first)] * yp[static_cast<std::size_t>(ij.second)];
  return s;
}

struct PhiValue {
  Complex value;
  Complex dx;   ///< partial in X
  Complex dy;   ///< partial in Y
  Real scale;   ///< 1 + sum |c| |x|^i |y|^j
};

/// Phi and both partials at (x, y).
inline PhiValue phi_evaluate(const ModularPolynomial& p, const Complex& x, const Complex& y) {
  const long wb = std::max(x.precision(), y.precision());
  PrecisionScope scope(wb);
  std::vector<Complex> xp{Complex(Real(1))}, yp{Complex(Real(1))};
  const long top = std::max(p.deg_x, p.deg_y);
  for (long i = 1; i <= top; ++i) {
    xp.push_back(xp.back() * x);
    yp.push_back(yp.back() * y);
  }
  PhiValue out{Complex::with_precision(wb), Complex::with_precision(wb), Complex::with_precision(wb),
               phi_scale(p, x, y)};
  for (const auto& [ij, c] : p.coeffs) {
    const auto i = static_cast<std::size_t>(ij.first), j = static_cast<std::size_t>(ij.second);
    const Real rc(c);
    out.value += xp[i] * yp[j] * rc;
    if (i > 0) out.dx += xp[i - 1] * yp[j] * (rc * static_cast<long>(i));
    if (j > 0) out.dy += xp[i] * yp[j - 1] * (rc * static_cast<long>(j));
  }
  return out;
}

/// Process-wide store of computed or imported Phi_N.
class PhiCache {
 public:
  static PhiCache& instance() {
    static PhiCache cache;
    return cache;
  }

  long ceiling() const { return ceiling_.load(); }
  void set_ceiling(long n) { ceiling_.store(n); }

  std::optional<ModularPolynomial> find(long n) const {
    std::shared_lock lock(mutex_);
    auto it = table_.find(n);
    if (it == table_.end()) return std::nullopt;
    return it->second;
  }

  void put(const ModularPolynomial& p) {
    std::unique_lock lock(mutex_);
    table_[p.level] = p;
  }

  std::vector<long> levels() const {
    std::shared_lock lock(mutex_);
    std::vector<long> out;
    for (const auto& [n, p] : table_) out.push_back(n);
    return out;
  }

  void clear() {
    std::unique_lock lock(mutex_);
    table_.clear();
  }

 private:
  mutable std::shared_mutex mutex_;
  std::map<long, ModularPolynomial> table_;
  std::atomic<long> ceiling_{12};
};

/// Phi_N(j(z), j(N z)) vanishes (scaled) at a few fixed pseudo-random z.
inline bool phi_spot_check(const ModularPolynomial& p, const PrecisionContext& ctx, long count = 3) {
  const GL2Q scale_n{mpq_class(p.level), 0, 0, 1};
  for (const Complex& z : detail::phi_check_points(count)) {
    HPoint hz(z.at_precision(ctx.work_bits()));
    Complex x = j_value(hz, ctx);
    Complex y = j_value(act(scale_n, hz, ctx), ctx);
    PhiValue v = phi_evaluate(p, x, y);
    if (abs(v.value) > ctx.tol() * v.scale) return false;
  }
  return true;
}

/// Phi_N, computed on first use and cached. Levels above the cache ceiling
/// must have been imported.
inline ModularPolynomial compute_phi(long n, const PrecisionContext& ctx) {
  if (n < 1) fail(ErrorKind::invalid_argument, "modular polynomial level must be >= 1");
  auto& cache = PhiCache::instance();
  if (auto hit = cache.find(n)) return *hit;
  if (n > cache.ceiling())
    fail(ErrorKind::unsupported_level, "Phi_" + std::to_string(n) + " is above the level ceiling " +
                                           std::to_string(cache.ceiling()) + " and not cached");
  if (n == 1) {
    cache.put(phi_one());
    return phi_one();
  }
  // The result is a fixed integer polynomial, so the working precision is
  // chosen from the problem, not from ctx.
  long bits = 256;
  for (int attempt = 0; attempt < 6; ++attempt) {
    auto a = detail::phi_interpolate(n, bits);
    const long needed = a ? a->magnitude_bits + 96 : 2 * bits;
    if (a && bits >= needed && a->worst <= Real::pow2(-20, 64)) {
      ModularPolynomial p = std::move(a->poly);
      if (!p.symmetric() || p.coeff(p.deg_x, 0) != 1 || !phi_spot_check(p, ctx))
        fail(ErrorKind::precision_exhausted, "Phi_" + std::to_string(n) + " failed verification");
      cache.put(p);
      return p;
    }
    bits = std::max(needed + 64, bits + bits / 2);
  }
  fail(ErrorKind::precision_exhausted,
       "Phi_" + std::to_string(n) + ": coefficients did not round to integers; retry with more precision");
}

inline PhiValue phi_eval_full(long n, const Complex& x, const Complex& y, const PrecisionContext& ctx) {
  ModularPolynomial p = compute_phi(n, ctx);
  const long wb = std::max({ctx.work_bits(), x.precision(), y.precision()});
  return phi_evaluate(p, x.at_precision(wb), y.at_precision(wb));
}

inline Complex phi_eval(long n, const Complex& x, const Complex& y, const PrecisionContext& ctx) {
  return phi_eval_full(n, x, y, ctx).value;
}

/// |Phi_N(x, y)| <= tol * (1 + sum |c_ij| |x|^i |y|^j).
inline bool phi_vanishes(long n, const Complex& x, const Complex& y, const PrecisionContext& ctx) {
  PhiValue v = phi_eval_full(n, x, y, ctx);
  return abs(v.value) <= ctx.tol() * v.scale;
}

struct Independence {
  bool independent = true;     ///< heuristic: only levels up to nmax were tried
  std::optional<long> witness;
};

inline Independence modularly_independent(const Complex& x, const Complex& y, const PrecisionContext& ctx) {
  for (long n = 1; n <= ctx.nmax; ++n)
    if (phi_vanishes(n, x, y, ctx)) return {false, n};
  return {true, std::nullopt};
}

// ---------------------------------------------------------------------------
// Cache file: "PHI N degX degY", lines "i j coefficient", "END".

inline void phi_write(std::ostream& out, const ModularPolynomial& p) {
  out << "PHI " << p.level << ' ' << p.deg_x << ' ' << p.deg_y << '\n';
  for (const auto& [ij, c] : p.coeffs) out << ij.first << ' ' << ij.second << ' ' << c.get_str() << '\n';
  out << "END\n";
}

inline void phi_export(const std::string& path, const std::vector<long>& levels, const PrecisionContext& ctx) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot write Phi cache '" + path + "'");
  for (long n : levels) phi_write(out, compute_phi(n, ctx));
}

inline std::vector<ModularPolynomial> phi_read(std::istream& in, const std::string& where) {
  std::vector<ModularPolynomial> out;
  std::string line;
  long lineno = 0;
  std::optional<ModularPolynomial> cur;
  auto bad = [&](const std::string& why) {
    fail(ErrorKind::parse, where + ":" + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    if (!cur) {
      std::string tag;
      ModularPolynomial p;
      if (!(ls >> tag >> p.level >> p.deg_x >> p.deg_y) || tag != "PHI") bad("expected 'PHI N degX degY'");
      if (p.level < 1 || p.deg_x < 1 || p.deg_y < 1) bad("bad header values");
      cur = std::move(p);
      continue;
    }
    std::string first;
    ls >> first;
    if (first == "END") {
      out.push_back(std::move(*cur));
      cur.reset();
      continue;
    }
    long i = 0, j = 0;
    std::string num;
    try {
      i = std::stol(first);
    } catch (const std::exception&) {
      bad("expected 'i j coefficient'");
    }
    if (!(ls >> j >> num)) bad("expected 'i j coefficient'");
    if (i < 0 || j < 0 || i > cur->deg_x || j > cur->deg_y) bad("exponent outside declared degrees");
    mpz_class c;
    if (c.set_str(num, 10) != 0) bad("coefficient is not a decimal integer");
    if (c != 0) cur->coeffs[{i, j}] = c;
  }
  if (cur) fail(ErrorKind::parse, where + ": missing END");
  return out;
}

/// Loads Phi_N blocks, checks degrees, symmetry and numeric vanishing, and
/// adds them to the cache. Returns the levels loaded.
inline std::vector<long> phi_import(const std::string& path, const PrecisionContext& ctx) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot read Phi cache '" + path + "'");
  auto polys = phi_read(in, path);
  std::vector<long> levels;
  for (auto& p : polys) {
    const std::string name = "Phi_" + std::to_string(p.level);
    if (p.level == 1) {
      if (p.coeffs != phi_one().coeffs) fail(ErrorKind::validation, name + " must be X - Y");
    } else {
      const long psi = hecke_index(p.level);
      if (p.deg_x != psi || p.deg_y != psi) fail(ErrorKind::validation, name + " has the wrong degree");
      if (!p.symmetric()) fail(ErrorKind::validation, name + " is not symmetric");
      if (p.coeff(psi, 0) != 1) fail(ErrorKind::validation, name + " is not monic");
      if (!phi_spot_check(p, ctx, 2)) fail(ErrorKind::validation, name + " does not vanish on (j(z), j(Nz))");
    }
    PhiCache::instance().put(p);
    levels.push_back(p.level);
  }
  return levels;
}

// ---------------------------------------------------------------------------
// G-orbits and dim_G.

struct OrbitPartition {
  std::vector<std::vector<std::size_t>> blocks;  ///< indices into points ++ base, sorted
  std::map<std::pair<std::size_t, std::size_t>, ModularRelation> witnesses;  ///< (i, j): g z_j = z_i
};

struct DimGResult {
  long dim = 0;
  OrbitPartition partition;
};

/// Orbit partition of `pts` under GL2(Q), with levels searched up to nmax.
inline OrbitPartition orbit_partition(const std::vector<HPoint>& pts, const PrecisionContext& ctx) {
  const std::size_t n = pts.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  OrbitPartition out;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      if (find(i) == find(j)) continue;
      auto rel = find_modular_relation(pts[i], pts[j], ctx);
      if (!rel) continue;
      out.witnesses.emplace(std::make_pair(i, j), *rel);
      std::size_t a = find(i), b = find(j);
      parent[std::max(a, b)] = std::min(a, b);
    }
  }
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[find(i)].push_back(i);
  for (auto& [root, members] : groups) out.blocks.push_back(std::move(members));
  std::sort(out.blocks.begin(), out.blocks.end());
  return out;
}

/// Number of orbits meeting `points` but not `base`.
inline DimGResult dim_G(const std::vector<HPoint>& points, const std::vector<HPoint>& base,
                        const PrecisionContext& ctx) {
  std::vector<HPoint> all = points;
  all.insert(all.end(), base.begin(), base.end());
  DimGResult r;
  r.partition = orbit_partition(all, ctx);
  for (const auto& block : r.partition.blocks) {
    bool has_point = false, has_base = false;
    for (std::size_t idx : block) (idx < points.size() ? has_point : has_base) = true;
    if (has_point && !has_base) ++r.dim;
  }
  return r;
}

/// A witness g z_j = z_i checked both ways: the Moebius action and Phi_N.
inline bool verify_witness(const HPoint& zi, const HPoint& zj, const ModularRelation& rel, const PrecisionContext& ctx) {
  HPoint image = act(rel.g, zj, ctx);
  if (abs(image.value() - zi.value()) > ctx.tol() * (Real(1) + abs(zi.value()))) return false;
  const long n = rel.n.get_si();
  auto& cache = PhiCache::instance();
  if (n > cache.ceiling() && !cache.find(n)) return true;  // nothing more to check
  return phi_vanishes(n, j_value(zi, ctx), j_value(zj, ctx), ctx);
}

}  // namespace jmod
