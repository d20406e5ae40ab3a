#pragma once

// Points of H = H+ u H-, the Moebius action of GL2(Q), red(g), reduction to
// the SL2(Z) fundamental domain, CM detection and modular-relation search.

#include <gmpxx.h>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "jmod/context.hpp"
#include "jmod/error.hpp"
#include "jmod/numerics.hpp"
#include "jmod/real.hpp"

namespace jmod {

class HPoint {
 public:
  explicit HPoint(Complex value) : value_(std::move(value)) {
    if (!value_.is_finite() || value_.im.is_zero())
      fail(ErrorKind::invalid_argument, "point " + to_string(value_, 20) + " is not in H (Im must be nonzero)");
  }

  const Complex& value() const noexcept { return value_; }
  bool upper() const noexcept { return value_.im.sign() > 0; }
  HPoint conjugate() const { return HPoint(conj(value_)); }

 private:
  Complex value_;
};

struct GL2Q {
  mpq_class a{1}, b{0}, c{0}, d{1};

  static GL2Q identity() { return {}; }
  static GL2Q from_ints(long a, long b, long c, long d) { return {mpq_class(a), mpq_class(b), mpq_class(c), mpq_class(d)}; }

  mpq_class det() const { return a * d - b * c; }
  bool is_scalar() const { return b == 0 && c == 0 && a == d; }

  friend GL2Q operator*(const GL2Q& x, const GL2Q& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
  }
  friend bool operator==(const GL2Q&, const GL2Q&) = default;

  std::string to_string() const {
    return "[[" + a.get_str() + "," + b.get_str() + "],[" + c.get_str() + "," + d.get_str() + "]]";
  }
};

/// Primitive integer matrix; n is |det|.
struct PrimitiveIntMatrix {
  mpz_class a{1}, b{0}, c{0}, d{1};
  mpz_class n{1};

  mpz_class det() const { return a * d - b * c; }
  GL2Q to_gl2q() const { return {mpq_class(a), mpq_class(b), mpq_class(c), mpq_class(d)}; }
  friend bool operator==(const PrimitiveIntMatrix&, const PrimitiveIntMatrix&) = default;

  std::string to_string() const {
    return "[[" + a.get_str() + "," + b.get_str() + "],[" + c.get_str() + "," + d.get_str() + "]]";
  }
};

/// (a z + b) / (c z + d). Im flips sign iff det(g) < 0.
inline HPoint act(const GL2Q& g, const HPoint& z, const PrecisionContext& ctx) {
  if (g.det() == 0) fail(ErrorKind::invalid_argument, "matrix " + g.to_string() + " is singular");
  const long wb = std::max(ctx.work_bits(), z.value().precision());
  PrecisionScope scope(wb);
  const Complex& w = z.value();
  Complex num = w * Real(g.a);
  num.re += g.b;
  Complex den = w * Real(g.c);
  den.re += g.d;
  return HPoint(num / den);
}

/// The unique positive rational multiple of g with coprime integer entries.
inline PrimitiveIntMatrix red(const GL2Q& g) {
  if (g.det() == 0) fail(ErrorKind::invalid_argument, "red() of singular matrix " + g.to_string());
  mpz_class l = 1;
  for (const mpq_class* q : {&g.a, &g.b, &g.c, &g.d}) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), q->get_den_mpz_t());
  std::array<mpz_class, 4> e;
  const std::array<const mpq_class*, 4> src{&g.a, &g.b, &g.c, &g.d};
  mpz_class gg = 0;
  for (int i = 0; i < 4; ++i) {
    mpq_class s = *src[i] * l;
    e[i] = s.get_num();
    mpz_gcd(gg.get_mpz_t(), gg.get_mpz_t(), e[i].get_mpz_t());
  }
  for (auto& x : e) mpz_divexact(x.get_mpz_t(), x.get_mpz_t(), gg.get_mpz_t());
  PrimitiveIntMatrix m{e[0], e[1], e[2], e[3], 0};
  m.n = abs(m.det());
  return m;
}

struct Reduction {
  HPoint z0;
  PrimitiveIntMatrix gamma;  ///< z = gamma * z0, gamma in SL2(Z)
};

/// Moves z into {|Re| <= 1/2, |z| >= 1} (for H- inputs, the conjugate of
/// that region) and returns the SL2(Z) element taking the representative
/// back to z.
inline Reduction reduce_fundamental(const HPoint& z, const PrecisionContext& ctx) {
  if (!z.upper()) {
    Reduction r = reduce_fundamental(z.conjugate(), ctx);
    return {r.z0.conjugate(), r.gamma};
  }
  // Points close to the real line lose about log2(1/Im) bits per unit of
  // distance travelled; give the iteration that much headroom.
  const long extra = std::max(0L, -2 * z.value().im.exponent());
  const long wb = std::max(ctx.work_bits(), z.value().precision()) + extra;
  PrecisionScope scope(wb);
  const Complex zw = z.value().at_precision(wb);
  Complex w = zw;
  mpz_class ma = 1, mb = 0, mc = 0, md = 1;  // w = M z
  const Real one_minus = Real(1) - Real::pow2(-(ctx.bits), wb);
  constexpr long kMaxSteps = 1'000'000;
  long steps = 0;
  for (;; ++steps) {
    if (steps > kMaxSteps) fail(ErrorKind::numeric_instability, "fundamental-domain reduction exceeded 10^6 steps");
    mpz_class n = round(w.re).round_to_mpz();
    if (n != 0) {
      w.re -= n;
      ma -= n * mc;
      mb -= n * md;
    }
    if (norm(w) < one_minus) {
      w = Complex(Real(-1)) / w;
      std::swap(ma, mc);
      std::swap(mb, md);
      ma = -ma;
      mb = -mb;
    } else {
      break;
    }
  }
  Complex num = zw * Real(ma);
  num.re += mb;
  Complex den = zw * Real(mc);
  den.re += md;
  Complex z0 = num / den;
  PrimitiveIntMatrix gamma{md, -mb, -mc, ma, 1};
  return {HPoint(z0.at_precision(ctx.work_bits())), gamma};
}

/// Primitive (a, b, c), a > 0, b^2 - 4ac < 0 with a z^2 + b z + c = 0.
struct QuadraticForm {
  mpz_class a, b, c;
  mpz_class discriminant() const { return b * b - 4 * a * c; }
  friend bool operator==(const QuadraticForm&, const QuadraticForm&) = default;
};

/// Heuristic CM test: searches an integer quadratic vanishing at z within
/// the context height bound. nullopt is not a proof of genericity.
inline std::optional<QuadraticForm> is_special(const HPoint& z, const PrecisionContext& ctx) {
  const long wb = ctx.work_bits();
  PrecisionScope scope(wb);
  const Complex w = z.value().at_precision(wb);
  std::vector<Complex> values{Complex(Real(1)), w, w * w};
  auto rel = integer_relation(values, ctx);
  if (!rel || rel->coeffs[2] == 0) return std::nullopt;
  QuadraticForm f{rel->coeffs[2], rel->coeffs[1], rel->coeffs[0]};
  mpz_class g = 0;
  for (const mpz_class* x : {&f.a, &f.b, &f.c}) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), x->get_mpz_t());
  for (mpz_class* x : {&f.a, &f.b, &f.c}) mpz_divexact(x->get_mpz_t(), x->get_mpz_t(), g.get_mpz_t());
  if (f.a < 0) {
    f.a = -f.a;
    f.b = -f.b;
    f.c = -f.c;
  }
  if (f.discriminant() >= 0) return std::nullopt;
  return f;
}

/// psi(N) = N prod_{p | N} (1 + 1/p): the number of Hecke representatives.
inline long hecke_index(long n) {
  long result = n, m = n;
  for (long p = 2; p * p <= m; ++p) {
    if (m % p == 0) {
      result = result / p * (p + 1);
      while (m % p == 0) m /= p;
    }
  }
  if (m > 1) result = result / m * (m + 1);
  return result;
}

/// [[a, b], [0, d]] with ad = N, 0 <= b < d, gcd(a, b, d) = 1, ordered by a
/// then b.
inline std::vector<PrimitiveIntMatrix> hecke_representatives(long n) {
  if (n < 1) fail(ErrorKind::invalid_argument, "level must be positive");
  std::vector<PrimitiveIntMatrix> reps;
  for (long a = 1; a <= n; ++a) {
    if (n % a != 0) continue;
    long d = n / a;
    for (long b = 0; b < d; ++b) {
      mpz_class g;
      mpz_class za(a), zb(b), zd(d);
      mpz_gcd(g.get_mpz_t(), za.get_mpz_t(), zb.get_mpz_t());
      mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), zd.get_mpz_t());
      if (g == 1) reps.push_back({za, zb, 0, zd, mpz_class(n)});
    }
  }
  return reps;
}

struct ModularRelation {
  GL2Q g;  ///< act(g, z2) = z1; primitive integer entries
  mpz_class n;
};

namespace detail {

inline GL2Q inverse_sl2z(const PrimitiveIntMatrix& m) {
  return {mpq_class(m.d), mpq_class(-m.b), mpq_class(-m.c), mpq_class(m.a)};
}

/// Elements E with E * w0 possibly equal to a second reduced representative
/// of the same orbit (boundary identifications of the fundamental domain).
inline const std::vector<GL2Q>& boundary_moves() {
  static const std::vector<GL2Q> moves = {
      GL2Q::from_ints(1, 0, 0, 1),  GL2Q::from_ints(1, 1, 0, 1),  GL2Q::from_ints(1, -1, 0, 1),
      GL2Q::from_ints(0, -1, 1, 0), GL2Q::from_ints(1, -1, 1, 0), GL2Q::from_ints(-1, -1, 1, 0),
      GL2Q::from_ints(0, -1, 1, 1), GL2Q::from_ints(0, -1, 1, -1),
  };
  return moves;
}

inline bool points_close(const Complex& a, const Complex& b, const PrecisionContext& ctx) {
  Real scale = Real(1) + abs(a);
  return abs(a - b) <= ctx.tol() * scale;
}

}  // namespace detail

/// Smallest-level g in GL2(Q) (det(red g) = N <= nmax) with g z2 = z1.
inline std::optional<ModularRelation> find_modular_relation(const HPoint& z1, const HPoint& z2,
                                                            const PrecisionContext& ctx) {
  const GL2Q flip = GL2Q::from_ints(-1, 0, 0, 1);
  const bool f1 = !z1.upper(), f2 = !z2.upper();
  HPoint u1 = f1 ? act(flip, z1, ctx) : z1;
  HPoint u2 = f2 ? act(flip, z2, ctx) : z2;
  Reduction r1 = reduce_fundamental(u1, ctx);
  const GL2Q gamma1 = r1.gamma.to_gl2q();
  for (long n = 1; n <= ctx.nmax; ++n) {
    for (const auto& h : hecke_representatives(n)) {
      const GL2Q hq = h.to_gl2q();
      HPoint w = act(hq, u2, ctx);
      Reduction rw = reduce_fundamental(w, ctx);
      for (const GL2Q& e : detail::boundary_moves()) {
        HPoint cand = act(e, rw.z0, ctx);
        if (!detail::points_close(cand.value(), r1.z0.value(), ctx)) continue;
        GL2Q g = gamma1 * e * detail::inverse_sl2z(rw.gamma) * hq;
        if (f1) g = flip * g;
        if (f2) g = g * flip;
        PrimitiveIntMatrix p = red(g);
        return ModularRelation{p.to_gl2q(), p.n};
      }
    }
  }
  return std::nullopt;
}

}  // namespace jmod
