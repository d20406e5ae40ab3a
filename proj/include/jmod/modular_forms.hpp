#pragma once

// The j-function and its first three z-derivatives anywhere on H.
//
// At a reduced point z0 we evaluate E2, E4, E6 and Delta from their exact
// q-expansions. With D = (2 pi i)^-1 d/dz and the Ramanujan identities
//   D E2 = (E2^2 - E4)/12, D E4 = (E2 E4 - E6)/3, D E6 = (E2 E6 - E4^2)/2,
//   D Delta = E2 Delta,
// every D^k j is P_k(E2, E4, E6) / Delta with
//   P0 = E4^3
//   P1 = -E4^2 E6
//   P2 = -E2 E4^2 E6/6 + E4^4/2 + 2 E4 E6^2/3
//   P3 = -E2^2 E4^2 E6/24 + E2 E4^4/4 + E2 E4 E6^2/3 - 95 E4^3 E6/72 - 2 E6^3/9
// The jet is then carried to z = gamma z0 by differentiating j(gamma w) = j(w).
// E2 is only ever evaluated at reduced points, so its transformation law is
// never needed. Lower half-plane points use j(conj z) = conj j(z).

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "jmod/context.hpp"
#include "jmod/error.hpp"
#include "jmod/halfplane.hpp"
#include "jmod/qseries.hpp"
#include "jmod/real.hpp"

namespace jmod {

struct JJet {
  Complex j, j1, j2, j3;

  JJet conjugate() const { return {conj(j), conj(j1), conj(j2), conj(j3)}; }
};

/// Smallest M >= 8 with exp(-2 pi M im) exp(4 pi sqrt M) <= 2^(-bits-16),
/// i.e. the j-coefficient growth |a_k| <= e^(4 pi sqrt k) bounds the tail.
inline long truncation_order(const PrecisionContext& ctx, double im_reduced) {
  if (!(im_reduced > 0)) fail(ErrorKind::invalid_argument, "truncation order needs a positive imaginary part");
  const double target = -static_cast<double>(ctx.bits + 16) * std::log(2.0);
  const double two_pi = 2.0 * M_PI;
  long m = 8;
  while (-two_pi * static_cast<double>(m) * im_reduced + 2.0 * two_pi * std::sqrt(static_cast<double>(m)) > target) {
    ++m;
    if (m > 10'000'000) fail(ErrorKind::numeric_instability, "truncation order diverges");
  }
  return m;
}

namespace detail {

/// sum_k coeffs[k] q^k by Horner.
inline Complex horner(const std::vector<mpz_class>& coeffs, long terms, const Complex& q) {
  Complex acc = Complex::with_precision(q.precision());
  for (long k = terms; k >= 0; --k) {
    acc = acc * q;
    acc.re += coeffs[static_cast<std::size_t>(k)];
  }
  return acc;
}

/// D^k j at a point of the fundamental domain, k = 0..order.
inline std::array<Complex, 4> reduced_jet(const Complex& z0, int order, long bits, long series_bits) {
  PrecisionScope scope(bits);
  const Real two_pi = Real::pi(bits) * 2;
  // q = exp(2 pi i z0)
  Real mag = exp(-(two_pi * z0.im));
  Real ang = two_pi * z0.re;
  Complex q(mag * cos(ang), mag * sin(ang));
  PrecisionContext tctx = PrecisionContext::with_bits(series_bits);
  const long m = truncation_order(tctx, z0.im.to_double());
  auto& cache = SeriesCache::instance();
  const Complex b = horner(cache.get("E4", m), m, q);
  const Complex delta = q * horner(cache.get("delta", m), m, q);
  std::array<Complex, 4> out{Complex::with_precision(bits), Complex::with_precision(bits),
                             Complex::with_precision(bits), Complex::with_precision(bits)};
  const Complex b2 = b * b;
  out[0] = b2 * b / delta;
  if (order < 1) return out;
  const Complex c = horner(cache.get("E6", m), m, q);
  out[1] = -(b2 * c) / delta;
  if (order < 2) return out;
  const Complex a = horner(cache.get("E2", m), m, q);
  const Complex c2 = c * c;
  const Complex b4 = b2 * b2;
  Complex p2 = -(a * b2 * c) / 6 + b4 / 2 + (b * c2 * 2) / 3;
  out[2] = p2 / delta;
  if (order < 3) return out;
  Complex p3 = -(a * a * b2 * c) / 24 + (a * b4) / 4 + (a * b * c2) / 3 - (b2 * b * c * 95) / 72 - (c2 * c * 2) / 9;
  out[3] = p3 / delta;
  return out;
}

}  // namespace detail

/// j, j', j'', j''' at z (derivatives in z, all 2 pi i factors included).
/// `order` < 3 skips the higher derivatives (left as zero).
inline JJet jet(const HPoint& z, const PrecisionContext& ctx, int order = 3) {
  if (!z.upper()) return jet(z.conjugate(), ctx, order).conjugate();
  Reduction red = reduce_fundamental(z, ctx);
  const long bits = ctx.work_bits() + 16;
  PrecisionScope scope(bits);
  const Complex z0 = red.z0.value().at_precision(bits);
  auto d = detail::reduced_jet(z0, order, bits, ctx.work_bits());
  const Real two_pi = Real::pi(bits) * 2;
  const Complex tpi(Real::with_precision(bits), two_pi);  // 2 pi i
  JJet at0{d[0], d[1] * tpi, d[2] * tpi * tpi, d[3] * tpi * tpi * tpi};
  if (red.gamma.c == 0) {
    // Pure translation (gamma = +-T^n): derivatives are unchanged.
    return {at0.j.at_precision(ctx.work_bits()), at0.j1.at_precision(ctx.work_bits()),
            at0.j2.at_precision(ctx.work_bits()), at0.j3.at_precision(ctx.work_bits())};
  }
  const Real c(red.gamma.c);
  Complex u = z0 * c;
  u.re += red.gamma.d;  // c z0 + d
  const Complex gp = Complex(Real(1)) / (u * u);       // gamma'(z0)
  const Complex gpp = -(gp / u) * (c * 2);             // gamma''(z0)
  const Complex gppp = (gp * gp) * (c * c * 6);        // gamma'''(z0)
  JJet out;
  out.j = at0.j;
  out.j1 = at0.j1 / gp;
  out.j2 = (at0.j2 - out.j1 * gpp) / (gp * gp);
  out.j3 = (at0.j3 - out.j2 * gp * gpp * 3 - out.j1 * gppp) / (gp * gp * gp);
  const long wb = ctx.work_bits();
  return {out.j.at_precision(wb), out.j1.at_precision(wb), out.j2.at_precision(wb), out.j3.at_precision(wb)};
}

inline Complex j_value(const HPoint& z, const PrecisionContext& ctx) { return jet(z, ctx, 0).j; }

namespace detail {

/// (y0^2 - 1968 y0 + 2654208) / (2 y0^2 (y0 - 1728)^2)
inline Complex schwarz_coefficient(const Complex& y0) {
  Complex num = y0 * y0 - y0 * 1968 + 2654208;
  Complex s = y0 - 1728;
  return num / (y0 * y0 * s * s * 2);
}

inline void check_nondegenerate(const Complex& y0, const Complex& y1, const PrecisionContext& ctx) {
  const Real tol = ctx.tol();
  if (abs(y0) <= tol)
    fail(ErrorKind::domain, "j = 0: Psi is undefined at this point (the point is special)");
  if (abs(y0 - 1728) <= tol * 1728)
    fail(ErrorKind::domain, "j = 1728: Psi is undefined at this point (the point is special)");
  if (abs(y1) <= tol * (Real(1) + abs(y0)))
    fail(ErrorKind::domain, "j' = 0: Psi is undefined at this point (the point is special)");
}

}  // namespace detail

/// Psi(y0, y1, y2, y3) = y3/y1 - (3/2)(y2/y1)^2 + R(y0) y1^2; vanishes on
/// every jet of j.
inline Complex psi(const Complex& y0, const Complex& y1, const Complex& y2, const Complex& y3,
                   const PrecisionContext& ctx) {
  detail::check_nondegenerate(y0, y1, ctx);
  PrecisionScope scope(std::max(ctx.work_bits(), y0.precision()));
  Complex r = y2 / y1;
  return y3 / y1 - (r * r * 3) / 2 + detail::schwarz_coefficient(y0) * y1 * y1;
}

inline Complex psi(const JJet& jt, const PrecisionContext& ctx) { return psi(jt.j, jt.j1, jt.j2, jt.j3, ctx); }

/// j''' solved from Psi = 0: (3/2) y2^2 / y1 - R(y0) y1^3.
inline Complex eta_j3(const Complex& y0, const Complex& y1, const Complex& y2, const PrecisionContext& ctx) {
  detail::check_nondegenerate(y0, y1, ctx);
  PrecisionScope scope(std::max(ctx.work_bits(), y0.precision()));
  return (y2 * y2 * 3) / (y1 * 2) - detail::schwarz_coefficient(y0) * y1 * y1 * y1;
}

/// Whether Psi / eta are defined at this jet (axiom (e) exclusions).
inline bool jet_nondegenerate(const JJet& jt, const PrecisionContext& ctx) {
  try {
    detail::check_nondegenerate(jt.j, jt.j1, ctx);
    return true;
  } catch (const Error&) {
    return false;
  }
}

/// A point of the fundamental domain with j(z0) = v, found by Newton from
/// asymptotic guesses (q-inversion for large |v|, local expansions at rho
/// and i otherwise).
inline HPoint j_inverse(const Complex& v, const PrecisionContext& ctx) {
  const long wb = ctx.work_bits();
  PrecisionScope scope(wb);
  const Real pi = Real::pi(wb);
  const Complex two_pi_i(Real::with_precision(wb), pi * 2);
  const Complex vw = v.at_precision(wb);
  const Complex rho(Real(1) / 2, sqrt(Real(3)) / 2);
  const Complex ii(Real(0), Real(1));

  std::vector<Complex> guesses;
  {
    // 196884 q^2 + (744 - v) q + 1 = 0, small root.
    Complex bq = Complex(Real(744)) - vw;
    Complex disc = sqrt(bq * bq - Complex(Real(4 * 196884)));
    Complex r1 = (-bq + disc) / Real(2 * 196884);
    Complex r2 = (-bq - disc) / Real(2 * 196884);
    Complex qg = abs(r1) < abs(r2) ? r1 : r2;
    if (!qg.is_zero() && abs(qg) < Real(1)) guesses.push_back(log(qg) / two_pi_i);
  }
  {
    JJet at_rho = jet(HPoint(rho), ctx);
    Complex c3 = at_rho.j3 / 6;
    Complex t = vw / c3;
    // three cube roots of t
    Real r = cbrt(abs(t));
    Real th = arg(t);
    for (int k = 0; k < 3; ++k) {
      Real ang = (th + pi * 2 * k) / 3;
      guesses.push_back(rho + Complex(r * cos(ang), r * sin(ang)));
    }
  }
  {
    JJet at_i = jet(HPoint(ii), ctx);
    Complex c2 = at_i.j2 / 2;
    Complex s = sqrt((vw - 1728) / c2);
    guesses.push_back(ii + s);
    guesses.push_back(ii - s);
  }

  const Real tol = ctx.tol();
  const Real target = tol * (Real(1) + abs(vw));
  // keep polishing past the tolerance; Newton is quadratic there
  const Real fine = Real::pow2(-(ctx.bits - 8), wb) * (Real(1) + abs(vw));
  std::optional<HPoint> best;
  Real best_res = Real::with_precision(wb);
  for (const Complex& g0 : guesses) {
    if (!(g0.im > Real(1) / 64) || !g0.is_finite()) continue;
    Complex z = g0;
    JJet jt = jet(HPoint(z), ctx, 1);
    Real res = abs(jt.j - vw);
    for (int it = 0; it < 200 && res > fine; ++it) {
      if (jt.j1.is_zero()) break;
      Complex step = (jt.j - vw) / jt.j1;
      Real damp(1);
      bool moved = false;
      for (int h = 0; h < 40; ++h) {
        Complex cand = z - step * damp;
        if (cand.im.sign() > 0 && cand.is_finite()) {
          HPoint cp = reduce_fundamental(HPoint(cand), ctx).z0;
          JJet cj = jet(cp, ctx, 1);
          Real cres = abs(cj.j - vw);
          if (cres < res) {
            z = cp.value();
            jt = std::move(cj);
            res = cres;
            moved = true;
            break;
          }
        }
        damp /= 2;
      }
      if (!moved) break;
    }
    if (!best || res < best_res) {
      best = reduce_fundamental(HPoint(z), ctx).z0;
      best_res = res;
    }
    if (res <= target) break;
  }
  if (!best || best_res > target)
    fail(ErrorKind::numeric_instability, "could not invert j at " + to_string(v, 20));
  return *best;
}

}  // namespace jmod
