#pragma once

// Integer-relation detection by lattice reduction, and minimal-polynomial
// recognition built on it.
//
// Lattice: for values v_1..v_n the basis rows are (e_i | round(C Re v_i),
// round(C Im v_i)) with C = 2^(7 bits/8) / max|v|, reduced with the
// all-integer LLL variant (Lovasz constant 99/100). A reduced row is accepted
// as a relation only when
//   * its coefficients are bounded by the height bound,
//   * |sum c_i v_i| <= tol * sum |c_i v_i|                (scaled residual),
//   * |sum c_i v_i| <= 2^(-15 bits/16) * sum |c_i v_i|    (significance gate).
// The second gate sits between the lattice resolution 2^(-7 bits/8), which is
// where LLL manufactures spurious short vectors, and the accuracy of the
// inputs. Results are one-sided: "none" never proves independence.

#include <gmpxx.h>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "jmod/context.hpp"
#include "jmod/error.hpp"
#include "jmod/real.hpp"

namespace jmod {

struct IntRelation {
  std::vector<mpz_class> coeffs;
  Real residual;
};

/// Dense integer polynomial, coeffs[k] multiplies X^k.
struct IntPoly {
  std::vector<mpz_class> coeffs;

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }

  Complex eval(const Complex& x) const {
    Complex acc = Complex::with_precision(x.precision());
    for (std::size_t k = coeffs.size(); k-- > 0;) {
      acc = acc * x;
      acc.re += coeffs[k];
    }
    return acc;
  }

  std::string to_string() const {
    std::string out;
    for (std::size_t k = coeffs.size(); k-- > 0;) {
      const mpz_class& c = coeffs[k];
      if (c == 0) continue;
      mpz_class mag = abs(c);
      bool neg = c < 0;
      if (out.empty())
        out += neg ? "-" : "";
      else
        out += neg ? " - " : " + ";
      bool show_coeff = k == 0 || mag != 1;
      if (show_coeff) out += mag.get_str();
      if (k >= 1) out += (show_coeff ? "*X" : "X");
      if (k >= 2) out += "^" + std::to_string(k);
    }
    return out.empty() ? "0" : out;
  }

  friend bool operator==(const IntPoly&, const IntPoly&) = default;
};

namespace detail {

inline mpz_class round_div(const mpz_class& num, const mpz_class& den) {
  // den > 0; nearest integer, ties towards +inf.
  mpz_class q;
  mpz_class twice = 2 * num + den;
  mpz_class d2 = 2 * den;
  mpz_fdiv_q(q.get_mpz_t(), twice.get_mpz_t(), d2.get_mpz_t());
  return q;
}

/// All-integer LLL (Cohen, Algorithm 2.6.7) with Lovasz constant 99/100.
/// Rows of `basis` must be linearly independent.
inline void lll_reduce(std::vector<std::vector<mpz_class>>& basis) {
  const std::size_t n = basis.size();
  if (n < 2) return;
  const std::size_t dim = basis[0].size();
  auto dot = [dim](const std::vector<mpz_class>& a, const std::vector<mpz_class>& b) {
    mpz_class s = 0;
    for (std::size_t i = 0; i < dim; ++i) s += a[i] * b[i];
    return s;
  };
  // 1-based bookkeeping, as in the reference algorithm.
  std::vector<std::vector<mpz_class>> b(n + 1);
  for (std::size_t i = 0; i < n; ++i) b[i + 1] = basis[i];
  std::vector<mpz_class> d(n + 1, 0);
  std::vector<std::vector<mpz_class>> lam(n + 1, std::vector<mpz_class>(n + 1, 0));

  auto red = [&](std::size_t k, std::size_t l) {
    mpz_class two_l = 2 * lam[k][l];
    if (abs(two_l) > d[l]) {
      mpz_class q = round_div(lam[k][l], d[l]);
      for (std::size_t i = 0; i < dim; ++i) b[k][i] -= q * b[l][i];
      lam[k][l] -= q * d[l];
      for (std::size_t i = 1; i < l; ++i) lam[k][i] -= q * lam[l][i];
    }
  };

  std::size_t kmax = 1;
  d[0] = 1;
  d[1] = dot(b[1], b[1]);
  std::size_t k = 2;
  std::size_t guard = 0;
  while (k <= n) {
    if (++guard > 10'000'000) fail(ErrorKind::numeric_instability, "lattice reduction did not terminate");
    if (k > kmax) {
      kmax = k;
      for (std::size_t j = 1; j <= k; ++j) {
        mpz_class u = dot(b[k], b[j]);
        for (std::size_t i = 1; i < j; ++i) {
          u = d[i] * u - lam[k][i] * lam[j][i];
          mpz_divexact(u.get_mpz_t(), u.get_mpz_t(), d[i - 1].get_mpz_t());
        }
        if (j < k) {
          lam[k][j] = u;
        } else {
          d[k] = u;
          if (u == 0) fail(ErrorKind::invalid_argument, "lattice basis is linearly dependent");
        }
      }
    }
    red(k, k - 1);
    mpz_class lhs = 100 * d[k] * d[k - 2];
    mpz_class rhs = 99 * d[k - 1] * d[k - 1] - 100 * lam[k][k - 1] * lam[k][k - 1];
    if (lhs < rhs) {
      std::swap(b[k], b[k - 1]);
      for (std::size_t j = 1; j + 2 <= k; ++j) std::swap(lam[k][j], lam[k - 1][j]);
      mpz_class lm = lam[k][k - 1];
      mpz_class big = (d[k - 2] * d[k] + lm * lm);
      mpz_divexact(big.get_mpz_t(), big.get_mpz_t(), d[k - 1].get_mpz_t());
      for (std::size_t i = k + 1; i <= kmax; ++i) {
        mpz_class t = lam[i][k];
        mpz_class nk = d[k] * lam[i][k - 1] - lm * t;
        mpz_divexact(nk.get_mpz_t(), nk.get_mpz_t(), d[k - 1].get_mpz_t());
        lam[i][k] = nk;
        mpz_class nk1 = big * t + lm * lam[i][k];
        mpz_divexact(nk1.get_mpz_t(), nk1.get_mpz_t(), d[k].get_mpz_t());
        lam[i][k - 1] = nk1;
      }
      d[k - 1] = big;
      if (k > 2) --k;
    } else {
      for (std::size_t l = k - 1; l-- > 1;) red(k, l);
      ++k;
    }
  }
  for (std::size_t i = 0; i < n; ++i) basis[i] = std::move(b[i + 1]);
}

inline void normalize_sign_last_positive(std::vector<mpz_class>& c) {
  for (std::size_t i = c.size(); i-- > 0;) {
    if (c[i] == 0) continue;
    if (c[i] < 0)
      for (auto& x : c) x = -x;
    return;
  }
}

inline mpz_class height_of(const std::vector<mpz_class>& c) {
  mpz_class h = 0;
  for (const auto& x : c) h = std::max(h, mpz_class(abs(x)));
  return h;
}

inline std::optional<IntRelation> relation_search(const std::vector<Complex>& values, const PrecisionContext& ctx,
                                                  const mpz_class& height_cap) {
  ctx.validate();
  if (values.empty()) fail(ErrorKind::invalid_argument, "integer_relation needs at least one value");
  for (const auto& v : values)
    if (!v.is_finite()) fail(ErrorKind::invalid_argument, "integer_relation input is not finite");

  const long wb = ctx.work_bits();
  const Real tol = ctx.tol();
  const Real gate = Real::pow2(-(ctx.bits - ctx.bits / 16), wb);
  const std::size_t n = values.size();

  auto evaluate = [&](const std::vector<mpz_class>& c) -> std::pair<Real, Real> {
    Complex sum = Complex::with_precision(wb);
    Real scale = Real::with_precision(wb);
    for (std::size_t i = 0; i < n; ++i) {
      Complex term = values[i].at_precision(wb) * Real(c[i]);
      sum += term;
      scale += abs(term);
    }
    return {abs(sum), scale};
  };
  auto accept = [&](const std::vector<mpz_class>& c) -> std::optional<IntRelation> {
    bool nonzero = std::any_of(c.begin(), c.end(), [](const mpz_class& x) { return x != 0; });
    if (!nonzero || height_of(c) > height_cap) return std::nullopt;
    auto [res, scale] = evaluate(c);
    if (res > tol * scale || res > gate * scale) return std::nullopt;
    return IntRelation{c, res};
  };

  if (n == 1) {
    std::vector<mpz_class> c{1};
    if (values[0].is_zero() || abs(values[0]) <= tol) return IntRelation{c, abs(values[0])};
    return std::nullopt;
  }

  PrecisionScope scope(wb);
  Real vmax = Real::with_precision(wb);
  bool any_imag = false;
  for (const auto& v : values) {
    vmax = max(vmax, max(abs(v.re), abs(v.im)));
    if (!v.im.is_zero()) any_imag = true;
  }
  // Exact zeros among the inputs give immediate unit relations.
  for (std::size_t i = 0; i < n; ++i) {
    if (values[i].is_zero()) {
      std::vector<mpz_class> c(n, 0);
      c[i] = 1;
      return IntRelation{c, Real::with_precision(wb)};
    }
  }
  const long lattice_bits = ctx.bits - ctx.bits / 8;
  Real scale = Real::pow2(lattice_bits - vmax.exponent(), wb);
  const std::size_t dim = n + (any_imag ? 2 : 1);
  std::vector<std::vector<mpz_class>> basis(n, std::vector<mpz_class>(dim, 0));
  for (std::size_t i = 0; i < n; ++i) {
    basis[i][i] = 1;
    basis[i][n] = (values[i].re * scale).round_to_mpz();
    if (any_imag) basis[i][n + 1] = (values[i].im * scale).round_to_mpz();
  }
  lll_reduce(basis);

  std::optional<IntRelation> best;
  mpz_class best_h;
  for (const auto& row : basis) {
    std::vector<mpz_class> c(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(n));
    normalize_sign_last_positive(c);
    auto rel = accept(c);
    if (!rel) continue;
    mpz_class h = height_of(rel->coeffs);
    if (!best || h < best_h) {
      best = std::move(rel);
      best_h = h;
    }
  }
  return best;
}

}  // namespace detail

/// Searches for integers c (not all zero, |c_i| <= height_bound) with
/// sum c_i v_i = 0. The returned relation has its last nonzero coefficient
/// positive.
inline std::optional<IntRelation> integer_relation(const std::vector<Real>& values, const PrecisionContext& ctx) {
  std::vector<Complex> cv;
  cv.reserve(values.size());
  for (const auto& v : values) cv.emplace_back(v);
  return detail::relation_search(cv, ctx, mpz_class(ctx.height_bound));
}

/// Complex variant: real and imaginary parts are constrained simultaneously.
inline std::optional<IntRelation> integer_relation(const std::vector<Complex>& values, const PrecisionContext& ctx) {
  return detail::relation_search(values, ctx, mpz_class(ctx.height_bound));
}

/// Coefficient cap used for minimal polynomials: the context height bound or
/// 2^(bits/4), whichever is larger (singular moduli have large constant terms).
inline mpz_class min_poly_height_cap(const PrecisionContext& ctx) {
  mpz_class cap(ctx.height_bound);
  mpz_class pw = 1;
  pw <<= static_cast<mp_bitcnt_t>(ctx.bits / 4);
  return std::max(cap, pw);
}

/// Lowest-degree integer polynomial (degree <= degree_bound) vanishing at x
/// to within tol; primitive with positive leading coefficient.
inline std::optional<IntPoly> min_poly_guess(const Complex& x, int degree_bound, const PrecisionContext& ctx) {
  if (degree_bound < 1) fail(ErrorKind::invalid_argument, "degree bound must be >= 1");
  if (!x.is_finite()) fail(ErrorKind::invalid_argument, "min_poly_guess input is not finite");
  const long wb = ctx.work_bits();
  PrecisionScope scope(wb);
  const Complex xw = x.at_precision(wb);
  if (abs(xw) <= ctx.tol()) return IntPoly{{0, 1}};
  const mpz_class cap = min_poly_height_cap(ctx);
  std::vector<Complex> powers{Complex(Real(1), Real(0))};
  for (int d = 1; d <= degree_bound; ++d) {
    powers.push_back(powers.back() * xw);
    auto rel = detail::relation_search(powers, ctx, cap);
    if (!rel || rel->coeffs.back() == 0) continue;
    IntPoly p{rel->coeffs};
    mpz_class g = 0;
    for (const auto& c : p.coeffs) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_mpz_t());
    if (g > 1)
      for (auto& c : p.coeffs) mpz_divexact(c.get_mpz_t(), c.get_mpz_t(), g.get_mpz_t());
    if (p.coeffs.back() < 0)
      for (auto& c : p.coeffs) c = -c;
    if (abs(p.eval(xw)) <= ctx.tol()) return p;
  }
  return std::nullopt;
}

inline std::optional<IntPoly> min_poly_guess(const Real& x, int degree_bound, const PrecisionContext& ctx) {
  return min_poly_guess(Complex(x), degree_bound, ctx);
}

}  // namespace jmod
