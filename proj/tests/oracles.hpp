#pragma once

// Reference computations for the tests, deliberately built differently from
// the library: Eisenstein series summed as Lambert series at z itself,
// derivatives from Ramanujan's system by Taylor recursion,
// plain Gaussian elimination, scalar Newton for the exp constants.

#include <array>
#include <map>
#include <vector>

#include "jmod/real.hpp"

namespace oracle {

using jmod::Complex;
using jmod::PrecisionScope;
using jmod::Real;

inline Complex cexp(const Complex& z) {
  Real m = exp(z.re);
  return {m * cos(z.im), m * sin(z.im)};
}

inline Complex two_pi_i(long bits) { return {Real::with_precision(bits), Real::pi(bits) * 2}; }

struct Eis {
  Complex e2, e4, e6;
};

/// E2, E4, E6 at z via sum n^(k-1) q^n / (1 - q^n).
inline Eis eisenstein(const Complex& z, long bits) {
  PrecisionScope s(bits);
  Complex q = cexp(two_pi_i(bits) * z.at_precision(bits));
  Complex s1 = Complex::with_precision(bits), s3 = s1, s5 = s1;
  Complex qn = q;
  const Real stop = Real::pow2(-bits - 40, bits);
  for (long n = 1;; ++n) {
    Complex t = qn / (Complex(Real(1)) - qn);
    Real nn(n);
    s1 += t * nn;
    s3 += t * (nn * nn * nn);
    s5 += t * (nn * nn * nn * nn * nn);
    if (abs(qn) * (nn * nn * nn * nn * nn) < stop) break;
    qn = qn * q;
  }
  return {Complex(Real(1)) - s1 * 24, Complex(Real(1)) + s3 * 240, Complex(Real(1)) - s5 * 504};
}

/// Truncated Taylor series, c[k] = k-th coefficient.
using Jet = std::array<Complex, 5>;

inline Jet jmul(const Jet& a, const Jet& b) {
  Jet r;
  for (auto& x : r) x = Complex::with_precision(a[0].precision());
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t k = 0; k <= i; ++k) r[i] += a[k] * b[i - k];
  return r;
}

inline Jet jdiv(const Jet& a, const Jet& b) {
  Jet r;
  for (std::size_t i = 0; i < r.size(); ++i) {
    Complex acc = a[i];
    for (std::size_t k = 1; k <= i; ++k) acc -= b[k] * r[i - k];
    r[i] = acc / b[0];
  }
  return r;
}

inline Jet jsub(Jet a, const Jet& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
  return a;
}

inline Jet jscale(Jet a, const Complex& s) {
  for (auto& x : a) x = x * s;
  return a;
}

/// j, j', j'', j''' at z (derivatives in z).
inline std::array<Complex, 4> j_jet(const Complex& z, long bits) {
  if (z.im.sign() < 0) {
    auto r = j_jet(conj(z), bits);
    for (auto& v : r) v = conj(v);
    return r;
  }
  const long wb = 2 * bits + 64;
  PrecisionScope s(wb);
  Eis e = eisenstein(z, wb);
  // Taylor coefficients in t where D = q d/dq; D E2 = (E2^2-E4)/12,
  // D E4 = (E2 E4 - E6)/3, D E6 = (E2 E6 - E4^2)/2
  Jet e2, e4, e6;
  for (std::size_t i = 0; i < e2.size(); ++i) e2[i] = e4[i] = e6[i] = Complex::with_precision(wb);
  e2[0] = e.e2;
  e4[0] = e.e4;
  e6[0] = e.e6;
  for (std::size_t k = 0; k + 1 < e2.size(); ++k) {
    Jet d2 = jscale(jsub(jmul(e2, e2), e4), Complex(Real(1)) / Complex(Real(12)));
    Jet d4 = jscale(jsub(jmul(e2, e4), e6), Complex(Real(1)) / Complex(Real(3)));
    Jet d6 = jscale(jsub(jmul(e2, e6), jmul(e4, e4)), Complex(Real(1)) / Complex(Real(2)));
    e2[k + 1] = d2[k] / static_cast<long>(k + 1);
    e4[k + 1] = d4[k] / static_cast<long>(k + 1);
    e6[k + 1] = d6[k] / static_cast<long>(k + 1);
  }
  Jet c = jmul(jmul(e4, e4), e4);
  Jet delta = jscale(jsub(c, jmul(e6, e6)), Complex(Real(1)) / Complex(Real(1728)));
  Jet j = jdiv(c, delta);
  // d/dz = 2 pi i D, so d^k/dz^k = (2 pi i)^k k! c_k
  std::array<Complex, 4> out;
  Complex f = Complex(Real(1));
  long fact = 1;
  for (int k = 0; k < 4; ++k) {
    if (k > 0) {
      f = f * two_pi_i(wb);
      fact *= k;
    }
    out[static_cast<std::size_t>(k)] = (j[static_cast<std::size_t>(k)] * f * fact).at_precision(bits);
  }
  return out;
}

/// Lower half-plane by reflection; small Im moved up by T and S first.
inline Complex j(const Complex& z0, long bits) {
  const long wb = 2 * bits + 64;
  PrecisionScope s(wb);
  if (z0.im.sign() < 0) return conj(j(conj(z0), bits));
  Complex z = z0.at_precision(wb);
  while (z.im < Real(0.5)) {
    z.re -= round(z.re);
    if (norm(z) < Real(1)) z = Complex(Real(-1)) / z;
    else break;
  }
  Eis e = eisenstein(z, wb);
  Complex c = e.e4 * e.e4 * e.e4;
  return (c * 1728 / (c - e.e6 * e.e6)).at_precision(bits);
}

/// Rank by partial-pivot Gaussian elimination after scaling rows to unit length.
inline long rank(std::vector<std::vector<Complex>> a, const Real& cut, bool normalize = true) {
  if (a.empty() || a[0].empty()) return 0;
  if (normalize)
    for (auto& r : a) {
      Real s(0);
      for (auto& v : r) s += norm(v);
      if (s > 0) {
        s = sqrt(s);
        for (auto& v : r) v /= s;
      }
    }
  const std::size_t rows = a.size(), cols = a[0].size();
  std::size_t row = 0;
  for (std::size_t c = 0; c < cols && row < rows; ++c) {
    std::size_t piv = row;
    for (std::size_t r = row + 1; r < rows; ++r)
      if (abs(a[r][c]) > abs(a[piv][c])) piv = r;
    if (!(abs(a[piv][c]) > cut)) continue;
    std::swap(a[piv], a[row]);
    for (std::size_t r = row + 1; r < rows; ++r) {
      Complex f = a[r][c] / a[row][c];
      for (std::size_t k = c; k < cols; ++k) a[r][k] -= f * a[row][k];
    }
    ++row;
  }
  return static_cast<long>(row);
}

/// Newton on a scalar analytic function given with its derivative.
template <class F, class DF>
Complex newton(F f, DF df, Complex z, long bits, int iters = 200) {
  PrecisionScope s(bits);
  for (int k = 0; k < iters; ++k) z = z - f(z) / df(z);
  return z;
}

/// Psi(j, j', j'', j''') = S(j) + R(j) j'^2 with the Schwarzian S.
inline Complex psi(const std::array<Complex, 4>& y) {
  Complex r = y[2] / y[1];
  Complex schwarz = y[3] / y[1] - r * r * Real(3) / Real(2);
  Complex j = y[0];
  Complex num = j * j - j * 1968 + 2654208L;
  Complex den = j * j * (j - 1728) * (j - 1728) * 2;
  return schwarz + num / den * y[1] * y[1];
}

/// The classical level-2 modular polynomial, (i, j) -> coefficient of X^i Y^j.
inline std::map<std::pair<long, long>, mpz_class> phi2() {
  std::map<std::pair<long, long>, mpz_class> m;
  m[{3, 0}] = 1;
  m[{0, 3}] = 1;
  m[{2, 2}] = -1;
  m[{2, 1}] = 1488;
  m[{1, 2}] = 1488;
  m[{2, 0}] = -162000;
  m[{0, 2}] = -162000;
  m[{1, 1}] = 40773375;
  m[{1, 0}] = mpz_class("8748000000");
  m[{0, 1}] = mpz_class("8748000000");
  m[{0, 0}] = mpz_class("-157464000000000");
  return m;
}

}  // namespace oracle
