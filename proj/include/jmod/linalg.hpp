#pragma once

// Small dense complex linear algebra at arbitrary precision: LU solves,
// determinants and singular values (one-sided Jacobi). Sizes here are tiny
// (Jacobians of desk-scale systems), so clarity wins over blocking.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "jmod/real.hpp"

namespace jmod {

class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols, long bits)
      : rows_(rows), cols_(cols), data_(rows * cols, Complex::with_precision(bits)) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  Complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

struct LuResult {
  CMatrix lu;
  std::vector<std::size_t> perm;
  int sign = 1;
  bool singular = false;
};

/// Partial-pivoting LU of a square matrix. A pivot that is exactly zero marks
/// the factorization singular.
inline LuResult lu_decompose(CMatrix a) {
  const std::size_t n = a.rows();
  LuResult out;
  out.perm.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.perm[i] = i;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    Real best = norm(a(k, k));
    for (std::size_t r = k + 1; r < n; ++r) {
      Real m = norm(a(r, k));
      if (m > best) { best = m; piv = r; }
    }
    if (best.is_zero()) { out.singular = true; continue; }
    if (piv != k) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a(k, c), a(piv, c));
      std::swap(out.perm[k], out.perm[piv]);
      out.sign = -out.sign;
    }
    for (std::size_t r = k + 1; r < n; ++r) {
      Complex f = a(r, k) / a(k, k);
      a(r, k) = f;
      for (std::size_t c = k + 1; c < n; ++c) a(r, c) -= f * a(k, c);
    }
  }
  out.lu = std::move(a);
  return out;
}

inline Complex determinant(const CMatrix& a) {
  if (a.rows() == 0) return Complex(1);
  LuResult f = lu_decompose(a);
  Complex det(Real::with_precision(a(0, 0).precision()) + f.sign);
  if (f.singular) return Complex::with_precision(a(0, 0).precision());
  for (std::size_t i = 0; i < a.rows(); ++i) det *= f.lu(i, i);
  return det;
}

/// Solves with an existing factorization (which must not be singular).
inline std::vector<Complex> lu_solve(const LuResult& f, const std::vector<Complex>& b) {
  const std::size_t n = f.lu.rows();
  std::vector<Complex> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[f.perm[i]];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < i; ++k) x[i] -= f.lu(i, k) * x[k];
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k) x[i] -= f.lu(i, k) * x[k];
    x[i] = x[i] / f.lu(i, i);
  }
  return x;
}

/// Solves a x = b; nullopt when the matrix is singular.
inline std::optional<std::vector<Complex>> lu_solve(const CMatrix& a, const std::vector<Complex>& b) {
  LuResult f = lu_decompose(a);
  if (f.singular) return std::nullopt;
  return lu_solve(f, b);
}

/// Singular values in decreasing order (one-sided Hestenes-Jacobi on the
/// columns; the phase of each column pair is rotated out first so the plane
/// rotation is real).
inline std::vector<Real> singular_values(CMatrix a) {
  std::size_t m = a.rows(), n = a.cols();
  if (m == 0 || n == 0) return {};
  if (n > m) {
    CMatrix t(n, m, a(0, 0).precision());
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < n; ++c) t(c, r) = conj(a(r, c));
    a = std::move(t);
    std::swap(m, n);
  }
  const long bits = a(0, 0).precision();
  const Real eps = Real::pow2(-bits + 4, bits);
  for (int sweep = 0; sweep < 80; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        Real alpha = Real::with_precision(bits), beta = Real::with_precision(bits);
        Complex gamma = Complex::with_precision(bits);
        for (std::size_t r = 0; r < m; ++r) {
          alpha += norm(a(r, p));
          beta += norm(a(r, q));
          gamma += conj(a(r, p)) * a(r, q);
        }
        Real g = abs(gamma);
        if (g.is_zero() || g <= eps * sqrt(alpha * beta)) continue;
        rotated = true;
        Complex phase = gamma / g;  // unit; a_q * conj(phase) makes <a_p, a_q> real
        Complex unphase = conj(phase);
        Real zeta = (beta - alpha) / (g * 2);
        Real t = Real(1) / (abs(zeta) + sqrt(zeta * zeta + 1));
        if (zeta.sign() < 0) t = -t;
        Real c = Real(1) / sqrt(t * t + 1);
        Real s = c * t;
        for (std::size_t r = 0; r < m; ++r) {
          Complex ap = a(r, p);
          Complex aq = a(r, q) * unphase;
          a(r, p) = ap * c - aq * s;
          a(r, q) = ap * s + aq * c;
        }
      }
    }
    if (!rotated) break;
  }
  std::vector<Real> sv;
  sv.reserve(n);
  for (std::size_t c = 0; c < n; ++c) {
    Real s = Real::with_precision(bits);
    for (std::size_t r = 0; r < m; ++r) s += norm(a(r, c));
    sv.push_back(sqrt(s));
  }
  std::sort(sv.begin(), sv.end(), [](const Real& x, const Real& y) { return x > y; });
  return sv;
}

/// Number of singular values above `rel_threshold` times the largest one.
/// Rows are normalized to unit length first so that ill-scaled relations are
/// compared on an equal footing.
inline std::size_t numerical_rank(CMatrix a, const Real& rel_threshold) {
  if (a.rows() == 0 || a.cols() == 0) return 0;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    Real s = Real::with_precision(a(0, 0).precision());
    for (std::size_t c = 0; c < a.cols(); ++c) s += norm(a(r, c));
    if (s.is_zero()) continue;
    s = sqrt(s);
    for (std::size_t c = 0; c < a.cols(); ++c) a(r, c) /= s;
  }
  auto sv = singular_values(std::move(a));
  if (sv.empty() || sv.front().is_zero()) return 0;
  Real cut = sv.front() * rel_threshold;
  return static_cast<std::size_t>(std::count_if(sv.begin(), sv.end(), [&](const Real& s) { return s > cut; }));
}

}  // namespace jmod
