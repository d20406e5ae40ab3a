#pragma once

// Arbitrary-precision real and complex scalars on top of MPFR.
//
// Every Real carries its own mantissa precision in bits. Binary operations
// produce a result at the larger of the two operand precisions; values built
// from integers, doubles or strings use the thread's default precision, which
// PrecisionScope adjusts. All rounding is to nearest.

#include <mpfr.h>
#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <compare>
#include <concepts>
#include <cstdint>
#include <ostream>
#include <string>
#include <utility>

#include "jmod/error.hpp"

namespace jmod {

namespace detail {
inline thread_local long default_bits = 256;
}

inline long default_precision() noexcept { return detail::default_bits; }

class PrecisionScope {
 public:
  explicit PrecisionScope(long bits) : saved_(detail::default_bits) {
    detail::default_bits = std::max<long>(bits, MPFR_PREC_MIN);
  }
  ~PrecisionScope() { detail::default_bits = saved_; }
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  long saved_;
};

class Real {
 public:
  Real() { init(detail::default_bits); mpfr_set_zero(v_, 1); }

  template <std::integral I>
  Real(I value) {  // NOLINT: implicit by design of arithmetic code
    init(detail::default_bits);
    if constexpr (std::is_signed_v<I>)
      mpfr_set_si(v_, static_cast<long>(value), MPFR_RNDN);
    else
      mpfr_set_ui(v_, static_cast<unsigned long>(value), MPFR_RNDN);
  }

  explicit Real(double value) {
    init(detail::default_bits);
    mpfr_set_d(v_, value, MPFR_RNDN);
  }

  explicit Real(const mpz_class& value) {
    init(detail::default_bits);
    mpfr_set_z(v_, value.get_mpz_t(), MPFR_RNDN);
  }

  explicit Real(const mpq_class& value) {
    init(detail::default_bits);
    mpfr_set_q(v_, value.get_mpq_t(), MPFR_RNDN);
  }

  Real(const Real& other) {
    init(mpfr_get_prec(other.v_));
    mpfr_set(v_, other.v_, MPFR_RNDN);
  }

  Real(Real&& other) noexcept {
    mpfr_init2(v_, MPFR_PREC_MIN);
    mpfr_swap(v_, other.v_);
  }

  Real& operator=(const Real& other) {
    if (this != &other) {
      mpfr_set_prec(v_, mpfr_get_prec(other.v_));
      mpfr_set(v_, other.v_, MPFR_RNDN);
    }
    return *this;
  }

  Real& operator=(Real&& other) noexcept {
    mpfr_swap(v_, other.v_);
    return *this;
  }

  ~Real() { mpfr_clear(v_); }

  static Real with_precision(long bits) {
    Real r(Tag{}, bits);
    mpfr_set_zero(r.v_, 1);
    return r;
  }

  /// Parses a decimal (or "inf"/"nan") literal. Throws parse on garbage.
  static Real from_string(const std::string& text, long bits = detail::default_bits) {
    Real r(Tag{}, bits);
    char* end = nullptr;
    if (mpfr_strtofr(r.v_, text.c_str(), &end, 10, MPFR_RNDN), end == text.c_str() || *end != '\0')
      fail(ErrorKind::parse, "not a real number: '" + text + "'");
    return r;
  }

  static Real pi(long bits = detail::default_bits) {
    Real r(Tag{}, bits);
    mpfr_const_pi(r.v_, MPFR_RNDN);
    return r;
  }

  static Real log2_const(long bits = detail::default_bits) {
    Real r(Tag{}, bits);
    mpfr_const_log2(r.v_, MPFR_RNDN);
    return r;
  }

  /// 2^e exactly.
  static Real pow2(long e, long bits = detail::default_bits) {
    Real r(Tag{}, bits);
    mpfr_set_ui_2exp(r.v_, 1, e, MPFR_RNDN);
    return r;
  }

  long precision() const noexcept { return static_cast<long>(mpfr_get_prec(v_)); }

  /// Rounds the value to a new precision in place.
  void set_precision(long bits) { mpfr_prec_round(v_, bits, MPFR_RNDN); }
  Real at_precision(long bits) const {
    Real r(Tag{}, bits);
    mpfr_set(r.v_, v_, MPFR_RNDN);
    return r;
  }

  mpfr_srcptr get() const noexcept { return v_; }
  mpfr_ptr get() noexcept { return v_; }

  bool is_zero() const noexcept { return mpfr_zero_p(v_) != 0; }
  bool is_finite() const noexcept { return mpfr_number_p(v_) != 0; }
  int sign() const noexcept { return mpfr_sgn(v_); }
  /// Binary exponent e with 0.5 <= |x| / 2^e < 1; very negative for zero.
  long exponent() const noexcept {
    return is_zero() ? -(1L << 40) : static_cast<long>(mpfr_get_exp(v_));
  }

  double to_double() const noexcept { return mpfr_get_d(v_, MPFR_RNDN); }

  /// Exact binary value as a rational.
  mpq_class to_mpq() const {
    if (!is_finite()) fail(ErrorKind::invalid_argument, "non-finite value has no rational form");
    mpz_class m;
    mpfr_exp_t e = mpfr_get_z_2exp(m.get_mpz_t(), v_);
    mpq_class q(m);
    if (e >= 0)
      mpq_mul_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<unsigned long>(e));
    else
      mpq_div_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<unsigned long>(-e));
    q.canonicalize();
    return q;
  }

  /// Nearest integer, ties away from zero.
  mpz_class round_to_mpz() const {
    if (!is_finite()) fail(ErrorKind::invalid_argument, "cannot round a non-finite value");
    mpz_class z;
    mpfr_get_z(z.get_mpz_t(), v_, MPFR_RNDNA);
    return z;
  }

  /// Decimal string with `digits` significant digits ("0" for zero).
  std::string to_string(int digits = 0) const {
    if (is_zero()) return "0";
    if (!is_finite()) return mpfr_nan_p(v_) ? "nan" : (sign() > 0 ? "inf" : "-inf");
    if (digits <= 0)
      digits = static_cast<int>(std::ceil(static_cast<double>(precision()) * 0.30102999566398120)) + 1;
    mpfr_exp_t exp10 = 0;
    char* raw = mpfr_get_str(nullptr, &exp10, 10, static_cast<size_t>(digits), v_, MPFR_RNDN);
    std::string mant(raw);
    mpfr_free_str(raw);
    bool neg = !mant.empty() && mant[0] == '-';
    if (neg) mant.erase(0, 1);
    // Plain notation for moderate exponents, scientific otherwise.
    std::string out;
    if (exp10 > 0 && exp10 <= 64) {
      if (static_cast<size_t>(exp10) >= mant.size()) {
        out = mant + std::string(static_cast<size_t>(exp10) - mant.size(), '0');
      } else {
        out = mant.substr(0, static_cast<size_t>(exp10)) + "." + mant.substr(static_cast<size_t>(exp10));
      }
    } else if (exp10 <= 0 && exp10 > -16) {
      out = "0." + std::string(static_cast<size_t>(-exp10), '0') + mant;
    } else {
      out = mant.substr(0, 1) + "." + mant.substr(1) + "e" + std::to_string(static_cast<long>(exp10) - 1);
    }
    if (auto dot = out.find('.'); dot != std::string::npos) {
      auto epos = out.find('e');
      std::string tail = epos == std::string::npos ? "" : out.substr(epos);
      std::string body = epos == std::string::npos ? out : out.substr(0, epos);
      while (!body.empty() && body.back() == '0') body.pop_back();
      if (!body.empty() && body.back() == '.') body.pop_back();
      out = body + tail;
    }
    return neg ? "-" + out : out;
  }

  Real operator-() const {
    Real r(Tag{}, precision());
    mpfr_neg(r.v_, v_, MPFR_RNDN);
    return r;
  }

  Real& operator+=(const Real& o) { return bin_assign(o, mpfr_add); }
  Real& operator-=(const Real& o) { return bin_assign(o, mpfr_sub); }
  Real& operator*=(const Real& o) { return bin_assign(o, mpfr_mul); }
  Real& operator/=(const Real& o) { return bin_assign(o, mpfr_div); }

  Real& operator+=(long o) { mpfr_add_si(v_, v_, o, MPFR_RNDN); return *this; }
  Real& operator-=(long o) { mpfr_sub_si(v_, v_, o, MPFR_RNDN); return *this; }
  Real& operator*=(long o) { mpfr_mul_si(v_, v_, o, MPFR_RNDN); return *this; }
  Real& operator/=(long o) { mpfr_div_si(v_, v_, o, MPFR_RNDN); return *this; }
  Real& operator+=(const mpz_class& o) { mpfr_add_z(v_, v_, o.get_mpz_t(), MPFR_RNDN); return *this; }
  Real& operator-=(const mpz_class& o) { mpfr_sub_z(v_, v_, o.get_mpz_t(), MPFR_RNDN); return *this; }
  Real& operator*=(const mpz_class& o) { mpfr_mul_z(v_, v_, o.get_mpz_t(), MPFR_RNDN); return *this; }
  Real& operator+=(const mpq_class& o) { mpfr_add_q(v_, v_, o.get_mpq_t(), MPFR_RNDN); return *this; }
  Real& operator-=(const mpq_class& o) { mpfr_sub_q(v_, v_, o.get_mpq_t(), MPFR_RNDN); return *this; }
  Real& operator*=(const mpq_class& o) { mpfr_mul_q(v_, v_, o.get_mpq_t(), MPFR_RNDN); return *this; }

  friend Real operator+(Real a, const Real& b) { return binary(a, b, mpfr_add); }
  friend Real operator-(Real a, const Real& b) { return binary(a, b, mpfr_sub); }
  friend Real operator*(Real a, const Real& b) { return binary(a, b, mpfr_mul); }
  friend Real operator/(Real a, const Real& b) { return binary(a, b, mpfr_div); }

  template <std::integral I> friend Real operator+(Real a, I b) { a += static_cast<long>(b); return a; }
  template <std::integral I> friend Real operator-(Real a, I b) { a -= static_cast<long>(b); return a; }
  template <std::integral I> friend Real operator*(Real a, I b) { a *= static_cast<long>(b); return a; }
  template <std::integral I> friend Real operator/(Real a, I b) { a /= static_cast<long>(b); return a; }
  template <std::integral I> friend Real operator+(I b, Real a) { a += static_cast<long>(b); return a; }
  template <std::integral I> friend Real operator*(I b, Real a) { a *= static_cast<long>(b); return a; }
  template <std::integral I> friend Real operator-(I b, Real a) {
    mpfr_si_sub(a.v_, static_cast<long>(b), a.v_, MPFR_RNDN);
    return a;
  }
  template <std::integral I> friend Real operator/(I b, Real a) {
    mpfr_si_div(a.v_, static_cast<long>(b), a.v_, MPFR_RNDN);
    return a;
  }

  friend bool operator==(const Real& a, const Real& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }
  friend std::partial_ordering operator<=>(const Real& a, const Real& b) {
    if (mpfr_unordered_p(a.v_, b.v_)) return std::partial_ordering::unordered;
    int c = mpfr_cmp(a.v_, b.v_);
    return c < 0 ? std::partial_ordering::less
                 : (c > 0 ? std::partial_ordering::greater : std::partial_ordering::equivalent);
  }
  template <std::integral I>
  friend bool operator==(const Real& a, I b) { return mpfr_cmp_si(a.v_, static_cast<long>(b)) == 0; }
  template <std::integral I>
  friend std::partial_ordering operator<=>(const Real& a, I b) {
    int c = mpfr_cmp_si(a.v_, static_cast<long>(b));
    return c < 0 ? std::partial_ordering::less
                 : (c > 0 ? std::partial_ordering::greater : std::partial_ordering::equivalent);
  }

  friend Real abs(Real a) { mpfr_abs(a.v_, a.v_, MPFR_RNDN); return a; }
  friend Real sqrt(Real a) { mpfr_sqrt(a.v_, a.v_, MPFR_RNDN); return a; }
  friend Real exp(Real a) { mpfr_exp(a.v_, a.v_, MPFR_RNDN); return a; }
  friend Real log(Real a) { mpfr_log(a.v_, a.v_, MPFR_RNDN); return a; }
  friend Real log2(Real a) { mpfr_log2(a.v_, a.v_, MPFR_RNDN); return a; }
  friend Real sin(Real a) { mpfr_sin(a.v_, a.v_, MPFR_RNDN); return a; }
  friend Real cos(Real a) { mpfr_cos(a.v_, a.v_, MPFR_RNDN); return a; }
  friend Real floor(Real a) { mpfr_floor(a.v_, a.v_); return a; }
  friend Real round(Real a) { mpfr_round(a.v_, a.v_); return a; }
  friend Real cbrt(Real a) { mpfr_cbrt(a.v_, a.v_, MPFR_RNDN); return a; }
  friend Real atan2(const Real& y, const Real& x) {
    Real r(Tag{}, std::max(y.precision(), x.precision()));
    mpfr_atan2(r.v_, y.v_, x.v_, MPFR_RNDN);
    return r;
  }
  friend Real hypot(const Real& x, const Real& y) {
    Real r(Tag{}, std::max(y.precision(), x.precision()));
    mpfr_hypot(r.v_, x.v_, y.v_, MPFR_RNDN);
    return r;
  }
  friend Real pow(Real a, long n) { mpfr_pow_si(a.v_, a.v_, n, MPFR_RNDN); return a; }
  friend Real pow(const Real& a, const Real& b) { return binary(Real(a), b, mpfr_pow); }
  friend Real ldexp(Real a, long e) { mpfr_mul_2si(a.v_, a.v_, e, MPFR_RNDN); return a; }
  friend Real max(const Real& a, const Real& b) { return a < b ? b : a; }
  friend Real min(const Real& a, const Real& b) { return b < a ? b : a; }

  friend std::ostream& operator<<(std::ostream& os, const Real& x) { return os << x.to_string(); }

 private:
  struct Tag {};
  Real(Tag, long bits) { init(bits); }

  void init(long bits) { mpfr_init2(v_, std::max<long>(bits, MPFR_PREC_MIN)); }

  using BinFn = int (*)(mpfr_ptr, mpfr_srcptr, mpfr_srcptr, mpfr_rnd_t);

  Real& bin_assign(const Real& o, BinFn fn) {
    if (o.precision() > precision()) mpfr_prec_round(v_, o.precision(), MPFR_RNDN);
    fn(v_, v_, o.v_, MPFR_RNDN);
    return *this;
  }

  static Real binary(Real a, const Real& b, BinFn fn) {
    if (b.precision() > a.precision()) mpfr_prec_round(a.v_, b.precision(), MPFR_RNDN);
    fn(a.v_, a.v_, b.v_, MPFR_RNDN);
    return a;
  }

  mpfr_t v_;
};

/// Complex number with Real parts; both parts share one precision.
struct Complex {
  Real re;
  Real im;

  Complex() = default;
  Complex(Real r) : re(std::move(r)), im(Real::with_precision(re.precision())) {}  // NOLINT
  Complex(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}
  template <std::integral I>
  Complex(I r) : re(r), im(0) {}  // NOLINT

  static Complex i_unit() { return {Real(0), Real(1)}; }
  static Complex with_precision(long bits) { return {Real::with_precision(bits), Real::with_precision(bits)}; }

  long precision() const noexcept { return std::max(re.precision(), im.precision()); }
  Complex at_precision(long bits) const { return {re.at_precision(bits), im.at_precision(bits)}; }

  bool is_finite() const noexcept { return re.is_finite() && im.is_finite(); }
  bool is_zero() const noexcept { return re.is_zero() && im.is_zero(); }

  Complex operator-() const { return {-re, -im}; }
  Complex& operator+=(const Complex& o) { re += o.re; im += o.im; return *this; }
  Complex& operator-=(const Complex& o) { re -= o.re; im -= o.im; return *this; }
  Complex& operator*=(const Complex& o) { *this = *this * o; return *this; }
  Complex& operator/=(const Complex& o) { *this = *this / o; return *this; }
  Complex& operator*=(const Real& o) { re *= o; im *= o; return *this; }
  Complex& operator/=(const Real& o) { re /= o; im /= o; return *this; }
  Complex& operator*=(long o) { re *= o; im *= o; return *this; }
  Complex& operator/=(long o) { re /= o; im /= o; return *this; }

  friend Complex operator+(Complex a, const Complex& b) { a += b; return a; }
  friend Complex operator-(Complex a, const Complex& b) { a -= b; return a; }
  friend Complex operator*(const Complex& a, const Complex& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend Complex operator/(const Complex& a, const Complex& b) {
    // Smith's algorithm keeps intermediate magnitudes bounded.
    if (abs(b.re) >= abs(b.im)) {
      Real r = b.im / b.re;
      Real den = b.re + b.im * r;
      return {(a.re + a.im * r) / den, (a.im - a.re * r) / den};
    }
    Real r = b.re / b.im;
    Real den = b.re * r + b.im;
    return {(a.re * r + a.im) / den, (a.im * r - a.re) / den};
  }
  friend Complex operator*(Complex a, const Real& b) { a *= b; return a; }
  friend Complex operator*(const Real& b, Complex a) { a *= b; return a; }
  friend Complex operator/(Complex a, const Real& b) { a /= b; return a; }
  template <std::integral I> friend Complex operator*(Complex a, I b) { a *= static_cast<long>(b); return a; }
  template <std::integral I> friend Complex operator*(I b, Complex a) { a *= static_cast<long>(b); return a; }
  template <std::integral I> friend Complex operator/(Complex a, I b) { a /= static_cast<long>(b); return a; }
  template <std::integral I> friend Complex operator+(Complex a, I b) { a.re += static_cast<long>(b); return a; }
  template <std::integral I> friend Complex operator-(Complex a, I b) { a.re -= static_cast<long>(b); return a; }

  friend bool operator==(const Complex& a, const Complex& b) { return a.re == b.re && a.im == b.im; }

  friend std::ostream& operator<<(std::ostream& os, const Complex& z) {
    return os << z.re << (z.im.sign() < 0 ? "-" : "+") << abs(z.im) << "i";
  }
};

inline Complex conj(const Complex& z) { return {z.re, -z.im}; }
inline Real norm(const Complex& z) { return z.re * z.re + z.im * z.im; }
inline Real abs(const Complex& z) { return hypot(z.re, z.im); }
inline Real arg(const Complex& z) { return atan2(z.im, z.re); }

inline Complex exp(const Complex& z) {
  Real m = exp(z.re);
  return {m * cos(z.im), m * sin(z.im)};
}

/// Principal branch.
inline Complex log(const Complex& z) { return {log(abs(z)), arg(z)}; }

/// Principal branch.
inline Complex sqrt(const Complex& z) {
  if (z.is_zero()) return z;
  Real m = abs(z);
  Real a = sqrt((m + abs(z.re)) / 2);
  if (z.re.sign() >= 0) return {a, z.im / (a * 2)};
  Real b = z.im.sign() < 0 ? -a : a;
  return {abs(z.im) / (a * 2), b};
}

inline Complex pow(Complex z, long n) {
  if (n < 0) return Complex(1) / pow(std::move(z), -n);
  Complex result(Real::with_precision(z.precision()) + 1, Real::with_precision(z.precision()));
  while (n > 0) {
    if (n & 1) result *= z;
    n >>= 1;
    if (n > 0) z = z * z;
  }
  return result;
}

inline Complex to_complex(const mpq_class& re, const mpq_class& im) { return {Real(re), Real(im)}; }

inline std::string to_string(const Complex& z, int digits = 0) {
  std::string re = z.re.to_string(digits);
  std::string im = abs(z.im).to_string(digits);
  return re + (z.im.sign() < 0 ? "-" : "+") + im + "i";
}

}  // namespace jmod
