#pragma once

// Formal j-polynomials: polynomials with Gaussian-rational coefficients in
// the generators X_k, J0(X_k) = j(X_k), J1(X_k) = j'(X_k), J2(X_k) = j''(X_k),
// optionally twisted by g in GL2(Q) (J_t(g X_k)). Derivatives may introduce
// J3 and, for twists with c != 0, W_g(X_k) = 1/(c X_k + d):
//
//   d/dX_k J_t(g X_k) = det(g) W_g^2 J_{t+1}(g X_k)
//   d/dX_k W_g(X_k)   = -c W_g^2
//
// A twisted bare variable g X_k is folded on construction:
//   c = 0:   (a X_k + b) / d
//   c != 0:  a/c - (det/c) W_g(X_k)
// so only J_t and W carry twists. Twists are stored primitive, with c > 0 or
// c = 0 and d > 0.

#include <gmpxx.h>

#include <array>
#include <cctype>
#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "jmod/context.hpp"
#include "jmod/error.hpp"
#include "jmod/halfplane.hpp"
#include "jmod/modular_forms.hpp"
#include "jmod/real.hpp"

namespace jmod {

/// a + b i with a, b rational.
struct GaussQ {
  mpq_class re{0}, im{0};

  GaussQ() = default;
  GaussQ(mpq_class r, mpq_class i = 0) : re(std::move(r)), im(std::move(i)) {}  // NOLINT
  GaussQ(long r) : re(r), im(0) {}  // NOLINT

  static GaussQ unit_i() { return {mpq_class(0), mpq_class(1)}; }

  bool is_zero() const { return re == 0 && im == 0; }
  bool is_real() const { return im == 0; }

  friend GaussQ operator+(const GaussQ& x, const GaussQ& y) { return {x.re + y.re, x.im + y.im}; }
  friend GaussQ operator-(const GaussQ& x, const GaussQ& y) { return {x.re - y.re, x.im - y.im}; }
  friend GaussQ operator*(const GaussQ& x, const GaussQ& y) {
    return {x.re * y.re - x.im * y.im, x.re * y.im + x.im * y.re};
  }
  friend GaussQ operator/(const GaussQ& x, const GaussQ& y) {
    if (y.is_zero()) fail(ErrorKind::invalid_argument, "division by zero");
    mpq_class den = y.re * y.re + y.im * y.im;
    return {(x.re * y.re + x.im * y.im) / den, (x.im * y.re - x.re * y.im) / den};
  }
  GaussQ operator-() const { return {-re, -im}; }
  friend bool operator==(const GaussQ& x, const GaussQ& y) { return x.re == y.re && x.im == y.im; }

  Complex to_complex(long bits) const {
    PrecisionScope scope(bits);
    return {Real(re), Real(im)};
  }

  std::string to_string() const {
    auto imag = [](const mpq_class& q) {
      if (q == 1) return std::string("i");
      if (q == -1) return std::string("-i");
      return q.get_str() + "*i";
    };
    if (im == 0) return re.get_str();
    if (re == 0) return imag(im);
    std::string s = imag(im);
    return "(" + re.get_str() + (s[0] == '-' ? s : "+" + s) + ")";
  }
};

enum class GenKind { X = 0, J0 = 1, J1 = 2, J2 = 3, J3 = 4, W = 5 };

/// One generator; `var` is the 1-based variable index.
struct Generator {
  GenKind kind = GenKind::X;
  long var = 1;
  mpz_class a{1}, b{0}, c{0}, d{1};  ///< twist, canonical

  bool twisted() const { return !(a == 1 && b == 0 && c == 0 && d == 1); }
  int order() const { return static_cast<int>(kind) - 1; }  ///< t for J_t
  bool is_j() const { return kind >= GenKind::J0 && kind <= GenKind::J3; }
  GL2Q twist() const { return {mpq_class(a), mpq_class(b), mpq_class(c), mpq_class(d)}; }

  friend bool operator==(const Generator& x, const Generator& y) {
    return x.kind == y.kind && x.var == y.var && x.a == y.a && x.b == y.b && x.c == y.c && x.d == y.d;
  }
  friend bool operator<(const Generator& x, const Generator& y) {
    if (x.var != y.var) return x.var < y.var;
    if (x.twisted() != y.twisted()) return !x.twisted();
    if (x.kind != y.kind) return x.kind < y.kind;
    for (auto [p, q] : {std::pair{&x.a, &y.a}, {&x.b, &y.b}, {&x.c, &y.c}, {&x.d, &y.d}})
      if (*p != *q) return *p < *q;
    return false;
  }

  std::string argument() const {
    std::string v = "X" + std::to_string(var);
    if (!twisted()) return v;
    return "[[" + a.get_str() + "," + b.get_str() + "],[" + c.get_str() + "," + d.get_str() + "]]*" + v;
  }

  std::string to_string() const {
    switch (kind) {
      case GenKind::X: return argument();
      case GenKind::J0: return "j(" + argument() + ")";
      case GenKind::J1: return "j1(" + argument() + ")";
      case GenKind::J2: return "j2(" + argument() + ")";
      case GenKind::J3: return "j3(" + argument() + ")";
      case GenKind::W: return "w(" + argument() + ")";
    }
    return "?";
  }
};

/// Primitive integer representative with c > 0, or c = 0 and d > 0.
inline std::array<mpz_class, 4> canonical_twist(const GL2Q& g) {
  PrimitiveIntMatrix p = red(g);
  if (p.c < 0 || (p.c == 0 && p.d < 0)) {
    p.a = -p.a;
    p.b = -p.b;
    p.c = -p.c;
    p.d = -p.d;
  }
  return {p.a, p.b, p.c, p.d};
}

inline mpq_class frac(const mpz_class& num, const mpz_class& den) {
  mpq_class q(num, den);
  q.canonicalize();
  return q;
}

using Monomial = std::map<Generator, long>;

inline long monomial_degree(const Monomial& m) {
  long d = 0;
  for (const auto& [g, e] : m) d += e;
  return d;
}

/// Higher total degree first; the constant term last.
struct TermOrder {
  bool operator()(const Monomial& x, const Monomial& y) const {
    long dx = monomial_degree(x), dy = monomial_degree(y);
    if (dx != dy) return dx > dy;
    return x < y;
  }
};

class JPoly {
 public:
  using Terms = std::map<Monomial, GaussQ, TermOrder>;

  JPoly() = default;
  JPoly(GaussQ c) { add_term({}, std::move(c)); }  // NOLINT
  JPoly(long c) : JPoly(GaussQ(c)) {}  // NOLINT

  static JPoly gen(const Generator& g) {
    JPoly p;
    p.add_term({{g, 1}}, GaussQ(1));
    return p;
  }
  static JPoly var(long k) { return gen(Generator{GenKind::X, k}); }
  /// J_t(X_k), t = 0..3.
  static JPoly j(int t, long k) { return gen(Generator{static_cast<GenKind>(t + 1), k}); }

  /// J_t(g X_k) with the twist canonicalized; t = -1 means the bare g X_k.
  static JPoly twisted(int t, long k, const GL2Q& g) {
    auto [a, b, c, d] = canonical_twist(g);
    if (a == 1 && b == 0 && c == 0 && d == 1) return t < 0 ? var(k) : j(t, k);
    if (t >= 0) return gen(Generator{static_cast<GenKind>(t + 1), k, a, b, c, d});
    if (c == 0) return var(k) * GaussQ(frac(a, d)) + GaussQ(frac(b, d));
    mpz_class det = a * d - b * c;
    JPoly w = gen(Generator{GenKind::W, k, a, b, c, d});
    return JPoly(GaussQ(frac(a, c))) - w * GaussQ(frac(det, c));
  }

  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty()); }
  GaussQ constant_term() const {
    auto it = terms_.find(Monomial{});
    return it == terms_.end() ? GaussQ() : it->second;
  }

  void add_term(const Monomial& m, const GaussQ& c) {
    if (c.is_zero()) return;
    auto [it, inserted] = terms_.emplace(m, c);
    if (!inserted) {
      it->second = it->second + c;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

  std::set<Generator> generators() const {
    std::set<Generator> out;
    for (const auto& [m, c] : terms_)
      for (const auto& [g, e] : m) out.insert(g);
    return out;
  }

  std::set<long> variables() const {
    std::set<long> out;
    for (const auto& g : generators()) out.insert(g.var);
    return out;
  }

  long max_var() const {
    auto v = variables();
    return v.empty() ? 0 : *v.rbegin();
  }

  bool has_twists() const {
    for (const auto& g : generators())
      if (g.twisted()) return true;
    return false;
  }

  bool has_kind(GenKind k) const {
    for (const auto& g : generators())
      if (g.kind == k) return true;
    return false;
  }

  /// Largest exponent of `g` in any term.
  long degree_in(const Generator& g) const {
    long d = 0;
    for (const auto& [m, c] : terms_) {
      auto it = m.find(g);
      if (it != m.end()) d = std::max(d, it->second);
    }
    return d;
  }

  friend JPoly operator+(JPoly x, const JPoly& y) {
    for (const auto& [m, c] : y.terms_) x.add_term(m, c);
    return x;
  }
  friend JPoly operator-(JPoly x, const JPoly& y) {
    for (const auto& [m, c] : y.terms_) x.add_term(m, -c);
    return x;
  }
  JPoly operator-() const { return JPoly() - *this; }
  friend JPoly operator*(const JPoly& x, const JPoly& y) {
    JPoly out;
    for (const auto& [mx, cx] : x.terms_) {
      for (const auto& [my, cy] : y.terms_) {
        Monomial m = mx;
        for (const auto& [g, e] : my) m[g] += e;
        out.add_term(m, cx * cy);
      }
    }
    return out;
  }
  friend JPoly operator*(JPoly x, const GaussQ& s) {
    if (s.is_zero()) return JPoly();
    for (auto& [m, c] : x.terms_) c = c * s;
    return x;
  }
  friend bool operator==(const JPoly& x, const JPoly& y) { return x.terms_ == y.terms_; }

  JPoly pow(long e) const {
    if (e < 0) fail(ErrorKind::invalid_argument, "negative exponent");
    JPoly r(1), base = *this;
    while (e > 0) {
      if (e & 1) r = r * base;
      e >>= 1;
      if (e > 0) base = base * base;
    }
    return r;
  }

  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [m, c] : terms_) {
      std::string mono;
      for (const auto& [g, e] : m) {
        if (!mono.empty()) mono += "*";
        mono += g.to_string();
        if (e != 1) mono += "^" + std::to_string(e);
      }
      std::string text;
      if (mono.empty()) text = c.to_string();
      else if (c == GaussQ(1)) text = mono;
      else if (c == GaussQ(-1)) text = "-" + mono;
      else text = c.to_string() + "*" + mono;
      if (first) out = text;
      else if (text[0] == '-') out += " - " + text.substr(1);
      else out += " + " + text;
      first = false;
    }
    return out;
  }

 private:
  Terms terms_;
};

// ---------------------------------------------------------------------------
// Derivatives.

namespace detail {

/// d(generator)/dX_k as a j-polynomial.
inline JPoly generator_diff(const Generator& g, long k) {
  if (g.var != k) return JPoly();
  switch (g.kind) {
    case GenKind::X: return JPoly(1);
    case GenKind::J3: fail(ErrorKind::invalid_argument, "derivative of j''' is not defined (would need j'''')");
    case GenKind::W: {
      JPoly w = JPoly::gen(g);
      return w * w * GaussQ(mpq_class(-g.c));
    }
    default: break;
  }
  Generator next = g;
  next.kind = static_cast<GenKind>(static_cast<int>(g.kind) + 1);
  JPoly out = JPoly::gen(next);
  if (!g.twisted()) return out;
  const mpz_class det = g.a * g.d - g.b * g.c;
  if (g.c == 0) return out * GaussQ(frac(det, g.d * g.d));
  Generator w = g;
  w.kind = GenKind::W;
  JPoly wp = JPoly::gen(w);
  return out * wp * wp * GaussQ(mpq_class(det));
}

template <typename DiffFn>
JPoly leibniz(const JPoly& p, DiffFn&& dgen) {
  JPoly out;
  for (const auto& [m, c] : p.terms()) {
    for (const auto& [g, e] : m) {
      JPoly dg = dgen(g);
      if (dg.is_zero()) continue;
      Monomial rest = m;
      if (--rest[g] == 0) rest.erase(g);
      JPoly term;
      term.add_term(rest, c * GaussQ(e));
      out = out + term * dg;
    }
  }
  return out;
}

}  // namespace detail

/// Formal partial derivative in X_k (1-based).
inline JPoly jp_diff(const JPoly& p, long k) {
  if (k < 1) fail(ErrorKind::invalid_argument, "variable index must be >= 1");
  return detail::leibniz(p, [k](const Generator& g) { return detail::generator_diff(g, k); });
}

/// Partial derivative treating every generator as an independent coordinate.
inline JPoly jp_coord_diff(const JPoly& p, const Generator& coord) {
  return detail::leibniz(p, [&coord](const Generator& g) { return g == coord ? JPoly(1) : JPoly(); });
}

// ---------------------------------------------------------------------------
// Evaluation.

using JAssignment = std::map<long, HPoint>;

struct JEval {
  Complex value;
  Real scale;  ///< 1 + sum |c| |monomial|
};

namespace detail {

/// Values of every generator of p at the assignment.
inline std::map<Generator, Complex> generator_values(const JPoly& p, const JAssignment& a, const PrecisionContext& ctx) {
  const long wb = ctx.work_bits();
  struct Key {
    long var;
    std::array<mpz_class, 4> t;
    bool operator<(const Key& o) const {
      if (var != o.var) return var < o.var;
      return t < o.t;
    }
  };
  std::map<Key, int> need;  // highest derivative order needed per (var, twist)
  auto gens = p.generators();
  for (const auto& g : gens) {
    if (!a.count(g.var)) fail(ErrorKind::invalid_argument, "variable X" + std::to_string(g.var) + " is not assigned");
    if (g.is_j()) {
      Key key{g.var, {g.a, g.b, g.c, g.d}};
      auto [it, ins] = need.emplace(key, g.order());
      if (!ins) it->second = std::max(it->second, g.order());
    }
  }
  std::map<Key, JJet> jets;
  for (const auto& [key, order] : need) {
    const HPoint& z = a.at(key.var);
    GL2Q tw{mpq_class(key.t[0]), mpq_class(key.t[1]), mpq_class(key.t[2]), mpq_class(key.t[3])};
    HPoint w = tw == GL2Q::identity() ? z : act(tw, z, ctx);
    JJet jt = jet(w, ctx, order);
    if (order >= 3) {
      std::string where = tw == GL2Q::identity() ? "X" + std::to_string(key.var) : "g*X" + std::to_string(key.var);
      try {
        Complex eta = eta_j3(jt.j, jt.j1, jt.j2, ctx);
        if (abs(eta - jt.j3) > ctx.tol() * 8 * (Real(1) + abs(jt.j3)))
          fail(ErrorKind::numeric_instability, "j''' at " + where + " disagrees with the Psi relation");
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::domain) throw;
        fail(ErrorKind::domain, std::string("j''' needed at ") + where + " where " + e.what() +
                                    " (excluded by axiom (e))");
      }
    }
    jets.emplace(key, std::move(jt));
  }
  std::map<Generator, Complex> out;
  PrecisionScope scope(wb);
  for (const auto& g : gens) {
    const Complex& z = a.at(g.var).value();
    switch (g.kind) {
      case GenKind::X: out.emplace(g, z.at_precision(wb)); break;
      case GenKind::W: {
        Complex den = z.at_precision(wb) * Real(g.c);
        den.re += g.d;
        out.emplace(g, Complex(Real(1)) / den);
        break;
      }
      default: {
        const JJet& jt = jets.at(Key{g.var, {g.a, g.b, g.c, g.d}});
        const Complex* v[] = {&jt.j, &jt.j1, &jt.j2, &jt.j3};
        out.emplace(g, v[g.order()]->at_precision(wb));
      }
    }
  }
  return out;
}

inline JEval eval_with(const JPoly& p, const std::map<Generator, Complex>& vals, long wb) {
  PrecisionScope scope(wb);
  JEval r{Complex::with_precision(wb), Real(1)};
  for (const auto& [m, c] : p.terms()) {
    Complex t = c.to_complex(wb);
    Complex mono(Real(1));
    for (const auto& [g, e] : m) mono = mono * pow(vals.at(g), e);
    t = t * mono;
    r.value += t;
    r.scale += abs(c.to_complex(wb)) * abs(mono);
  }
  return r;
}

}  // namespace detail

inline JEval jp_eval_scaled(const JPoly& p, const JAssignment& a, const PrecisionContext& ctx) {
  return detail::eval_with(p, detail::generator_values(p, a, ctx), ctx.work_bits());
}

inline Complex jp_eval(const JPoly& p, const JAssignment& a, const PrecisionContext& ctx) {
  return jp_eval_scaled(p, a, ctx).value;
}

// ---------------------------------------------------------------------------
// Text: parsing and flattening.

namespace detail {

struct JNode;
using JNodePtr = std::shared_ptr<JNode>;

/// Parsed expression tree (nesting allowed; jp_parse rejects it later).
struct JNode {
  enum class Op { Num, Var, Fn, Add, Sub, Mul, Div, Neg, Pow } op = Op::Num;
  GaussQ num;
  long var = 0;          ///< 0 = unindexed "X"
  GL2Q twist;            ///< Var only
  int fn = 0;            ///< Fn: derivative order
  long exponent = 1;     ///< Pow
  std::vector<JNodePtr> kids;
};

class JParser {
 public:
  explicit JParser(std::string text) : s_(std::move(text)) {}

  /// "lhs" or "lhs = rhs"; returns (lhs, rhs or nullptr).
  std::pair<JNodePtr, JNodePtr> equation() {
    JNodePtr lhs = expr();
    JNodePtr rhs;
    skip();
    if (peek() == '=') {
      ++pos_;
      rhs = expr();
    }
    skip();
    if (pos_ != s_.size()) error("unexpected '" + s_.substr(pos_, 1) + "'");
    return {lhs, rhs};
  }

 private:
  [[noreturn]] void error(const std::string& why) const {
    fail(ErrorKind::parse, "j-polynomial '" + s_ + "' at offset " + std::to_string(pos_) + ": " + why);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  char peek() {
    skip();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }
  bool accept(char c) {
    if (peek() != c) return false;
    ++pos_;
    return true;
  }
  void expect(char c) {
    if (!accept(c)) error(std::string("expected '") + c + "'");
  }

  static JNodePtr make(JNode::Op op, std::vector<JNodePtr> kids = {}) {
    auto n = std::make_shared<JNode>();
    n->op = op;
    n->kids = std::move(kids);
    return n;
  }

  JNodePtr expr() {
    JNodePtr left = term();
    for (;;) {
      if (accept('+')) left = make(JNode::Op::Add, {left, term()});
      else if (peek() == '-') { ++pos_; left = make(JNode::Op::Sub, {left, term()}); }
      else return left;
    }
  }

  bool starts_primary() {
    char c = peek();
    return std::isalnum(static_cast<unsigned char>(c)) || c == '(' || c == '[' || c == '.';
  }

  JNodePtr term() {
    JNodePtr left = unary();
    for (;;) {
      if (accept('*')) left = make(JNode::Op::Mul, {left, unary()});
      else if (accept('/')) left = make(JNode::Op::Div, {left, unary()});
      else if (starts_primary()) left = make(JNode::Op::Mul, {left, power()});
      else return left;
    }
  }

  JNodePtr unary() {
    if (accept('-')) return make(JNode::Op::Neg, {unary()});
    if (accept('+')) return unary();
    return power();
  }

  JNodePtr power() {
    JNodePtr base = primary();
    if (accept('^')) {
      skip();
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (start == pos_) error("exponent must be a nonnegative integer");
      auto n = make(JNode::Op::Pow, {base});
      n->exponent = std::stol(s_.substr(start, pos_ - start));
      return n;
    }
    return base;
  }

  mpq_class number_literal() {
    skip();
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
    std::string lit = s_.substr(start, pos_ - start);
    if (lit.empty() || lit == ".") error("expected a number");
    auto dot = lit.find('.');
    if (dot == std::string::npos) return mpq_class(mpz_class(lit));
    if (lit.find('.', dot + 1) != std::string::npos) error("malformed number");
    std::string digits = lit.substr(0, dot) + lit.substr(dot + 1);
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, lit.size() - dot - 1);
    mpq_class q(mpz_class(digits.empty() ? "0" : digits), den);
    q.canonicalize();
    return q;
  }

  mpq_class signed_rational() {
    bool neg = accept('-');
    mpq_class q = number_literal();
    if (accept('/')) {
      mpq_class den = number_literal();
      if (den == 0) error("zero denominator");
      q /= den;
    }
    return neg ? mpq_class(-q) : q;
  }

  std::string ident() {
    skip();
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    return s_.substr(start, pos_ - start);
  }

  /// Counts trailing primes (ASCII ' or U+2032) after "j".
  int primes() {
    int n = 0;
    for (;;) {
      if (pos_ < s_.size() && s_[pos_] == '\'') { ++pos_; ++n; continue; }
      if (s_.compare(pos_, 3, "\xe2\x80\xb2") == 0) { pos_ += 3; ++n; continue; }
      if (s_.compare(pos_, 3, "\xe2\x80\xb3") == 0) { pos_ += 3; n += 2; continue; }
      return n;
    }
  }

  JNodePtr variable(const std::string& id) {
    auto n = make(JNode::Op::Var);
    if (id == "X") {
      n->var = 0;
      return n;
    }
    if (id.size() < 2 || id[0] != 'X') error("unknown identifier '" + id + "'");
    for (std::size_t k = 1; k < id.size(); ++k)
      if (!std::isdigit(static_cast<unsigned char>(id[k]))) error("unknown identifier '" + id + "'");
    n->var = std::stol(id.substr(1));
    if (n->var < 1) error("variable indices start at 1");
    return n;
  }

  JNodePtr primary() {
    char c = peek();
    if (c == '(') {
      ++pos_;
      JNodePtr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      auto n = make(JNode::Op::Num);
      n->num = GaussQ(number_literal());
      return n;
    }
    if (c == '[') {
      ++pos_;
      expect('[');
      mpq_class a = signed_rational();
      expect(',');
      mpq_class b = signed_rational();
      expect(']');
      expect(',');
      expect('[');
      mpq_class cc = signed_rational();
      expect(',');
      mpq_class d = signed_rational();
      expect(']');
      expect(']');
      expect('*');
      JNodePtr v = variable(ident());
      v->twist = GL2Q{a, b, cc, d};
      if (v->twist.det() == 0) error("twist matrix is singular");
      return v;
    }
    std::string id = ident();
    if (id.empty()) error("expected an expression");
    if (id == "i") {
      auto n = make(JNode::Op::Num);
      n->num = GaussQ::unit_i();
      return n;
    }
    int order = -1;
    if (id == "j") order = primes();
    else if (id == "j1") order = 1;
    else if (id == "j2") order = 2;
    else if (id == "j3") error("j3 cannot be written directly; it only arises from derivatives");
    if (order >= 0) {
      if (order > 2) error("only j, j1, j2 may be applied");
      expect('(');
      auto n = make(JNode::Op::Fn, {expr()});
      expect(')');
      n->fn = order;
      return n;
    }
    return variable(id);
  }

  std::string s_;
  std::size_t pos_ = 0;
};

inline bool is_plain_var(const JNodePtr& n) { return n->op == JNode::Op::Var; }

/// Tree to j-polynomial; `unindexed` is the index given to a bare "X".
inline JPoly to_jpoly(const JNodePtr& n, long unindexed, const std::string& text) {
  using Op = JNode::Op;
  auto rec = [&](const JNodePtr& k) { return to_jpoly(k, unindexed, text); };
  switch (n->op) {
    case Op::Num: return JPoly(n->num);
    case Op::Var: {
      long v = n->var == 0 ? unindexed : n->var;
      if (v < 1) fail(ErrorKind::parse, "'" + text + "': use indexed variables X1, X2, ...");
      return JPoly::twisted(-1, v, n->twist);
    }
    case Op::Fn: {
      const JNodePtr& arg = n->kids[0];
      if (!is_plain_var(arg))
        fail(ErrorKind::parse, "'" + text + "': j applied to a compound or nested argument; use flatten() first");
      long v = arg->var == 0 ? unindexed : arg->var;
      if (v < 1) fail(ErrorKind::parse, "'" + text + "': use indexed variables X1, X2, ...");
      return JPoly::twisted(n->fn, v, arg->twist);
    }
    case Op::Add: return rec(n->kids[0]) + rec(n->kids[1]);
    case Op::Sub: return rec(n->kids[0]) - rec(n->kids[1]);
    case Op::Mul: return rec(n->kids[0]) * rec(n->kids[1]);
    case Op::Neg: return -rec(n->kids[0]);
    case Op::Pow: return rec(n->kids[0]).pow(n->exponent);
    case Op::Div: {
      JPoly den = rec(n->kids[1]);
      if (!den.is_constant() || den.is_zero())
        fail(ErrorKind::parse, "'" + text + "': division only by nonzero constants");
      return rec(n->kids[0]) * (GaussQ(1) / den.constant_term());
    }
  }
  return JPoly();
}

inline long max_index(const JNodePtr& n) {
  long m = n->op == JNode::Op::Var ? n->var : 0;
  for (const auto& k : n->kids) m = std::max(m, max_index(k));
  return m;
}

inline bool has_unindexed(const JNodePtr& n) {
  if (n->op == JNode::Op::Var && n->var == 0) return true;
  for (const auto& k : n->kids)
    if (has_unindexed(k)) return true;
  return false;
}

}  // namespace detail

/// Parses one j-polynomial; "lhs = rhs" yields lhs - rhs.
inline JPoly jp_parse(const std::string& text) {
  detail::JParser parser(text);
  auto [lhs, rhs] = parser.equation();
  JPoly p = detail::to_jpoly(lhs, 0, text);
  if (rhs) p = p - detail::to_jpoly(rhs, 0, text);
  return p;
}

struct FlatEquation {
  JPoly lhs;
  JPoly rhs;

  JPoly poly() const { return lhs - rhs; }
  std::string to_string() const { return lhs.to_string() + " = " + rhs.to_string(); }
};

struct FlatSystem {
  std::vector<FlatEquation> equations;
  long fresh = 0;              ///< number of fresh variables introduced
  long first_fresh = 0;        ///< index of the first fresh variable
  std::optional<long> unindexed;  ///< index assigned to a bare "X", if any
};

/// Rewrites nested applications: every j-argument that is not a plain
/// variable becomes a fresh variable, allocated outermost first, with the
/// defining equation "argument = fresh". A bare "X" is numbered after the
/// fresh variables.
inline FlatSystem flatten(const std::string& text) {
  using detail::JNode;
  using detail::JNodePtr;
  detail::JParser parser(text);
  auto [lhs, rhs] = parser.equation();
  if (!rhs) {
    auto zero = std::make_shared<JNode>();
    zero->op = JNode::Op::Num;
    rhs = zero;
  }
  long next = std::max(detail::max_index(lhs), detail::max_index(rhs)) + 1;
  FlatSystem out;
  out.first_fresh = next;

  // Breadth-first over pending (argument tree, fresh index) definitions so
  // that outer arguments get the smaller indices.
  struct Pending {
    JNodePtr expr;
    long index;
  };
  std::vector<Pending> queue;
  std::function<JNodePtr(const JNodePtr&)> rewrite = [&](const JNodePtr& n) -> JNodePtr {
    auto copy = std::make_shared<JNode>(*n);
    if (n->op == JNode::Op::Fn && !detail::is_plain_var(n->kids[0])) {
      auto v = std::make_shared<JNode>();
      v->op = JNode::Op::Var;
      v->var = next++;
      queue.push_back({n->kids[0], v->var});
      copy->kids = {v};
      return copy;
    }
    for (auto& k : copy->kids) k = rewrite(k);
    return copy;
  };
  std::vector<std::pair<JNodePtr, JNodePtr>> eqs;
  JNodePtr l0 = rewrite(lhs);
  JNodePtr r0 = rewrite(rhs);
  eqs.push_back({l0, r0});
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    JNodePtr body = rewrite(queue[qi].expr);
    auto v = std::make_shared<JNode>();
    v->op = JNode::Op::Var;
    v->var = queue[qi].index;
    eqs.push_back({body, v});
  }
  out.fresh = next - out.first_fresh;
  long unindexed = 0;
  if (detail::has_unindexed(lhs) || detail::has_unindexed(rhs)) {
    unindexed = next;
    out.unindexed = next;
  }
  for (const auto& [l, r] : eqs)
    out.equations.push_back({detail::to_jpoly(l, unindexed, text), detail::to_jpoly(r, unindexed, text)});
  return out;
}

/// Polynomial in X (= X1) and Y (= X2) without j-symbols, for plane curves.
inline JPoly parse_plane_polynomial(const std::string& text) {
  std::string mapped;
  for (std::size_t k = 0; k < text.size(); ++k) {
    char c = text[k];
    bool alone = (k + 1 >= text.size() || !std::isalnum(static_cast<unsigned char>(text[k + 1]))) &&
                 (k == 0 || !std::isalnum(static_cast<unsigned char>(text[k - 1])));
    if (alone && c == 'X') mapped += "X1";
    else if (alone && c == 'Y') mapped += "X2";
    else mapped += c;
  }
  JPoly p = jp_parse(mapped);
  for (const auto& g : p.generators())
    if (g.kind != GenKind::X || g.twisted() || g.var > 2)
      fail(ErrorKind::parse, "'" + text + "': plane curves are polynomials in X and Y only");
  return p;
}

}  // namespace jmod
