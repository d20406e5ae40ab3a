#pragma once

// Parser for complex constants given on the command line or in
// configuration files: "i", "2i", "0.5+0.7i", "(1+i*sqrt(163))/2",
// "(1+i√3)/2", "exp(1)", "1e-3-2.5i". Evaluated at the requested precision.

#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>

#include "jmod/error.hpp"
#include "jmod/real.hpp"

namespace jmod {

namespace detail {

class ComplexParser {
 public:
  ComplexParser(std::string_view text, long bits) : s_(text), bits_(bits) {}

  Complex parse() {
    PrecisionScope scope(bits_);
    Complex v = expr();
    skip_ws();
    if (pos_ != s_.size()) error("unexpected '" + std::string(s_.substr(pos_, 1)) + "'");
    return v;
  }

 private:
  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorKind::parse, "cannot parse complex number '" + std::string(s_) + "': " + what);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool peek_sqrt_sign() const { return s_.substr(pos_, 3) == "\xE2\x88\x9A"; }

  bool starts_factor() {
    skip_ws();
    if (pos_ >= s_.size()) return false;
    char c = s_[pos_];
    return std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '(' ||
           std::isalpha(static_cast<unsigned char>(c)) || peek_sqrt_sign();
  }

  Complex expr() {
    Complex v = term();
    for (;;) {
      skip_ws();
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) {
        char op = s_[pos_++];
        Complex r = term();
        v = op == '+' ? v + r : v - r;
      } else {
        return v;
      }
    }
  }

  Complex term() {
    Complex v = unary();
    for (;;) {
      skip_ws();
      if (pos_ < s_.size() && (s_[pos_] == '*' || s_[pos_] == '/')) {
        char op = s_[pos_++];
        Complex r = unary();
        if (op == '/' && r.is_zero()) error("division by zero");
        v = op == '*' ? v * r : v / r;
      } else if (starts_factor()) {
        v = v * power();  // implicit multiplication: 2i, i√3, 3(1+i)
      } else {
        return v;
      }
    }
  }

  Complex unary() {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == '-') { ++pos_; return -unary(); }
    if (pos_ < s_.size() && s_[pos_] == '+') { ++pos_; return unary(); }
    return power();
  }

  Complex power() {
    Complex base = primary();
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == '^') {
      ++pos_;
      skip_ws();
      bool neg = false;
      if (pos_ < s_.size() && s_[pos_] == '-') { neg = true; ++pos_; }
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (start == pos_) error("exponent must be an integer literal");
      long e = std::stol(std::string(s_.substr(start, pos_ - start)));
      if (neg && base.is_zero()) error("zero to a negative power");
      return pow(base, neg ? -e : e);
    }
    return base;
  }

  Complex primary() {
    skip_ws();
    if (pos_ >= s_.size()) error("unexpected end of input");
    char c = s_[pos_];
    if (peek_sqrt_sign()) {
      pos_ += 3;
      return sqrt(power());
    }
    if (c == '(') {
      ++pos_;
      Complex v = expr();
      skip_ws();
      if (pos_ >= s_.size() || s_[pos_] != ')') error("missing ')'");
      ++pos_;
      return v;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      std::string name(s_.substr(start, pos_ - start));
      if (name == "i") return Complex(Real(0), Real(1));
      if (name == "pi") return Complex(Real::pi(bits_));
      if (name == "e") return Complex(exp(Real(1)));
      skip_ws();
      if (pos_ >= s_.size() || s_[pos_] != '(') error("unknown identifier '" + name + "'");
      ++pos_;
      Complex arg = expr();
      skip_ws();
      if (pos_ >= s_.size() || s_[pos_] != ')') error("missing ')'");
      ++pos_;
      if (name == "sqrt") return sqrt(arg);
      if (name == "exp") return exp(arg);
      if (name == "log") {
        if (arg.is_zero()) error("log(0)");
        return log(arg);
      }
      if (name == "conj") return conj(arg);
      error("unknown function '" + name + "'");
    }
    error("unexpected '" + std::string(1, c) + "'");
  }

  Complex number() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      std::size_t digits = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (digits == pos_) pos_ = save;  // "2e" is 2 times Euler's number
    }
    return Complex(Real::from_string(std::string(s_.substr(start, pos_ - start)), bits_));
  }

  std::string_view s_;
  long bits_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Complex parse_complex(std::string_view text, long bits) {
  return detail::ComplexParser(text, bits).parse();
}

}  // namespace jmod
