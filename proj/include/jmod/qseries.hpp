#pragma once

// Exact q-expansions of E2, E4, E6, Delta and j.
//
//   E2 = 1 - 24 sum sigma_1(n) q^n
//   E4 = 1 + 240 sum sigma_3(n) q^n
//   E6 = 1 - 504 sum sigma_5(n) q^n
//   Delta = (E4^3 - E6^2) / 1728 = q - 24 q^2 + ...
//   j = E4^3 / Delta = q^-1 + 744 + 196884 q + ...
//
// Series are cached per name and only ever extended. The optional text cache
// holds lines "SERIES name k numerator denominator".

#include <gmpxx.h>

#include <cstddef>
#include <fstream>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <vector>

#include "jmod/error.hpp"

namespace jmod {

/// Truncated Laurent series in q: coeffs[k] multiplies q^(k + valuation).
struct QSeries {
  std::string name;
  long valuation = 0;
  std::vector<mpq_class> coeffs;

  /// Exponent of the last stored coefficient.
  long truncation() const { return valuation + static_cast<long>(coeffs.size()) - 1; }

  mpq_class coeff(long k) const {
    long idx = k - valuation;
    if (idx < 0 || idx >= static_cast<long>(coeffs.size())) return 0;
    return coeffs[static_cast<std::size_t>(idx)];
  }
};

namespace detail {

inline std::vector<mpz_class> sigma_table(unsigned power, long count) {
  std::vector<mpz_class> s(static_cast<std::size_t>(count + 1), 0);
  for (long d = 1; d <= count; ++d) {
    mpz_class dp;
    mpz_ui_pow_ui(dp.get_mpz_t(), static_cast<unsigned long>(d), power);
    for (long m = d; m <= count; m += d) s[static_cast<std::size_t>(m)] += dp;
  }
  return s;
}

inline std::vector<mpz_class> eisenstein_coeffs(int weight, long terms) {
  long factor = 0;
  unsigned power = 0;
  switch (weight) {
    case 2: factor = -24; power = 1; break;
    case 4: factor = 240; power = 3; break;
    case 6: factor = -504; power = 5; break;
    default: fail(ErrorKind::invalid_argument, "Eisenstein weight must be 2, 4 or 6");
  }
  auto s = sigma_table(power, terms);
  std::vector<mpz_class> e(static_cast<std::size_t>(terms + 1));
  e[0] = 1;
  for (long n = 1; n <= terms; ++n) e[static_cast<std::size_t>(n)] = factor * s[static_cast<std::size_t>(n)];
  return e;
}

inline std::vector<mpz_class> mul_trunc(const std::vector<mpz_class>& a, const std::vector<mpz_class>& b,
                                        std::size_t len) {
  std::vector<mpz_class> r(len, 0);
  for (std::size_t i = 0; i < a.size() && i < len; ++i) {
    if (a[i] == 0) continue;
    for (std::size_t k = 0; k < b.size() && i + k < len; ++k) r[i + k] += a[i] * b[k];
  }
  return r;
}

}  // namespace detail

/// Integer coefficient tables shared by every evaluation. Entry k of
/// "delta" is the coefficient of q^(k+1); entry k of "j" that of q^(k-1).
class SeriesCache {
 public:
  static SeriesCache& instance() {
    static SeriesCache cache;
    return cache;
  }

  /// At least `terms` + 1 coefficients of the named series.
  std::vector<mpz_class> get(const std::string& name, long terms) {
    {
      std::shared_lock lock(mutex_);
      auto it = table_.find(name);
      if (it != table_.end() && static_cast<long>(it->second.size()) > terms) return it->second;
    }
    std::unique_lock lock(mutex_);
    auto it = table_.find(name);
    if (it != table_.end() && static_cast<long>(it->second.size()) > terms) return it->second;
    // Grow geometrically so repeated requests stay cheap.
    long target = std::max<long>(terms, 2 * (it == table_.end() ? 16 : static_cast<long>(it->second.size())));
    auto computed = compute(name, target);
    table_[name] = computed;
    return computed;
  }

  QSeries series(const std::string& name, long terms) {
    auto raw = get(name, terms);
    QSeries q;
    q.name = name;
    q.valuation = name == "j" ? -1 : (name == "delta" ? 1 : 0);
    for (long k = 0; k <= terms; ++k) q.coeffs.emplace_back(raw[static_cast<std::size_t>(k)]);
    return q;
  }

  void save(const std::string& path) {
    std::shared_lock lock(mutex_);
    std::ofstream out(path);
    if (!out) fail(ErrorKind::io, "cannot write series cache '" + path + "'");
    for (const auto& [name, coeffs] : table_) {
      long val = name == "j" ? -1 : (name == "delta" ? 1 : 0);
      for (std::size_t k = 0; k < coeffs.size(); ++k)
        out << "SERIES " << name << ' ' << static_cast<long>(k) + val << ' ' << coeffs[k].get_str() << " 1\n";
    }
  }

  /// Loads a cache file; every line must agree with freshly generated
  /// coefficients, otherwise the file is rejected.
  void load(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot read series cache '" + path + "'");
    std::map<std::string, std::map<long, mpq_class>> parsed;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::istringstream ls(line);
      std::string tag, name, num, den;
      long k = 0;
      if (!(ls >> tag >> name >> k >> num >> den) || tag != "SERIES")
        fail(ErrorKind::parse, path + ":" + std::to_string(lineno) + ": malformed series line");
      mpq_class q;
      try {
        q = mpq_class(mpz_class(num), mpz_class(den));
      } catch (const std::invalid_argument&) {
        fail(ErrorKind::parse, path + ":" + std::to_string(lineno) + ": bad integer");
      }
      q.canonicalize();
      parsed[name][k] = q;
    }
    for (const auto& [name, entries] : parsed) {
      if (entries.empty()) continue;
      long val = name == "j" ? -1 : (name == "delta" ? 1 : 0);
      long top = entries.rbegin()->first - val;
      auto reference = get(name, top);
      for (const auto& [k, q] : entries) {
        long idx = k - val;
        if (idx < 0 || q != mpq_class(reference[static_cast<std::size_t>(idx)]))
          fail(ErrorKind::validation, "series cache entry " + name + " q^" + std::to_string(k) + " is wrong");
      }
    }
  }

 private:
  static std::vector<mpz_class> compute(const std::string& name, long terms) {
    const auto len = static_cast<std::size_t>(terms + 1);
    if (name == "E2") return detail::eisenstein_coeffs(2, terms);
    if (name == "E4") return detail::eisenstein_coeffs(4, terms);
    if (name == "E6") return detail::eisenstein_coeffs(6, terms);
    // Delta / q and j * q both need one extra term of E4^3 - E6^2.
    auto e4 = detail::eisenstein_coeffs(4, terms + 1);
    auto e6 = detail::eisenstein_coeffs(6, terms + 1);
    auto e4sq = detail::mul_trunc(e4, e4, len + 1);
    auto e4cube = detail::mul_trunc(e4sq, e4, len + 1);
    auto e6sq = detail::mul_trunc(e6, e6, len + 1);
    std::vector<mpz_class> delta_shift(len);  // Delta / q
    for (std::size_t k = 0; k < len; ++k) {
      mpz_class diff = e4cube[k + 1] - e6sq[k + 1];
      mpz_divexact_ui(diff.get_mpz_t(), diff.get_mpz_t(), 1728);
      delta_shift[k] = diff;
    }
    if (name == "delta") return delta_shift;
    if (name == "j") {
      // q j = E4^3 / (Delta / q); the divisor has constant term 1.
      std::vector<mpz_class> out(len, 0);
      for (std::size_t k = 0; k < len; ++k) {
        mpz_class acc = e4cube[k];
        for (std::size_t i = 1; i <= k; ++i) acc -= delta_shift[i] * out[k - i];
        out[k] = acc;
      }
      return out;
    }
    fail(ErrorKind::invalid_argument, "unknown series '" + name + "'");
  }

  std::shared_mutex mutex_;
  std::map<std::string, std::vector<mpz_class>> table_;
};

}  // namespace jmod
