#pragma once

// delta / trdeg / xi of a random fixture recomputed from its coordinate
// polynomials, with coordinates and jets from the Ramanujan oracle.

#include <algorithm>
#include <vector>

#include "jmod/fixtures.hpp"
#include "oracles.hpp"

namespace oracle {

struct ClosureOracle {
  const jmod::fixtures::Fixture& f;
  long bits;
  std::vector<std::array<Complex, 4>> jets;
  std::vector<std::vector<Complex>> jac;  // unit rows
  Real cut;
  long full = 0;

  ClosureOracle(const jmod::fixtures::Fixture& fx, long base_bits) : f(fx), bits(2 * base_bits + 32) {
    PrecisionScope s(bits);
    std::vector<Complex> x;
    for (const auto& p : f.config.basis_points) {
      auto jt = j_jet(p.value(), bits);
      jets.push_back(jt);
      x.push_back(p.value().at_precision(bits));
      for (int t = 0; t < 3; ++t) x.push_back(jt[static_cast<std::size_t>(t)]);
    }
    for (const auto& poly : f.relations) {
      std::vector<Complex> g(x.size(), Complex::with_precision(bits));
      for (const auto& [mono, c] : poly)
        for (std::size_t k = 0; k < mono.size(); ++k) {
          Complex t{Real(c)};
          for (std::size_t q = 0; q < mono.size(); ++q)
            if (q != k) t = t * x[static_cast<std::size_t>(mono[q])];
          g[static_cast<std::size_t>(mono[k])] += t;
        }
      Real n(0);
      for (auto& v : g) n += norm(v);
      n = sqrt(n);
      for (auto& v : g) v /= n;
      jac.push_back(std::move(g));
    }
    cut = Real::pow2(-(base_bits / 4), bits);
    full = rank(jac, cut, false);
  }

  long rank_without(const std::vector<bool>& in_p) const {
    std::vector<std::vector<Complex>> sub;
    for (const auto& row : jac) {
      std::vector<Complex> r;
      for (std::size_t c = 0; c < row.size(); ++c)
        if (!in_p[c / 4]) r.push_back(row[c]);
      sub.push_back(std::move(r));
    }
    return rank(std::move(sub), cut, false);
  }

  long trdeg(const std::vector<int>& labels) const {
    std::vector<bool> in(f.orbit.size(), false);
    long np = 0;
    for (std::size_t k = 0; k < f.orbit.size(); ++k)
      if (std::count(labels.begin(), labels.end(), f.orbit[k])) in[k] = true, ++np;
    return 4 * np + rank_without(in) - full;
  }

  long delta(const std::vector<int>& labels) const { return trdeg(labels) - 3 * static_cast<long>(labels.size()); }

  long xi() const {
    const std::size_t n = f.orbit.size();
    std::vector<std::vector<Complex>> rows;
    for (const auto& g : jac) {
      std::vector<Complex> r;
      for (std::size_t k = 0; k < n; ++k)
        r.push_back(g[4 * k] + g[4 * k + 1] * jets[k][1] + g[4 * k + 2] * jets[k][2] + g[4 * k + 3] * jets[k][3]);
      rows.push_back(std::move(r));
    }
    return static_cast<long>(n) - rank(std::move(rows), cut);
  }

  std::vector<int> labels() const {
    std::vector<int> out;
    for (int l : f.orbit)
      if (!std::count(out.begin(), out.end(), l)) out.push_back(l);
    return out;
  }
};

}  // namespace oracle
