#pragma once

// Random declared-relation configurations whose relations hold exactly by
// construction: a point is either free, pinned by j(Xk) = c, defined by
// j(Xk) = g(earlier coordinates), or a translate of an earlier point. Each
// relation is also kept as a plain polynomial in coordinate ids so that a
// caller can differentiate it without the library's own machinery.
//
// Coordinate id of point k: 4k + t, t = 0..3 for z, j, j', j''.

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "jmod/closure_geometry.hpp"
#include "jmod/modular_forms.hpp"

namespace jmod::fixtures {

/// sum coef * prod coords; a monomial is a sorted list of coordinate ids.
using CoordPoly = std::map<std::vector<int>, long>;

struct Fixture {
  Configuration config;
  std::vector<CoordPoly> relations;  ///< parallel to config.relations
  std::vector<int> orbit;            ///< orbit label per point
  std::vector<std::string> kinds;    ///< how each point was made
};

inline std::string coord_text(int id) {
  const int k = id / 4 + 1;
  static const char* names[] = {"", "j", "j1", "j2"};
  std::string x = "X" + std::to_string(k);
  return id % 4 == 0 ? x : std::string(names[id % 4]) + "(" + x + ")";
}

inline std::string poly_text(const CoordPoly& p) {
  std::string out;
  for (const auto& [mono, c] : p) {
    if (c == 0) continue;
    std::string term = std::to_string(c < 0 ? -c : c);
    for (int id : mono) term += "*" + coord_text(id);
    out += (out.empty() ? (c < 0 ? "-" : "") : (c < 0 ? " - " : " + ")) + term;
  }
  return out.empty() ? "0" : out;
}

inline CoordPoly add(CoordPoly a, const CoordPoly& b, long scale = 1) {
  for (const auto& [m, c] : b) a[m] += scale * c;
  for (auto it = a.begin(); it != a.end();) it = it->second == 0 ? a.erase(it) : std::next(it);
  return a;
}

inline CoordPoly times_coord(const CoordPoly& a, int id) {
  CoordPoly out;
  for (const auto& [m, c] : a) {
    auto mm = m;
    mm.insert(std::upper_bound(mm.begin(), mm.end(), id), id);
    out[mm] += c;
  }
  return out;
}

/// Coordinates of the points at working precision.
inline std::vector<Complex> coordinates(const std::vector<HPoint>& pts, const PrecisionContext& ctx) {
  std::vector<Complex> v;
  for (const auto& p : pts) {
    JJet jt = jet(p, ctx, 2);
    v.push_back(p.value().at_precision(ctx.work_bits()));
    v.push_back(jt.j);
    v.push_back(jt.j1);
    v.push_back(jt.j2);
  }
  return v;
}

inline Complex eval(const CoordPoly& p, const std::vector<Complex>& x, long bits) {
  PrecisionScope scope(bits);
  Complex acc = Complex::with_precision(bits);
  for (const auto& [m, c] : p) {
    Complex t{Real(c)};
    for (int id : m) t = t * x[static_cast<std::size_t>(id)];
    acc += t;
  }
  return acc;
}

struct Options {
  int max_points = 4;
  int max_redundant = 2;
  bool allow_translates = true;
};

inline Fixture random_fixture(std::mt19937_64& rng, const PrecisionContext& ctx, const Options& opt = {}) {
  const long wb = ctx.work_bits();
  PrecisionScope scope(wb);
  std::uniform_int_distribution<int> npts(1, opt.max_points);
  std::uniform_real_distribution<double> ure(-0.45, 0.45), uim(0.95, 1.6);
  std::uniform_int_distribution<int> small(-9, 9), kind(0, 3), coin(0, 1);
  Fixture f;
  std::vector<HPoint> pts;
  std::vector<Complex> coords;
  const int n = npts(rng);
  int next_orbit = 0;
  auto push_point = [&](const HPoint& p, int orbit, const std::string& how) {
    pts.push_back(p);
    auto c = coordinates({p}, ctx);
    coords.insert(coords.end(), c.begin(), c.end());
    f.orbit.push_back(orbit);
    f.kinds.push_back(how);
  };
  auto declare = [&](const CoordPoly& p) {
    f.relations.push_back(p);
    f.config.add_relation(poly_text(p));
  };
  // A fresh orbit must not collide with an earlier point.
  auto fresh = [&](const HPoint& p) {
    for (const auto& q : pts)
      if (find_modular_relation(p, q, ctx)) return false;
    return true;
  };
  for (int k = 0; k < n; ++k) {
    int how = k == 0 ? coin(rng) : kind(rng);
    if (how == 3 && !opt.allow_translates) how = 2;
    const int jk = 4 * k + 1;
    if (how == 0) {
      std::optional<HPoint> p;
      while (!p || !fresh(*p)) {
        Real re(ure(rng));
        Real im(uim(rng));
        p = HPoint(Complex(re, im));
      }
      push_point(*p, next_orbit++, "free");
    } else if (how == 1) {
      long c = 0;
      std::optional<HPoint> p;
      while (!p || !fresh(*p)) {
        const long hi = small(rng);
        c = hi * 97 + small(rng);
        if (c != 0) p = j_inverse(Complex(Real(c)), ctx);
      }
      push_point(*p, next_orbit++, "pinned");
      declare(CoordPoly{{{jk}, 1}, {{}, -c}});
    } else if (how == 2) {
      // j(Xk) = a*u + b*v*w + c over earlier coordinates
      std::uniform_int_distribution<int> pick(0, 4 * k - 1);
      CoordPoly g;
      std::optional<HPoint> p;
      while (!p || !fresh(*p)) {
        g.clear();
        long a = 0, b = 0;
        while (a == 0) a = small(rng);
        while (b == 0) b = small(rng);
        g[{pick(rng)}] += a;
        std::vector<int> m2{pick(rng), pick(rng)};
        std::sort(m2.begin(), m2.end());
        if (coin(rng)) g[m2] += b;
        long c0 = 0;
        while (c0 == 0) c0 = small(rng);
        g[{}] += c0;
        g = add(g, {});
        p = j_inverse(eval(g, coords, wb), ctx);
      }
      push_point(*p, next_orbit++, "chained");
      declare(add(CoordPoly{{{jk}, 1}}, g, -1));
    } else {
      // translate of an earlier point, with some of its coordinate identities
      // (always of an orbit's first point, by k, so translates never coincide)
      std::uniform_int_distribution<int> pick(0, k - 1);
      int l = pick(rng);
      while (l > 0 && f.kinds[static_cast<std::size_t>(l)] == "translate") --l;
      Complex z = pts[static_cast<std::size_t>(l)].value();
      z.re += k;
      push_point(HPoint(z), f.orbit[static_cast<std::size_t>(l)], "translate");
      f.config.modular.push_back({static_cast<std::size_t>(k), static_cast<std::size_t>(l), GL2Q::from_ints(1, k, 0, 1)});
      for (int t = 0; t < 4; ++t) {
        if (!coin(rng)) continue;
        CoordPoly r{{{4 * k + t}, 1}, {{4 * l + t}, -1}};
        if (t == 0) r[{}] = -k;
        declare(r);
      }
    }
  }
  // redundant consequences
  if (!f.relations.empty()) {
    std::uniform_int_distribution<int> nred(0, opt.max_redundant);
    const int extra = nred(rng);
    for (int e = 0; e < extra; ++e) {
      std::uniform_int_distribution<std::size_t> pr(0, f.relations.size() - 1);
      std::uniform_int_distribution<int> pc(0, 4 * n - 1);
      const CoordPoly& a = f.relations[pr(rng)];
      CoordPoly r;
      if (coin(rng)) {
        const CoordPoly& b = f.relations[pr(rng)];
        r = add(a, b, small(rng) == 0 ? 1 : 2);
      } else {
        r = times_coord(a, pc(rng));
      }
      if (r.empty()) continue;
      declare(r);
    }
  }
  f.config.basis_points = std::move(pts);
  return f;
}

}  // namespace jmod::fixtures
