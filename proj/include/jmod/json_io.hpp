#pragma once

// JSON surface: decimal-string numbers, configuration files and report
// serialization. Everything numeric is emitted as a string so 256-bit values
// survive the trip.

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "jmod/closure_geometry.hpp"
#include "jmod/halfplane.hpp"
#include "jmod/khovanskii.hpp"
#include "jmod/modular_forms.hpp"
#include "jmod/parse.hpp"

namespace jmod {

using json = nlohmann::ordered_json;

/// Significant decimal digits carried by `bits` bits.
inline int decimal_digits(long bits) { return static_cast<int>(std::floor(static_cast<double>(bits) * 0.30102999566398)); }

inline json to_json(const Real& x, int digits) { return x.to_string(digits); }

inline json to_json(const Complex& z, int digits) {
  return json{{"re", z.re.to_string(digits)}, {"im", z.im.to_string(digits)}};
}

inline json to_json(const GL2Q& g) {
  return json::array({json::array({g.a.get_str(), g.b.get_str()}), json::array({g.c.get_str(), g.d.get_str()})});
}

inline json to_json(const PrimitiveIntMatrix& g) {
  return json::array({json::array({g.a.get_str(), g.b.get_str()}), json::array({g.c.get_str(), g.d.get_str()})});
}

inline json to_json(const JJet& jt, int digits) {
  return json{{"j", to_json(jt.j, digits)},
              {"j1", to_json(jt.j1, digits)},
              {"j2", to_json(jt.j2, digits)},
              {"j3", to_json(jt.j3, digits)}};
}

inline json to_json(const Solution& s, int digits) {
  json pts = json::array();
  for (const auto& p : s.points) pts.push_back(to_json(p, digits));
  return json{{"points", pts},
              {"residual", s.residual.to_string(6)},
              {"jacobian_smallest_sv", s.jac_smallest_sv.to_string(6)},
              {"jacobian_largest_sv", s.jac_largest_sv.to_string(6)},
              {"nonsingular", s.nonsingular}};
}

inline json to_json(const XiReport& r) {
  return json{{"n_generators", r.n_generators}, {"relation_rank", r.relation_rank}, {"xi_dim", r.xi_dim}};
}

inline json to_json(const DeltaReport& r) {
  return json{{"trdeg_estimate", r.trdeg_estimate}, {"dim_g", r.dim_g}, {"delta", r.delta}};
}

inline json to_json(const ValidationReport& r) {
  json claims = json::array();
  for (const auto& c : r.claims) {
    json e{{"i", c.i + 1}, {"j", c.j + 1}, {"level", c.level}, {"action_residual", c.action_residual.to_string(6)}};
    e["phi_residual"] = c.phi_residual ? json(c.phi_residual->to_string(6)) : json(nullptr);
    e["derivative_residual"] = c.derivative_residual ? json(c.derivative_residual->to_string(6)) : json(nullptr);
    e["ok"] = c.ok;
    claims.push_back(std::move(e));
  }
  json res = json::array();
  for (const auto& x : r.relation_residuals) res.push_back(x.sign() < 0 ? json(nullptr) : json(x.to_string(6)));
  return json{{"valid", r.valid},
              {"violations", r.violations},
              {"flags", r.flags},
              {"relation_residuals", res},
              {"claims", claims}};
}

// ---------------------------------------------------------------------------
// Configuration files.
//
// {
//   "points":    ["2*i", "e + pi*i"],
//   "base":      "rationals" | "special" | {"declared": ["i"]},
//   "relations": ["j(X1) - 287496", {"relation": "X2 - X1 - 1"}],
//   "modular":   [{"i": 1, "j": 2, "g": [[2, 0], [0, 1]]}]
// }
// Indices are 1-based and run over points then declared base points.

namespace detail {

inline mpq_class rational_entry(const json& v) {
  if (v.is_number_integer()) return mpq_class(v.get<long>());
  if (v.is_string()) {
    mpq_class q;
    if (q.set_str(v.get<std::string>(), 10) != 0) fail(ErrorKind::parse, "bad matrix entry '" + v.get<std::string>() + "'");
    q.canonicalize();
    return q;
  }
  fail(ErrorKind::parse, "matrix entries must be integers or rational strings");
}

inline GL2Q matrix_from_json(const json& m) {
  if (!m.is_array() || m.size() != 2 || !m[0].is_array() || !m[1].is_array() || m[0].size() != 2 || m[1].size() != 2)
    fail(ErrorKind::parse, "matrix must be [[a,b],[c,d]]");
  return {rational_entry(m[0][0]), rational_entry(m[0][1]), rational_entry(m[1][0]), rational_entry(m[1][1])};
}

inline std::vector<HPoint> points_from_json(const json& arr, long bits, const char* what) {
  if (!arr.is_array()) fail(ErrorKind::parse, std::string(what) + " must be an array of strings");
  std::vector<HPoint> out;
  for (const auto& p : arr) {
    if (!p.is_string()) fail(ErrorKind::parse, std::string(what) + " must be strings");
    out.emplace_back(parse_complex(p.get<std::string>(), bits));
  }
  return out;
}

}  // namespace detail

inline Configuration config_from_json(const json& j, const PrecisionContext& ctx) {
  if (!j.is_object()) fail(ErrorKind::parse, "configuration must be a JSON object");
  Configuration c;
  const long bits = ctx.work_bits() + 32;
  if (j.contains("points")) c.basis_points = detail::points_from_json(j["points"], bits, "points");
  if (j.contains("base")) {
    const json& b = j["base"];
    if (b.is_string()) {
      auto s = b.get<std::string>();
      if (s == "rationals") c.base_kind = BaseKind::rationals;
      else if (s == "special") c.base_kind = BaseKind::special;
      else fail(ErrorKind::parse, "unknown base kind '" + s + "'");
    } else if (b.is_object() && b.contains("declared")) {
      c.base_kind = BaseKind::declared;
      c.base_points = detail::points_from_json(b["declared"], bits, "declared base");
    } else {
      fail(ErrorKind::parse, "base must be \"rationals\", \"special\" or {\"declared\": [...]}");
    }
  }
  if (j.contains("relations")) {
    for (const auto& r : j["relations"]) {
      if (r.is_string()) c.add_relation(r.get<std::string>());
      else if (r.is_object() && r.contains("relation") && r["relation"].is_string())
        c.add_relation(r["relation"].get<std::string>());
      else fail(ErrorKind::parse, "relations must be strings or {\"relation\": ...}");
    }
  }
  if (j.contains("modular")) {
    for (const auto& m : j["modular"]) {
      if (!m.is_object() || !m.contains("i") || !m.contains("j") || !m.contains("g"))
        fail(ErrorKind::parse, "modular claims need i, j and g");
      long i = m["i"].get<long>(), jj = m["j"].get<long>();
      if (i < 1 || jj < 1) fail(ErrorKind::parse, "claim indices are 1-based");
      c.modular.push_back({static_cast<std::size_t>(i - 1), static_cast<std::size_t>(jj - 1),
                           detail::matrix_from_json(m["g"])});
    }
  }
  return c;
}

inline Configuration config_load(const std::string& path, const PrecisionContext& ctx) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::parse, path + ": " + e.what());
  }
  return config_from_json(j, ctx);
}

inline json config_to_json(const Configuration& c, int digits) {
  auto pts = [&](const std::vector<HPoint>& v) {
    json a = json::array();
    for (const auto& p : v) a.push_back(to_string(p.value(), digits));
    return a;
  };
  json out{{"points", pts(c.basis_points)}};
  if (c.base_kind == BaseKind::declared) out["base"] = json{{"declared", pts(c.base_points)}};
  else out["base"] = to_string(c.base_kind);
  json rels = json::array();
  for (const auto& r : c.relations) {
    json e{{"relation", r.poly.to_string()}};
    if (r.residual) e["residual"] = r.residual->to_string(6);
    rels.push_back(std::move(e));
  }
  out["relations"] = rels;
  json mods = json::array();
  for (const auto& m : c.modular) mods.push_back(json{{"i", m.i + 1}, {"j", m.j + 1}, {"g", to_json(m.g)}});
  out["modular"] = mods;
  return out;
}

}  // namespace jmod
