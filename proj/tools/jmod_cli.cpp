// jmod: command-line front end. Every result is one JSON document on
// stdout; failures are a JSON object on stderr with exit code 1 (the
// computation failed) or 2 (the request was malformed).

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "jmod/closure_geometry.hpp"
#include "jmod/halfplane.hpp"
#include "jmod/json_io.hpp"
#include "jmod/khovanskii.hpp"
#include "jmod/modular_forms.hpp"
#include "jmod/modular_polynomials.hpp"
#include "jmod/parse.hpp"
#include "jmod/selftest.hpp"

using namespace jmod;

namespace {

struct Globals {
  long prec = 256;
  std::string tol;
  int nmax = 8;
  std::int64_t height = 1'000'000;
  std::uint64_t seed = 1;
  std::string phi_cache;
  bool json_out = true;
};

PrecisionContext make_context(const Globals& g) {
  PrecisionContext ctx;
  ctx.bits = g.prec;
  ctx.nmax = g.nmax;
  ctx.height_bound = g.height;
  if (!g.tol.empty()) ctx.tol_override = Real::from_string(g.tol, g.prec + ctx.guard_bits);
  ctx.validate();
  return ctx;
}

HPoint point_arg(const std::string& s, const PrecisionContext& ctx) {
  return HPoint(parse_complex(s, ctx.work_bits() + 32));
}

Complex complex_arg(const std::string& s, const PrecisionContext& ctx) { return parse_complex(s, ctx.work_bits() + 32); }

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

int report_error(ErrorKind kind, const std::string& message, int code) {
  json e{{"error", std::string(to_string(kind))}, {"message", message}};
  std::cerr << e.dump(2) << "\n";
  return code;
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::invalid_argument:
    case ErrorKind::parse:
    case ErrorKind::io: return 2;
    default: return 1;
  }
}

json matrix_json(const PrimitiveIntMatrix& m) { return to_json(m); }

json solve_json(const SolveReport& rep, const KhovanskiiSystem& sys, const PrecisionContext& ctx, int digits) {
  json sols = json::array();
  for (const auto& s : rep.solutions) {
    JAssignment a;
    for (std::size_t k = 0; k < s.points.size(); ++k) a.emplace(static_cast<long>(k + 1), HPoint(s.points[k]));
    json e = to_json(s, digits);
    e["certificate"] = verify_certificate(sys, a, ctx);
    sols.push_back(std::move(e));
  }
  json sing = json::array();
  for (const auto& s : rep.singular) sing.push_back(to_json(s, digits));
  return json{{"starts", rep.starts}, {"solutions", sols}, {"singular", sing}};
}

json curve_json(const CurveReport& rep, int digits) {
  json sols = json::array(), sing = json::array(), boxes = json::array();
  for (const auto& s : rep.solutions) sols.push_back(to_json(s.points[0], digits));
  for (const auto& s : rep.singular) sing.push_back(to_json(s.points[0], digits));
  for (const auto& b : rep.top)
    boxes.push_back(json{{"box", b.box}, {"zero_count", b.count}, {"found", b.found}});
  return json{{"zeros", sols}, {"multiple_zeros", sing}, {"regions", boxes}, {"box_budget_exhausted", rep.exhausted}};
}

KhovanskiiSystem read_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::vector<std::string> eqs;
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      fail(ErrorKind::parse, path + ": " + e.what());
    }
    if (!j.contains("equations") || !j["equations"].is_array())
      fail(ErrorKind::parse, path + ": expected {\"equations\": [...]}");
    for (const auto& e : j["equations"]) eqs.push_back(e.get<std::string>());
  } else {
    std::istringstream ls(text);
    std::string line;
    while (std::getline(ls, line)) {
      auto h = line.find('#');
      if (h != std::string::npos) line.erase(h);
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      eqs.push_back(line);
    }
  }
  std::vector<JPoly> polys;
  for (const auto& e : eqs) polys.push_back(jp_parse(e));
  return KhovanskiiSystem::from_polys(std::move(polys));
}

std::vector<std::size_t> zero_based(const std::vector<long>& v) {
  std::vector<std::size_t> out;
  for (long x : v) {
    if (x < 1) fail(ErrorKind::invalid_argument, "point indices are 1-based");
    out.push_back(static_cast<std::size_t>(x - 1));
  }
  return out;
}

json orbit_list(const ClosureAnalysis& a, const std::vector<std::size_t>& ids) {
  json out = json::array();
  for (std::size_t b : ids) {
    json pts = json::array();
    for (std::size_t p : a.orbits()[b]) pts.push_back(p + 1);
    out.push_back(pts);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  Globals g;
  CLI::App app{"jmod: the j-function, modular polynomials, Khovanskii systems and closure geometry"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--prec", g.prec, "working precision in bits")->check(CLI::Range(64L, 1L << 20));
  app.add_option("--tol", g.tol, "tolerance (decimal); default 2^(-prec/2)");
  app.add_option("--nmax", g.nmax, "largest level searched for modular relations")->check(CLI::Range(1, 1000));
  app.add_option("--height", g.height, "height bound for integer relations")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "seed for sampled starts and random checks");
  app.add_option("--phi-cache", g.phi_cache, "modular-polynomial cache file (read if present, extended by phi compute)");
  app.add_flag("--json,!--no-json", g.json_out, "JSON output (the only format)");

  std::string z_text, x_text, y_text, file, file2, poly_text, op;
  long level = 0, order = 3, n_iter = 1;
  std::vector<std::string> points, base;
  std::vector<long> levels, point_ids;
  int grid = 6;
  double im_max = 10.0;
  std::size_t max_starts = 400;
  std::vector<double> box;
  int st_points = 100, st_fixtures = 50;

  auto* eval = app.add_subcommand("eval", "j, j', j'', j''' at a point");
  eval->add_option("z", z_text)->required();
  eval->add_option("--order", order)->check(CLI::Range(0L, 3L));

  auto* reduce = app.add_subcommand("reduce", "fundamental-domain representative and gamma");
  reduce->add_option("z", z_text)->required();

  auto* special = app.add_subcommand("special", "whether a point is special (CM)");
  special->add_option("z", z_text)->required();

  auto* phi = app.add_subcommand("phi", "classical modular polynomials");
  phi->require_subcommand(1);
  auto* phi_compute = phi->add_subcommand("compute", "compute Phi_N");
  phi_compute->add_option("N", level)->required();
  auto* phi_eval = phi->add_subcommand("eval", "evaluate Phi_N(x, y)");
  phi_eval->add_option("N", level)->required();
  phi_eval->add_option("x", x_text)->required();
  phi_eval->add_option("y", y_text)->required();
  auto* phi_import_cmd = phi->add_subcommand("import", "load and verify a cache file");
  phi_import_cmd->add_option("file", file)->required();
  auto* phi_export_cmd = phi->add_subcommand("export", "write Phi_N for the given levels");
  phi_export_cmd->add_option("file", file)->required();
  phi_export_cmd->add_option("levels", levels)->required();

  auto* indep = app.add_subcommand("indep", "modular independence of two points");
  indep->add_option("x", x_text)->required();
  indep->add_option("y", y_text)->required();

  auto* dimg = app.add_subcommand("dimg", "number of GL2(Q) orbits off the base");
  dimg->add_option("points", points)->required();
  dimg->add_option("--base", base, "base points");

  auto* solve = app.add_subcommand("solve", "Khovanskii systems and EC curves");
  solve->require_subcommand(1);
  auto add_solver_opts = [&](CLI::App* c) {
    c->add_option("--grid", grid, "starts per axis per variable")->check(CLI::Range(1, 64));
    c->add_option("--im-max", im_max, "top of the search strip");
    c->add_option("--max-starts", max_starts, "cap on sampled starts");
  };
  auto* solve_kh = solve->add_subcommand("khovanskii", "multi-start Newton on a system file");
  solve_kh->add_option("system", file)->required();
  add_solver_opts(solve_kh);
  auto* solve_curve = solve->add_subcommand("curve", "zeros of p(z, j(z)) in the strip");
  solve_curve->add_option("p", poly_text)->required();
  solve_curve->add_option("--box", box, "re_lo re_hi im_lo im_hi")->expected(4);
  add_solver_opts(solve_curve);
  auto* solve_exp = solve->add_subcommand("exp-curve", "zeros of p(z, exp z) in a box");
  solve_exp->add_option("p", poly_text)->required();
  solve_exp->add_option("--box", box, "re_lo re_hi im_lo im_hi")->expected(4);
  add_solver_opts(solve_exp);

  auto* iterj = app.add_subcommand("iterj", "solve z = j_n(z) + a");
  iterj->add_option("n", n_iter)->required()->check(CLI::Range(1L, 8L));
  iterj->add_option("a", x_text)->required();
  add_solver_opts(iterj);

  auto* config = app.add_subcommand("config", "closure geometry of a configuration file");
  config->add_option("file", file)->required();
  config->add_option("op", op, "validate | xi | delta | ssclosure | selfsufficient | submodular")
      ->required()
      ->check(CLI::IsMember({"validate", "xi", "delta", "ssclosure", "selfsufficient", "submodular"}));
  config->add_option("--points", point_ids, "1-based basis points (their orbits are used)");
  config->add_option("--with", file2, "second configuration (submodular)");

  auto* selftest = app.add_subcommand("selftest", "acceptance suite as deterministic JSON");
  selftest->add_option("--points", st_points, "random points in the identity suite")->check(CLI::Range(1, 10000));
  selftest->add_option("--fixtures", st_fixtures, "random closure fixtures")->check(CLI::Range(1, 10000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error(ErrorKind::invalid_argument, e.what(), 2);
  }

  try {
    const PrecisionContext ctx = make_context(g);
    const int digits = decimal_digits(ctx.bits);
    const long wb = ctx.work_bits();
    if (!g.phi_cache.empty() && std::filesystem::exists(g.phi_cache)) phi_import(g.phi_cache, ctx);
    SolveConfig cfg;
    cfg.seed = g.seed;
    cfg.grid = grid;
    cfg.im_max = im_max;
    cfg.max_starts = max_starts;
    if (box.size() == 4) cfg.box = std::array<double, 4>{box[0], box[1], box[2], box[3]};

    if (*eval) {
      HPoint z = point_arg(z_text, ctx);
      JJet jt = jet(z, ctx, static_cast<int>(order));
      json out{{"z", to_json(z.value(), digits)}};
      out["j"] = to_json(jt.j, digits);
      if (order >= 1) out["j1"] = to_json(jt.j1, digits);
      if (order >= 2) out["j2"] = to_json(jt.j2, digits);
      if (order >= 3) out["j3"] = to_json(jt.j3, digits);
      emit(out);
    } else if (*reduce) {
      HPoint z = point_arg(z_text, ctx);
      Reduction r = reduce_fundamental(z, ctx);
      emit(json{{"z", to_json(z.value(), digits)}, {"z0", to_json(r.z0.value(), digits)}, {"gamma", matrix_json(r.gamma)}});
    } else if (*special) {
      HPoint z = point_arg(z_text, ctx);
      auto q = is_special(z, ctx);
      json out{{"z", to_json(z.value(), digits)}, {"special", q.has_value()}};
      if (q) {
        out["form"] = json::array({q->a.get_str(), q->b.get_str(), q->c.get_str()});
        out["discriminant"] = q->discriminant().get_str();
      }
      emit(out);
    } else if (*phi) {
      if (*phi_compute) {
        ModularPolynomial p = compute_phi(level, ctx);
        json coeffs = json::array();
        for (const auto& [ij, c] : p.coeffs) coeffs.push_back(json::array({ij.first, ij.second, c.get_str()}));
        if (!g.phi_cache.empty()) phi_export(g.phi_cache, PhiCache::instance().levels(), ctx);
        emit(json{{"level", p.level}, {"degree", p.deg_x}, {"symmetric", p.symmetric()}, {"coefficients", coeffs}});
      } else if (*phi_eval) {
        Complex x = complex_arg(x_text, ctx), y = complex_arg(y_text, ctx);
        PhiValue v = phi_eval_full(level, x, y, ctx);
        Real scaled = abs(v.value) / v.scale;
        emit(json{{"level", level},
                  {"value", to_json(v.value, digits)},
                  {"scaled_residual", scaled.to_string(6)},
                  {"vanishes", scaled <= ctx.tol()}});
      } else if (*phi_import_cmd) {
        emit(json{{"imported", phi_import(file, ctx)}});
      } else if (*phi_export_cmd) {
        phi_export(file, levels, ctx);
        emit(json{{"exported", levels}, {"file", file}});
      }
    } else if (*indep) {
      Complex x = complex_arg(x_text, ctx), y = complex_arg(y_text, ctx);
      Independence r = modularly_independent(x, y, ctx);
      json out{{"independent", r.independent}, {"nmax", ctx.nmax}};
      if (r.witness) out["witness_level"] = *r.witness;
      emit(out);
    } else if (*dimg) {
      std::vector<HPoint> pts, bs;
      for (const auto& s : points) pts.push_back(point_arg(s, ctx));
      for (const auto& s : base) bs.push_back(point_arg(s, ctx));
      DimGResult r = dim_G(pts, bs, ctx);
      json blocks = json::array();
      for (const auto& b : r.partition.blocks) {
        json members = json::array();
        for (std::size_t k : b) members.push_back(k < pts.size() ? "p" + std::to_string(k + 1) : "b" + std::to_string(k - pts.size() + 1));
        blocks.push_back(members);
      }
      json wit = json::array();
      for (const auto& [ij, rel] : r.partition.witnesses)
        wit.push_back(json{{"i", ij.first + 1}, {"j", ij.second + 1}, {"g", to_json(rel.g)}, {"level", rel.n.get_str()}});
      emit(json{{"dim_g", r.dim}, {"blocks", blocks}, {"witnesses", wit}});
    } else if (*solve) {
      if (*solve_kh) {
        KhovanskiiSystem sys = read_system(file);
        emit(solve_json(newton_solve_report(sys, cfg, ctx), sys, ctx, digits));
      } else if (*solve_curve) {
        CurveSpec spec = CurveSpec::parse(poly_text);
        spec.validate();
        emit(curve_json(ec_curve_solve_report(spec, cfg, ctx), digits));
      } else if (*solve_exp) {
        CurveSpec spec = CurveSpec::parse(poly_text);
        spec.validate();
        emit(curve_json(ec_exp_solve_report(spec, cfg, ctx), digits));
      }
    } else if (*iterj) {
      std::optional<GaussQ> exact;
      Complex a = Complex::with_precision(wb);
      try {
        JPoly c = jp_parse(x_text);
        if (c.is_constant()) exact = c.constant_term();
      } catch (const Error&) {
      }
      a = exact ? exact->to_complex(wb + 32) : complex_arg(x_text, ctx);
      IteratedReport rep = solve_iterated(n_iter, a, cfg, ctx, exact);
      json out = solve_json(rep.solve, rep.system, ctx, digits);
      json comp = json::array();
      for (const auto& r : rep.composition_residuals) comp.push_back(r.to_string(6));
      json eqs = json::array();
      for (const auto& p : rep.system.polys) eqs.push_back(p.to_string() + " = 0");
      out["system"] = eqs;
      out["composition_residuals"] = comp;
      emit(out);
    } else if (*config) {
      Configuration c = config_load(file, ctx);
      if (op == "validate") {
        ValidationReport rep = validation_report(c, ctx);
        if (!rep.valid) {
          std::string msg = "configuration violates:";
          for (const auto& v : rep.violations) msg += "\n  " + v;
          json e{{"error", std::string(to_string(ErrorKind::validation))}, {"message", msg}, {"report", to_json(rep)}};
          std::cerr << e.dump(2) << "\n";
          return 1;
        }
        emit(json{{"report", to_json(rep)}, {"config", config_to_json(c, digits)}});
      } else if (op == "submodular") {
        if (file2.empty()) fail(ErrorKind::invalid_argument, "submodular needs --with <second config>");
        Configuration other = config_load(file2, ctx);
        SubmodularReport r = check_submodular(c, other, ctx);
        emit(json{{"A", to_json(r.a)},
                  {"B", to_json(r.b)},
                  {"A_union_B", to_json(r.a_union_b)},
                  {"A_cap_B", to_json(r.a_cap_b)},
                  {"holds", r.holds},
                  {"closed_up_to_orbits", r.closed_up}});
      } else {
        ClosureAnalysis a(c, ctx);
        json out{{"orbits", orbit_list(a, a.all_orbits())}};
        if (op == "xi") {
          out["xi"] = to_json(a.xi());
        } else if (op == "delta") {
          out["delta"] = to_json(a.delta());
        } else {
          auto ids = a.orbits_of_points(zero_based(point_ids));
          out["subset"] = orbit_list(a, ids);
          if (op == "selfsufficient") {
            out["self_sufficient"] = a.self_sufficient(ids);
          } else {
            auto cl = a.ss_closure(ids);
            out["closure"] = orbit_list(a, cl.orbits);
            out["delta"] = to_json(cl.report);
            out["dim_delta"] = cl.report.delta;
            if (cl.report.delta < 0) out["warning"] = negative_delta_warning;
          }
        }
        if (!a.validation().flags.empty()) out["flags"] = a.validation().flags;
        emit(out);
      }
    } else if (*selftest) {
      SelftestOptions o;
      o.seed = g.seed;
      o.identity_points = st_points;
      o.fixtures = st_fixtures;
      json r = run_selftest(ctx, o);
      emit(r);
      return r["passed"] == r["total"] ? 0 : 1;
    }
  } catch (const Error& e) {
    return report_error(e.kind(), e.what(), exit_code(e.kind()));
  } catch (const std::exception& e) {
    return report_error(ErrorKind::invalid_argument, e.what(), 2);
  }
  return 0;
}
