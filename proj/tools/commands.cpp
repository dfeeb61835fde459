#include "commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "json.hpp"
#include "rhwz/moduli.hpp"
#include "rhwz/verify.hpp"
#include "rhwz/version.hpp"

namespace rhwz::cli {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

namespace {

ordered cjson(cd z) { return ordered::array({z.real(), z.imag()}); }

ordered mjson(const CMatrix& m) {
  ordered rows = ordered::array();
  for (int a = 0; a < m.rows(); ++a) {
    ordered row = ordered::array();
    for (int b = 0; b < m.cols(); ++b) row.push_back(cjson(m(a, b)));
    rows.push_back(row);
  }
  return rows;
}

ordered spectrum(const CMatrix& m) {
  ordered s = ordered::array();
  for (cd v : eig_small(m, INFINITY).values) s.push_back(cjson(v));
  return s;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void apply_overrides(ProblemConfig& cfg, const RunContext& ctx) {
  if (ctx.seed) cfg.solver.seed = *ctx.seed;
  if (ctx.tol) cfg.solver.tol = *ctx.tol;
  cfg.solver.threads = ctx.threads;
}

ordered header(const std::string& command, const ProblemConfig* cfg) {
  ordered j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  j["library_version"] = kVersion;
  if (cfg) {
    j["config_hash"] = config_hash(*cfg);
    j["seed"] = cfg->solver.seed;
  }
  return j;
}

void write_file(const RunContext& ctx, const std::string& name, const std::string& text) {
  std::filesystem::create_directories(ctx.out_dir);
  std::ofstream out(std::filesystem::path(ctx.out_dir) / name, std::ios::binary);
  if (!out) throw Error(ErrorKind::Validation, "cannot write " + name + " in " + ctx.out_dir);
  out << text;
}

int finish(const RunContext& ctx, const ordered& result, int code) {
  std::string text = result.dump(2) + "\n";
  write_file(ctx, "result.json", text);
  std::cout << text;
  return code;
}

ordered report_json(const SolveReport& r) {
  ordered j;
  j["success"] = r.success;
  j["final_residual"] = r.final_residual;
  j["iterations"] = r.iterations;
  j["history"] = r.history;
  j["infinity_spectrum_error"] = r.infinity_spectrum_error;
  j["relation_residual"] = r.relation_residual;
  j["large_cell_flag"] = r.large_cell_flag;
  j["seed_used"] = r.seed_used;
  j["restart_index"] = r.restart_index;
  j["warnings"] = r.warnings;
  return j;
}

FuchsianSystem config_system(const ProblemConfig& cfg) {
  FuchsianSystem sys{config_weights(cfg), *cfg.residues};
  for (const auto& a : sys.residues)
    if (a.rows() != sys.rank() || a.cols() != sys.rank())
      throw Error(ErrorKind::Validation, "config field 'residues': matrix shape does not match the rank");
  return sys;
}

}  // namespace

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::RegularLocus:
    case ErrorKind::Hole:
      return 4;
    case ErrorKind::NonConvergence:
    case ErrorKind::Stiffness:
    case ErrorKind::Radius:
    case ErrorKind::UnreliableExtrapolation:
      return 3;
    default:
      return 2;
  }
}

int cmd_monodromy(ProblemConfig cfg, const RunContext& ctx) {
  apply_overrides(cfg, ctx);
  auto j = header("monodromy", &cfg);
  // Rank one is rigid: A_i = alpha_i.
  bool rigid = !cfg.residues && cfg.weights.size() > 0 && cfg.weights[0].size() == 1;
  if (cfg.residues || rigid) {
    FuchsianSystem sys{config_weights(cfg), {}};
    if (rigid)
      for (int i = 0; i + 1 < sys.weights.n(); ++i) sys.residues.push_back(sys.weights.W(i));
    else
      sys = config_system(cfg);
    auto mono = monodromy_rep(sys, default_basepoint(sys.weights.points), cfg.solver.transport_tol);
    j["source"] = rigid ? "rigid" : "residues";
    j["basepoint"] = cjson(mono.basepoint);
    ordered gens = ordered::array(), loops = ordered::array(), spec = ordered::array(), lspec = ordered::array();
    for (size_t i = 0; i < mono.generators.size(); ++i) {
      gens.push_back(mjson(mono.generators[i]));
      loops.push_back(mjson(mono.loop_factors[i]));
      spec.push_back(spectrum(mono.generators[i]));
      lspec.push_back(spectrum(mono.loop_factors[i]));
    }
    j["generators"] = gens;
    j["generator_spectra"] = spec;
    j["loop_factors"] = loops;
    j["loop_factor_spectra"] = lspec;
    j["relation_residual"] = mono.relation_residual;
    j["det_residual"] = mono.det_residual;
    j["steps"] = mono.steps;
    if (cfg.conjugators || sys.rank() == 1 || (sys.rank() == 2 && sys.weights.n() == 3))
      j["distance_to_target"] = monodromy_distance(sys, config_target(cfg), cfg.solver.transport_tol);
  } else {
    auto rep = config_target(cfg);
    j["source"] = "representation";
    ordered gens = ordered::array(), spec = ordered::array();
    for (const auto& g : rep.generators) {
      gens.push_back(mjson(g));
      spec.push_back(spectrum(g));
    }
    j["generators"] = gens;
    j["generator_spectra"] = spec;
    j["relation_residual"] = rep.relation_residual();
    j["warnings"] = rep.warnings;
  }
  return finish(ctx, j, 0);
}

int cmd_rhsolve(ProblemConfig cfg, const RunContext& ctx) {
  apply_overrides(cfg, ctx);
  auto target = config_target(cfg);
  auto j = header("rhsolve", &cfg);
  auto res = solve(target.weights, target, std::nullopt, cfg.solver);
  j["report"] = report_json(res.report);
  const FuchsianSystem& sys = res.normalization ? res.normalization->canonical : res.system;
  ordered resid = ordered::array();
  for (const auto& a : sys.residues) resid.push_back(mjson(a));
  j["residues"] = resid;
  j["canonical"] = res.normalization.has_value();
  if (res.normalization) {
    j["G"] = mjson(res.normalization->G);
    j["normalization_consistency"] = res.normalization->consistency;
    j["normalization_warnings"] = res.normalization->warnings;
  }
  ProblemConfig solved = cfg;
  solved.residues = sys.residues;
  write_file(ctx, "residues.json", dump_config(solved));
  return finish(ctx, j, res.report.success ? 0 : 3);
}

int cmd_action(ProblemConfig cfg, const RunContext& ctx) {
  apply_overrides(cfg, ctx);
  auto j = header("action", &cfg);
  InfinityNormalization norm;
  if (cfg.residues) {
    norm = normalize_at_infinity(config_system(cfg), cfg.solver.transport_tol);
  } else {
    auto target = config_target(cfg);
    auto res = solve(target.weights, target, std::nullopt, cfg.solver);
    j["report"] = report_json(res.report);
    if (!res.report.success || !res.normalization)
      throw Error(ErrorKind::NonConvergence, "the Riemann-Hilbert solve did not converge");
    norm = *res.normalization;
  }
  j["large_cell_flag"] = norm.large_cell_flag;
  if (!norm.large_cell_flag)
    throw Error(ErrorKind::RegularLocus, "solution is outside the regular locus (large-cell flag false)");
  auto field = MetricField::from_normalization(norm, cfg.solver.transport_tol);
  auto a = action_regularized(field, cfg.action.deltas, config_quadrature(cfg, ctx.threads), nullptr);
  j["value"] = a.value;
  j["extrapolation_error"] = a.extrapolation_error;
  j["kappa"] = a.kappa;
  j["counterterm_K1"] = a.K1;
  j["counterterm_K2"] = a.K2;
  j["kinetic_part"] = a.kinetic_part;
  j["topological_part"] = a.topological_part;
  j["imag_part"] = a.imag_part;
  j["fit_C"] = a.fit_C;
  j["nodes"] = a.nodes;
  ordered rows = ordered::array();
  std::string csv = "delta,kinetic,topological,counterterm,total\n";
  for (const auto& d : a.per_delta) {
    rows.push_back({{"delta", d.delta}, {"kinetic", d.kinetic}, {"topological", d.topological},
                    {"counterterm", d.counterterm}, {"total", d.total}});
    csv += fmt(d.delta) + "," + fmt(d.kinetic) + "," + fmt(d.topological) + "," + fmt(d.counterterm) + "," +
           fmt(d.total) + "\n";
  }
  j["per_delta"] = rows;
  j["warnings"] = a.warnings;
  write_file(ctx, "deltas.csv", csv);
  return finish(ctx, j, 0);
}

int cmd_surface(ProblemConfig cfg, const RunContext& ctx) {
  apply_overrides(cfg, ctx);
  if (!cfg.surface) throw Error(ErrorKind::Validation, "config field 'surface': missing");
  auto target = config_target(cfg);
  Rng rng(cfg.surface->direction_seed);
  RepFamily family{target, random_direction(target.weights, rng), cfg.surface->radius};
  SurfaceOptions so;
  so.solver = cfg.solver;
  so.quadrature = config_quadrature(cfg, ctx.threads);
  so.deltas = cfg.action.deltas;
  auto pts = action_surface(family, cfg.surface->grid, so);
  auto j = header("surface", &cfg);
  ordered rows = ordered::array();
  std::string csv = "re_eps,im_eps,S,extrapolation_error,large_cell_flag\n";
  int holes = 0;
  for (const auto& p : pts) {
    ordered row;
    row["eps"] = cjson(p.eps);
    row["value"] = p.hole ? ordered(nullptr) : ordered(p.value);
    row["extrapolation_error"] = p.hole ? ordered(nullptr) : ordered(p.extrapolation_error);
    row["large_cell_flag"] = p.large_cell_flag;
    row["hole"] = p.hole;
    if (!p.note.empty()) row["note"] = p.note;
    rows.push_back(row);
    holes += p.hole;
    csv += fmt(p.eps.real()) + "," + fmt(p.eps.imag()) + "," + (p.hole ? "nan" : fmt(p.value)) + "," +
           (p.hole ? "nan" : fmt(p.extrapolation_error)) + "," + (p.large_cell_flag ? "1" : "0") + "\n";
  }
  j["points"] = rows;
  j["holes"] = holes;
  write_file(ctx, "surface.csv", csv);
  return finish(ctx, j, 0);
}

int cmd_verify(const std::string& suite, int count, const RunContext& ctx) {
  std::uint64_t seed = ctx.seed.value_or(1);
  if (count < 0) count = default_count(suite);
  auto rep = run_suite(suite, count, seed, ctx.threads);
  auto j = header("verify", nullptr);
  j["suite"] = rep.suite;
  j["seed"] = seed;
  j["count"] = rep.count;
  j["passed"] = rep.passed;
  j["worst"] = rep.worst;
  j["tolerance"] = rep.tolerance;
  j["failures"] = rep.failures;
  j["pass"] = rep.ok();
  return finish(ctx, j, rep.ok() ? 0 : 1);
}

}  // namespace rhwz::cli
