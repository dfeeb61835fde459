#include "rhwz/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rhwz/version.hpp"

namespace rhwz {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& what) {
  throw Error(ErrorKind::Validation, "config field '" + field + "': " + what);
}

const json& need(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) bad(path + key, "missing");
  return j.at(key);
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) bad(field, "expected a number");
  return j.get<double>();
}

long long integer(const json& j, const std::string& field) {
  if (!j.is_number_integer()) bad(field, "expected an integer");
  return j.get<long long>();
}

cd complex(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2) bad(field, "expected [re, im]");
  return {number(j[0], field + "[0]"), number(j[1], field + "[1]")};
}

CMatrix matrix(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) bad(field, "expected a nonempty list of rows");
  const int rows = static_cast<int>(j.size());
  const int cols = j[0].is_array() ? static_cast<int>(j[0].size()) : 0;
  if (rows > 8 || cols > 8 || cols == 0) bad(field, "matrix shape out of range");
  CMatrix m(rows, cols);
  for (int a = 0; a < rows; ++a) {
    if (!j[a].is_array() || static_cast<int>(j[a].size()) != cols) bad(field, "ragged matrix");
    for (int b = 0; b < cols; ++b)
      m(a, b) = complex(j[a][b], field + "[" + std::to_string(a) + "][" + std::to_string(b) + "]");
  }
  return m;
}

std::vector<CMatrix> matrices(const json& j, const std::string& field) {
  if (!j.is_array()) bad(field, "expected a list of matrices");
  std::vector<CMatrix> out;
  for (size_t k = 0; k < j.size(); ++k) out.push_back(matrix(j[k], field + "[" + std::to_string(k) + "]"));
  return out;
}

json to_json(cd z) { return json::array({z.real(), z.imag()}); }

json to_json(const CMatrix& m) {
  json rows = json::array();
  for (int a = 0; a < m.rows(); ++a) {
    json row = json::array();
    for (int b = 0; b < m.cols(); ++b) row.push_back(to_json(m(a, b)));
    rows.push_back(row);
  }
  return rows;
}

template <class F>
void optional_field(const json& obj, const char* key, const std::string& path, F&& f) {
  if (obj.contains(key)) f(obj.at(key), path + key);
}

}  // namespace

ProblemConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    size_t line = 1, col = 1;
    for (size_t k = 0; k < std::min(e.byte, text.size() + 1) && k + 1 < e.byte; ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorKind::Validation, "config parse error at line " + std::to_string(line) + ", column " +
                                           std::to_string(col));
  }
  if (!j.is_object()) bad("", "top level must be an object");
  ProblemConfig c;
  c.schema_version = static_cast<int>(integer(need(j, "schema_version", ""), "schema_version"));
  if (c.schema_version != kSchemaVersion) bad("schema_version", "unsupported version " + std::to_string(c.schema_version));

  const json& pts = need(j, "points", "");
  if (!pts.is_array()) bad("points", "expected a list of [re, im]");
  for (size_t k = 0; k < pts.size(); ++k) c.points.push_back(complex(pts[k], "points[" + std::to_string(k) + "]"));
  const json& w = need(j, "weights", "");
  if (!w.is_array()) bad("weights", "expected an n x r list");
  for (size_t k = 0; k < w.size(); ++k) {
    std::string f = "weights[" + std::to_string(k) + "]";
    if (!w[k].is_array()) bad(f, "expected a list of weights");
    std::vector<double> row;
    for (size_t q = 0; q < w[k].size(); ++q) row.push_back(number(w[k][q], f + "[" + std::to_string(q) + "]"));
    c.weights.push_back(row);
  }
  c.degree = static_cast<int>(integer(need(j, "degree", ""), "degree"));

  optional_field(j, "representation", "", [&](const json& r, const std::string& p) {
    c.conjugators = matrices(need(r, "conjugators", p + "."), p + ".conjugators");
  });
  optional_field(j, "residues", "", [&](const json& r, const std::string& p) { c.residues = matrices(r, p); });
  optional_field(j, "solver", "", [&](const json& s, const std::string& p) {
    std::string q = p + ".";
    optional_field(s, "tol", q, [&](const json& v, const std::string& f) { c.solver.tol = number(v, f); });
    optional_field(s, "maxIter", q, [&](const json& v, const std::string& f) { c.solver.max_iter = static_cast<int>(integer(v, f)); });
    optional_field(s, "restarts", q, [&](const json& v, const std::string& f) { c.solver.restarts = static_cast<int>(integer(v, f)); });
    optional_field(s, "seed", q, [&](const json& v, const std::string& f) {
      if (!v.is_number_unsigned()) bad(f, "expected a nonnegative integer");
      c.solver.seed = v.get<std::uint64_t>();
    });
    optional_field(s, "transportTol", q, [&](const json& v, const std::string& f) { c.solver.transport_tol = number(v, f); });
  });
  optional_field(j, "action", "", [&](const json& a, const std::string& p) {
    std::string q = p + ".";
    optional_field(a, "deltas", q, [&](const json& v, const std::string& f) {
      if (!v.is_array()) bad(f, "expected a list of numbers");
      c.action.deltas.clear();
      for (size_t k = 0; k < v.size(); ++k) c.action.deltas.push_back(number(v[k], f + "[" + std::to_string(k) + "]"));
    });
    optional_field(a, "angularNodes", q, [&](const json& v, const std::string& f) { c.action.angular_nodes = static_cast<int>(integer(v, f)); });
    optional_field(a, "radialOrder", q, [&](const json& v, const std::string& f) { c.action.radial_order = static_cast<int>(integer(v, f)); });
    optional_field(a, "quadratureDepth", q, [&](const json& v, const std::string& f) { c.action.quadrature_depth = static_cast<int>(integer(v, f)); });
    optional_field(a, "cellTol", q, [&](const json& v, const std::string& f) { c.action.cell_tol = number(v, f); });
  });
  optional_field(j, "surface", "", [&](const json& s, const std::string& p) {
    SurfaceConfig sc;
    const json& g = need(s, "grid", p + ".");
    if (!g.is_array()) bad(p + ".grid", "expected a list of [re, im]");
    for (size_t k = 0; k < g.size(); ++k) sc.grid.push_back(complex(g[k], p + ".grid[" + std::to_string(k) + "]"));
    optional_field(s, "directionSeed", p + ".", [&](const json& v, const std::string& f) {
      if (!v.is_number_unsigned()) bad(f, "expected a nonnegative integer");
      sc.direction_seed = v.get<std::uint64_t>();
    });
    optional_field(s, "radius", p + ".", [&](const json& v, const std::string& f) { sc.radius = number(v, f); });
    c.surface = sc;
  });
  // Enforce the weight-system invariants at load.
  config_weights(c);
  if (c.residues && static_cast<int>(c.residues->size()) != static_cast<int>(c.points.size()))
    bad("residues", "expected one matrix per finite point");
  if (c.conjugators && static_cast<int>(c.conjugators->size()) != static_cast<int>(c.points.size()))
    bad("representation.conjugators", "expected one matrix per finite point");
  return c;
}

ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Validation, "cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const ProblemConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["points"] = json::array();
  for (cd z : c.points) j["points"].push_back(to_json(z));
  j["weights"] = c.weights;
  j["degree"] = c.degree;
  if (c.conjugators) {
    json m = json::array();
    for (const auto& u : *c.conjugators) m.push_back(to_json(u));
    j["representation"] = {{"conjugators", m}};
  }
  if (c.residues) {
    json m = json::array();
    for (const auto& a : *c.residues) m.push_back(to_json(a));
    j["residues"] = m;
  }
  j["solver"] = {{"tol", c.solver.tol},
                 {"maxIter", c.solver.max_iter},
                 {"restarts", c.solver.restarts},
                 {"seed", c.solver.seed},
                 {"transportTol", c.solver.transport_tol}};
  j["action"] = {{"deltas", c.action.deltas},
                 {"angularNodes", c.action.angular_nodes},
                 {"radialOrder", c.action.radial_order},
                 {"quadratureDepth", c.action.quadrature_depth},
                 {"cellTol", c.action.cell_tol}};
  if (c.surface) {
    json g = json::array();
    for (cd z : c.surface->grid) g.push_back(to_json(z));
    j["surface"] = {{"grid", g}, {"directionSeed", c.surface->direction_seed}, {"radius", c.surface->radius}};
  }
  return j.dump(2) + "\n";
}

std::string config_hash(const ProblemConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : dump_config(c)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

WeightSystem config_weights(const ProblemConfig& c) { return build_weight_system(c.points, c.weights, c.degree); }

AdmissibleRep config_target(const ProblemConfig& c) {
  auto ws = config_weights(c);
  if (c.conjugators) return build_admissible_rep(ws, *c.conjugators);
  if (ws.rank() == 1) return build_admissible_rep(ws, std::vector<CMatrix>(ws.n() - 1, identity(1)));
  if (ws.rank() == 2 && ws.n() == 3) return build_admissible_rep(ws, hypergeometric_conjugators(ws));
  bad("representation", "required unless rank 1 or rank 2 with three points");
}

QuadratureOptions config_quadrature(const ProblemConfig& c, int threads) {
  QuadratureOptions o;
  o.angular_nodes = c.action.angular_nodes;
  o.radial_order = c.action.radial_order;
  o.max_depth = c.action.quadrature_depth;
  o.cell_tol = c.action.cell_tol;
  o.transport_tol = c.solver.transport_tol;
  o.threads = threads;
  return o;
}

}  // namespace rhwz
