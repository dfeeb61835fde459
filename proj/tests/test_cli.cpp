#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "doctest.h"
#include "json.hpp"
#include "rhwz/version.hpp"

using namespace rhwz;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string data(const std::string& name) { return std::string(RHWZ_TEST_DATA) + "/" + name; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Run {
  int code;
  fs::path dir;
  std::string log;
  json result() const { return json::parse(slurp(dir / "result.json")); }
};

// Runs the built binary with a fresh output directory; stdout and stderr go to a log.
Run rhwz_run(const std::string& tag, const std::string& args) {
  fs::path dir = fs::path(RHWZ_TEST_OUT) / tag;
  fs::remove_all(dir);
  fs::create_directories(dir);
  fs::path log = dir / "log.txt";
  std::string cmd = std::string("\"") + RHWZ_CLI + "\" " + args + " --out \"" + dir.string() + "\" > \"" +
                    log.string() + "\" 2>&1";
  int status = std::system(cmd.c_str());
  int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return Run{code, dir, slurp(log)};
}

}  // namespace

TEST_CASE("config round trip") {
  for (const char* name : {"rank1.json", "rank2_n3.json", "rank2_n3_solved.json", "abelian.json"}) {
    auto cfg = load_config(data(name));
    std::string once = dump_config(cfg);
    auto again = parse_config(once);
    CHECK(dump_config(again) == once);
    CHECK(config_hash(again) == config_hash(cfg));
    CHECK(again.points == cfg.points);
    CHECK(again.weights == cfg.weights);
    CHECK(again.degree == cfg.degree);
    CHECK(again.residues.has_value() == cfg.residues.has_value());
  }
  // The hash tracks content.
  auto a = load_config(data("rank1.json"));
  auto b = a;
  b.solver.seed = 99;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("config validation") {
  try {
    load_config(data("missing_weights.json"));
    FAIL("expected a validation error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Validation);
    CHECK(std::string(e.what()).find("weights") != std::string::npos);
  }
  try {
    parse_config("{\n  \"points\": [[0, 0],\n}");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config(R"({"schema_version": 2, "points": [], "weights": [[0.5], [0.5]], "degree": -1})"),
                  Error);
}

TEST_CASE("exit code mapping") {
  CHECK(cli::exit_code(ErrorKind::Validation) == 2);
  CHECK(cli::exit_code(ErrorKind::Reducible) == 2);
  CHECK(cli::exit_code(ErrorKind::NonConvergence) == 3);
  CHECK(cli::exit_code(ErrorKind::UnreliableExtrapolation) == 3);
  CHECK(cli::exit_code(ErrorKind::Radius) == 3);
  CHECK(cli::exit_code(ErrorKind::RegularLocus) == 4);
  CHECK(cli::exit_code(ErrorKind::Hole) == 4);
}

TEST_CASE("monodromy command") {
  auto r = rhwz_run("mono1", "monodromy --config \"" + data("rank1.json") + "\"");
  REQUIRE(r.code == 0);
  auto j = r.result();
  CHECK(j["schema_version"] == kSchemaVersion);
  CHECK(j["command"] == "monodromy");
  CHECK(j["library_version"] == kVersion);
  CHECK(j["config_hash"] == config_hash(load_config(data("rank1.json"))));
  // Rank one: loop factors are exp(-2 pi i alpha_i).
  std::vector<double> alpha{0.3, 0.45, 0.25};
  for (int i = 0; i < 3; ++i) {
    auto f = j["loop_factors"][i][0][0];
    cd got(f[0].get<double>(), f[1].get<double>());
    CHECK(std::abs(got - std::exp(cd(0, -2 * kPi * alpha[i]))) <= 1e-8);
  }
  CHECK(j["relation_residual"].get<double>() <= 1e-8);

  // A solved rank-2 system reproduces its target.
  auto s = rhwz_run("mono2", "monodromy --config \"" + data("rank2_n3_solved.json") + "\"");
  REQUIRE(s.code == 0);
  CHECK(s.result()["relation_residual"].get<double>() <= 1e-7);
  CHECK(s.result()["distance_to_target"].get<double>() <= 1e-6);
}

TEST_CASE("rhsolve command and determinism") {
  std::string args = "rhsolve --config \"" + data("rank2_n3.json") + "\" --seed 1";
  auto a = rhwz_run("rh_a", args);
  auto b = rhwz_run("rh_b", args);
  REQUIRE(a.code == 0);
  auto j = a.result();
  CHECK(j["report"]["success"] == true);
  CHECK(j["report"]["large_cell_flag"] == true);
  CHECK(j["report"]["final_residual"].get<double>() <= 1e-6);
  CHECK(slurp(a.dir / "result.json") == slurp(b.dir / "result.json"));
  CHECK(slurp(a.dir / "residues.json") == slurp(b.dir / "residues.json"));
  // The written residues are a valid config.
  auto solved = load_config((a.dir / "residues.json").string());
  CHECK(solved.residues.has_value());
}

TEST_CASE("error exits") {
  CHECK(rhwz_run("err_weights", "monodromy --config \"" + data("missing_weights.json") + "\"").code == 2);
  auto red = rhwz_run("err_red", "rhsolve --config \"" + data("reducible.json") + "\"");
  CHECK(red.code == 2);
  CHECK(red.log.find("reducible") != std::string::npos);
  CHECK(rhwz_run("err_locus", "action --config \"" + data("nonregular.json") + "\"").code == 4);
  CHECK(rhwz_run("err_suite", "verify no-such-suite").code == 2);
  CHECK(rhwz_run("err_flag", "monodromy --no-such-flag").code == 2);
  CHECK(rhwz_run("err_file", "monodromy --config /nonexistent/config.json").code == 2);
}

TEST_CASE("action command on the abelian fixture") {
  std::string args = "action --config \"" + data("abelian.json") + "\"";
  auto a = rhwz_run("act_a", args);
  auto b = rhwz_run("act_b", args);
  REQUIRE(a.code == 0);
  double expected = json::parse(slurp(data("abelian.json")))["expected"]["action"].get<double>();
  double got = a.result()["value"].get<double>();
  CHECK(std::abs(got - expected) <= 1e-3 * std::abs(expected));
  CHECK(slurp(a.dir / "result.json") == slurp(b.dir / "result.json"));
  CHECK(slurp(a.dir / "deltas.csv") == slurp(b.dir / "deltas.csv"));
  auto csv = slurp(a.dir / "deltas.csv");
  CHECK(csv.rfind("delta,kinetic,topological,counterterm,total\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

TEST_CASE("verify command") {
  auto t = rhwz_run("ver_three", "verify three-form --count 100");
  CHECK(t.code == 0);
  CHECK(t.result()["passed"] == 100);
  auto b = rhwz_run("ver_bruhat", "verify bruhat --count 200");
  CHECK(b.code == 0);
  CHECK(b.result()["passed"] == 200);
}

TEST_CASE("surface command") {
  auto r = rhwz_run("surf", "surface --config \"" + data("surface_rank1.json") + "\"");
  REQUIRE(r.code == 0);
  auto j = r.result();
  REQUIRE(j["points"].size() == 1);
  CHECK(j["holes"] == 0);
  double expected = json::parse(slurp(data("abelian.json")))["expected"]["action"].get<double>();
  CHECK(std::abs(j["points"][0]["value"].get<double>() - expected) <= 1e-3 * std::abs(expected));
  auto csv = slurp(r.dir / "surface.csv");
  CHECK(csv.rfind("re_eps,im_eps,S,extrapolation_error,large_cell_flag\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
  CHECK(rhwz_run("surf_missing", "surface --config \"" + data("rank1.json") + "\"").code == 2);
}
