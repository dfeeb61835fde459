#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "commands.hpp"
#include "rhwz/verify.hpp"
#include "rhwz/version.hpp"

using namespace rhwz;

int main(int argc, char** argv) {
  CLI::App app{"Riemann-Hilbert solver and regularized WZNW action on the punctured sphere"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config_path;
  cli::RunContext ctx;
  std::uint64_t seed = 0;
  double tol = 0;
  int threads = 0;
  int count = -1;
  std::string suite;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", config_path, "problem configuration (JSON)");
    if (needs_config) c->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "random seed (overrides solver.seed)");
    sub->add_option("--tol", tol, "solver tolerance (overrides solver.tol)");
    sub->add_option("--out", ctx.out_dir, "output directory")->capture_default_str();
    sub->add_option("--threads", threads, "worker threads (default: hardware concurrency)");
  };
  auto* mono = app.add_subcommand("monodromy", "monodromy of configured residues or representation");
  auto* rh = app.add_subcommand("rhsolve", "solve the Riemann-Hilbert problem for the configured target");
  auto* act = app.add_subcommand("action", "regularized WZNW action of the solved system");
  auto* surf = app.add_subcommand("surface", "action over a grid of a one-parameter family");
  auto* ver = app.add_subcommand("verify", "run a property suite");
  for (auto* s : {mono, rh, act, surf}) add_common(s, true);
  add_common(ver, false);
  ver->add_option("suite", suite, "bruhat, cholesky, three-form, flatness or counterterm")->required();
  ver->add_option("--count", count, "number of samples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  for (auto* s : {mono, rh, act, surf, ver}) {
    if (!s->parsed()) continue;
    if (s->count("--seed")) ctx.seed = seed;
    if (s->count("--tol")) ctx.tol = tol;
  }
  ctx.threads = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  try {
    if (ver->parsed()) {
      auto names = suite_names();
      if (std::find(names.begin(), names.end(), suite) == names.end()) {
        std::cerr << "usage: unknown suite '" << suite << "'\n";
        return 2;
      }
      return cli::cmd_verify(suite, count, ctx);
    }
    auto cfg = load_config(config_path);
    if (mono->parsed()) return cli::cmd_monodromy(cfg, ctx);
    if (rh->parsed()) return cli::cmd_rhsolve(cfg, ctx);
    if (act->parsed()) return cli::cmd_action(cfg, ctx);
    return cli::cmd_surface(cfg, ctx);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
