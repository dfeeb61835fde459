#pragma once

#include <optional>
#include <string>

#include "rhwz/config.hpp"

namespace rhwz::cli {

struct RunContext {
  std::string out_dir = ".";
  int threads = 1;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
};

// Each command writes its files into out_dir and returns the process exit code.
int cmd_monodromy(ProblemConfig cfg, const RunContext& ctx);
int cmd_rhsolve(ProblemConfig cfg, const RunContext& ctx);
int cmd_action(ProblemConfig cfg, const RunContext& ctx);
int cmd_surface(ProblemConfig cfg, const RunContext& ctx);
int cmd_verify(const std::string& suite, int count, const RunContext& ctx);

// 2 validation, 3 non-convergence, 4 regular-locus violation.
int exit_code(ErrorKind kind);

}  // namespace rhwz::cli
