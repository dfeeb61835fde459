#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rhwz/fuchs.hpp"
#include "rhwz/rhsolve.hpp"
#include "rhwz/wznw.hpp"

namespace rhwz {

struct ActionConfig {
  std::vector<double> deltas{0.1, 0.05, 0.025, 0.0125};
  int angular_nodes = 64;
  int radial_order = 8;
  int quadrature_depth = 7;
  double cell_tol = 1e-9;
};

struct SurfaceConfig {
  std::vector<cd> grid;
  std::uint64_t direction_seed = 1;
  double radius = 0.5;
};

// Everything a command needs; complex numbers are [re, im] pairs and matrices are row-major.
struct ProblemConfig {
  int schema_version = 1;
  std::vector<cd> points;
  std::vector<std::vector<double>> weights;
  int degree = 0;
  std::optional<std::vector<CMatrix>> conjugators;  // U_1..U_{n-1}
  std::optional<std::vector<CMatrix>> residues;     // A_1..A_{n-1}
  SolverOptions solver;
  ActionConfig action;
  std::optional<SurfaceConfig> surface;
};

ProblemConfig parse_config(const std::string& text);
ProblemConfig load_config(const std::string& path);
std::string dump_config(const ProblemConfig& cfg);
// FNV-1a 64 of the canonical dump, as 16 hex digits.
std::string config_hash(const ProblemConfig& cfg);

WeightSystem config_weights(const ProblemConfig& cfg);
// The configured representation; without one, rank 1 uses trivial conjugators and the
// rank-2 three-point case uses the closed-form hypergeometric triple.
AdmissibleRep config_target(const ProblemConfig& cfg);
QuadratureOptions config_quadrature(const ProblemConfig& cfg, int threads);

}  // namespace rhwz
