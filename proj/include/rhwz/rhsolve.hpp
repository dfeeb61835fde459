#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rhwz/fuchs.hpp"

namespace rhwz {

// C_i = B_i exp(K_i) with K_i zero on the diagonal; params hold Re/Im of the off-diagonal entries.
struct ResidueParametrization {
  std::vector<CMatrix> base;
  Eigen::VectorXd params;

  static ResidueParametrization at(const std::vector<CMatrix>& base);
  static ResidueParametrization random(const WeightSystem& ws, Rng& rng);
  // Chart centred at an existing system: B_i = eigenvector matrix of A_i.
  static ResidueParametrization from_system(const FuchsianSystem& sys);

  int size() const { return static_cast<int>(params.size()); }
  std::vector<CMatrix> frames() const;
  FuchsianSystem system(const WeightSystem& ws) const;
  // Re-centre the chart at the current point (params -> 0).
  ResidueParametrization recentred() const;
};

struct SolverOptions {
  double tol = 1e-6;
  int max_iter = 200;
  int restarts = 10;
  std::uint64_t seed = 1;
  double transport_tol = 1e-11;
  double fd_step = 1e-6;
  double spectrum_weight = 10.0;
  double initial_damping = 1e-3;
  double stop_residual = 1e-10;
  int threads = 1;
};

struct SolveReport {
  double final_residual = INFINITY;
  int iterations = 0;
  std::vector<double> history;
  double infinity_spectrum_error = INFINITY;
  double relation_residual = INFINITY;
  bool large_cell_flag = false;
  bool success = false;
  std::uint64_t seed_used = 0;
  int restart_index = -1;
  std::vector<std::string> warnings;
};

struct NormalizedMonodromy {
  AdmissibleRep rep;
  CMatrix K;                       // rho' = K^{-1} rho K is unitary with rho'_n diagonal
  double unitarity_residual = 0;
};

NormalizedMonodromy normalize_monodromy(const MonodromyResult& mono, const WeightSystem& ws);

Eigen::VectorXd residual_vector(const FuchsianSystem& sys, const AdmissibleRep& target, const SolverOptions& opts);
Eigen::VectorXd residual_vector(const ResidueParametrization& params, const AdmissibleRep& target,
                                const SolverOptions& opts);

struct InfinityNormalization {
  CMatrix G;        // Richardson estimate of lim Y(z) z^{-Lambda}
  CMatrix G_R, G_2R;
  double consistency = 0;  // |G_R - G_2R| / |G|
  bool large_cell_flag = false;
  CMatrix S;        // left normalization, S G = Pi0
  CMatrix K;        // right normalization making the monodromy unitary
  FuchsianSystem canonical;
  CMatrix Y0;       // canonical solution at the basepoint
  cd basepoint;
  double radius = 0;
  std::vector<std::string> warnings;
};

InfinityNormalization normalize_at_infinity(const FuchsianSystem& sys, double transport_tol = 1e-11,
                                            const std::optional<MonodromyResult>& mono = std::nullopt);

struct SolveResult {
  FuchsianSystem system;
  SolveReport report;
  ResidueParametrization params;
  std::optional<InfinityNormalization> normalization;
};

// Final residual of a system against a target: rep_distance of its normalized monodromy.
double monodromy_distance(const FuchsianSystem& sys, const AdmissibleRep& target, double transport_tol,
                          double* relation_residual = nullptr);

SolveResult solve(const WeightSystem& ws, const AdmissibleRep& target,
                  const std::optional<ResidueParametrization>& init = std::nullopt, const SolverOptions& opts = {});

}  // namespace rhwz
