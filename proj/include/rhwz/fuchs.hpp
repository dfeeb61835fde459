#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rhwz/factor.hpp"
#include "rhwz/numcore.hpp"

namespace rhwz {

struct WeightSystem {
  std::vector<cd> points;                    // z_1..z_{n-1}; z_n = infinity
  std::vector<std::vector<double>> weights;  // n rows, r increasing entries in (0,1)
  int degree = 0;
  SplittingType splitting;
  std::vector<double> infinity_exponents;    // alpha_nj + m'_j, m' = reversed m

  int n() const { return static_cast<int>(weights.size()); }
  int rank() const { return weights.empty() ? 0 : static_cast<int>(weights[0].size()); }
  CMatrix W(int i) const;                    // diag(alpha_i), 0-based point index
  CMatrix Lambda() const;                    // diag(infinity_exponents)
  double K1() const;
  double K2() const;
};

WeightSystem build_weight_system(const std::vector<cd>& points, const std::vector<std::vector<double>>& weights, int degree);

struct AdmissibleRep {
  WeightSystem weights;
  std::vector<CMatrix> generators;   // M_1..M_n, M_n diagonal
  std::vector<CMatrix> conjugators;  // U_1..U_n, U_n = I
  std::vector<std::string> warnings;

  int n() const { return static_cast<int>(generators.size()); }
  int rank() const { return weights.rank(); }
  double relation_residual() const;
};

AdmissibleRep build_admissible_rep(const WeightSystem& ws, const std::vector<CMatrix>& conjugators);

// Dimension of the joint commutant of the matrices; 1 means irreducible.
int commutant_dimension(const std::vector<CMatrix>& mats, double tol = 1e-8);
bool is_irreducible(const AdmissibleRep& rep);

// Rank 2, n = 3: U_1 = I, U_2 a real rotation solving the closure condition.
std::vector<CMatrix> hypergeometric_conjugators(const WeightSystem& ws);

struct RepDistance {
  double value = 0;
  std::vector<double> phases;  // gauge g = diag(e^{i phi})
  std::vector<std::string> warnings;
};

RepDistance rep_distance_detail(const AdmissibleRep& a, const AdmissibleRep& b);
double rep_distance(const AdmissibleRep& a, const AdmissibleRep& b);

struct FuchsianSystem {
  WeightSystem weights;
  std::vector<CMatrix> residues;  // A_1..A_{n-1}

  int rank() const { return weights.rank(); }
  CMatrix A(cd z) const;
  cd trace_A(cd z) const;
  CMatrix residue_at_infinity() const;  // A_n = -(A_1 + ... + A_{n-1})
  // max deviation of spec(A_i) from the weights, i < n
  double residue_spectrum_error() const;
  // max deviation of spec(A_n) from the infinity exponents
  double infinity_spectrum_error() const;
};

// ----- paths and transport

struct PathSegment {
  enum class Kind { Line, Arc, LogRay };
  Kind kind = Kind::Line;
  cd a, b;             // line endpoints
  cd center;           // arc / ray center
  double radius = 0;   // arc
  double t0 = 0, t1 = 0;  // arc angles, or ray log-radii
  double theta = 0;    // ray direction

  static PathSegment line(cd a, cd b);
  static PathSegment arc(cd center, double radius, double theta0, double theta1);
  static PathSegment log_ray(cd center, double theta, double rho0, double rho1);

  cd z(double s) const;   // s in [0, 1]
  cd dz(double s) const;
  cd start() const { return z(0.0); }
  cd end() const { return z(1.0); }
  double length() const;
  double distance_to(cd p) const;
  // exact integral of 1/(z - p) along the segment
  cd log_increment(cd p) const;
};

using Path = std::vector<PathSegment>;

struct TransportOptions {
  double tol = 1e-10;
  double r_min = -1;        // negative: 0.05 * min pairwise distance
  long max_steps = 2000000;
  double min_step = 1e-13;  // relative to the segment parameter
};

struct TransportResult {
  CMatrix value;
  long step_count = 0;
  double error_estimate = 0;
  double det_residual = 0;  // |log det value - log det start + int tr A dz|
};

double default_r_min(const std::vector<cd>& points);
void check_path_clearance(const std::vector<cd>& points, const Path& path, double r_min);

TransportResult transport(const FuchsianSystem& sys, const Path& path, const CMatrix& start,
                          const TransportOptions& opts = {});

// Adaptive Dormand-Prince integration of Y' = -A(z(s)) z'(s) Y along one segment.
CMatrix transport_segment(const FuchsianSystem& sys, const PathSegment& seg, const CMatrix& start, double tol,
                          long* steps = nullptr, double* err = nullptr, long max_steps = 2000000, double min_step = 1e-13);

cd default_basepoint(const std::vector<cd>& points);
void check_generator_order(const std::vector<cd>& points, cd basepoint);
Path loop_path(const std::vector<cd>& points, int i, cd basepoint);
Path infinity_loop(const std::vector<cd>& points, cd basepoint);

struct MonodromyResult {
  std::vector<CMatrix> loop_factors;  // T_i: continuation of Y along loop i equals Y T_i, Y(basepoint) = I
  std::vector<CMatrix> generators;    // rho_i = T_i^{-1}; rho_1 ... rho_n = I
  double relation_residual = 0;
  cd basepoint;
  long steps = 0;
  double det_residual = 0;
};

MonodromyResult monodromy_rep(const FuchsianSystem& sys, std::optional<cd> basepoint = std::nullopt,
                              double tol = 1e-10, bool infinity_loop = true);

}  // namespace rhwz
