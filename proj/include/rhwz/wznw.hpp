#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rhwz/fuchs.hpp"
#include "rhwz/rhsolve.hpp"

namespace rhwz {

struct MetricSample {
  CMatrix h;
  CMatrix A;
  CMatrix Y;
};

// h = (Y Y^*)^{-1} for the solution Y of Y' = -A Y with Y(basepoint) = Y0.
class MetricField {
 public:
  MetricField(FuchsianSystem system, cd basepoint, CMatrix Y0, bool canonical, double tol = 1e-11);
  static MetricField from_normalization(const InfinityNormalization& norm, double tol = 1e-11);

  const FuchsianSystem& system() const { return sys_; }
  cd basepoint() const { return z0_; }
  const CMatrix& Y0() const { return Y0_; }
  bool canonical() const { return canonical_; }
  double tol() const { return tol_; }

  // Solution continued from the basepoint along a route that keeps clear of the points.
  CMatrix solution_at(cd z) const;
  CMatrix continue_solution(const CMatrix& Y, cd from, cd to, double r_min = 0) const;
  MetricSample sample(const CMatrix& Y, cd z) const;
  MetricSample metric_at(cd z) const;
  double distance_to_points(cd z) const;

 private:
  FuchsianSystem sys_;
  cd z0_;
  CMatrix Y0_;
  bool canonical_;
  double tol_;
};

// tr(A h^{-1} A^* h); the imaginary part is roundoff.
cd kinetic_density_complex(const CMatrix& h, const CMatrix& A);
double kinetic_density(const CMatrix& h, const CMatrix& A);
// |l|^2 - |u|^2 for b A b^{-1} = u + d + l, b the upper Cholesky factor of h.
double topological_density(const CMatrix& h, const CMatrix& A);
// Same density from Cholesky differentials along h_z = hA and h_zbar = A^* h.
double topological_density_differential(const CMatrix& h, const CMatrix& A);

struct ThreeFormPair {
  cd theta3;
  cd dOmega2;
};

ThreeFormPair three_form_pair(const HermitianPD& h, const CMatrix& X, const CMatrix& Y, const CMatrix& Z,
                              double step = 1e-5);

double flatness_residual(const MetricField& field, cd z, double step);

struct QuadratureOptions {
  int angular_nodes = 64;
  int radial_order = 8;
  double panel_width = 0.5;    // in log-radius
  int cell_order = 6;
  int base_cells = 8;
  int max_depth = 7;
  double cell_tol = 1e-9;
  double transport_tol = 1e-11;
  int threads = 1;
  // false: an unreliable fit becomes a warning instead of an error
  bool strict = true;
};

struct Cell {
  double x, y, size;
};

// Geometry of the composite quadrature; the middle-region leaves can be reused across a family.
struct QuadratureLayout {
  std::vector<double> r_inner, r_outer;  // bump radii per point
  double R1 = 0, R2 = 0;                 // outer bump radii
  std::vector<Cell> leaves;
  bool empty() const { return leaves.empty(); }
};

QuadratureLayout make_layout_geometry(const std::vector<cd>& points);

struct DeltaRow {
  double delta;
  double kinetic;
  double topological;
  double counterterm;
  double total;
  double imag;
};

struct ActionResult {
  double value = 0;
  double K1 = 0, K2 = 0;
  std::vector<DeltaRow> per_delta;
  double extrapolation_error = 0;
  double kinetic_part = 0, topological_part = 0;
  double imag_part = 0;
  double kappa = 0;
  double fit_C = 0;
  double spread = 0;
  long nodes = 0;
  std::vector<std::string> warnings;
};

double extrapolation_exponent(const WeightSystem& ws);

// Least-squares fit of s_k = S + C delta_k^kappa; returns (S, C, max residual).
std::array<double, 3> fit_power(const std::vector<double>& deltas, const std::vector<double>& s, double kappa);

ActionResult action_regularized(const MetricField& field, const std::vector<double>& deltas,
                                const QuadratureOptions& opts = {}, QuadratureLayout* layout = nullptr);

// Kinetic integral over the annulus delta < |z - z_i| < 2 delta.
double annulus_kinetic(const MetricField& field, int i, double delta, const QuadratureOptions& opts = {});

}  // namespace rhwz
