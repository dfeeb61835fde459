#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "rhwz/rhsolve.hpp"
#include "rhwz/wznw.hpp"

namespace rhwz {

struct ModuliDims {
  double moduli;     // n(r^2-1)/2 - r^2 + 1
  double cotangent;  // n(r^2-r)/2 - r^2 + 1
};

// Raw substitution; small (r, n) can give non-integers.
ModuliDims expected_dims(int r, int n);

// Anti-Hermitian directions moving the conjugators: U_i -> exp(Re e X_i + Im e Y_i) U_i.
struct Direction {
  std::vector<CMatrix> re, im;
};

Direction random_direction(const WeightSystem& ws, Rng& rng);

// Newton projection of conjugators onto the admissible set: the product of the first n-1
// generators must have spectrum exp(-2 pi i alpha_n). Throws Radius when it does not converge.
AdmissibleRep project_admissible(const WeightSystem& ws, std::vector<CMatrix> conjugators, double tol = 1e-10,
                                 int max_iter = 60);

// Irreducible admissible representation from random starting conjugators.
AdmissibleRep random_admissible_rep(const WeightSystem& ws, Rng& rng, int attempts = 50);

AdmissibleRep deform_rep(const AdmissibleRep& center, const Direction& dir, cd eps, double radius = 0.5);

struct RepFamily {
  AdmissibleRep center;
  Direction direction;
  double radius = 0.5;

  AdmissibleRep at(cd eps) const { return deform_rep(center, direction, eps, radius); }
};

// Cross-ratio of the top-weight eigenlines of A_1, A_2, A_3 and of A_n; a holomorphic
// coordinate on rank-2 four-point moduli (invariant under constant gauge).
cd flag_cross_ratio(const FuchsianSystem& sys);

struct SurfaceOptions {
  SolverOptions solver;
  QuadratureOptions quadrature;
  std::vector<double> deltas{0.1, 0.05, 0.025, 0.0125};
};

struct SurfacePoint {
  cd eps;
  double value = NAN;
  double extrapolation_error = NAN;
  bool large_cell_flag = false;
  bool hole = true;
  cd coordinate = NAN;  // flag cross-ratio for rank 2, n = 4
  std::string note;
  std::optional<SolveResult> solution;
};

// A solved member of a family: the RH solution, its canonical field and the action.
struct FamilyMember {
  SolveResult solution;
  double action = NAN;
  double extrapolation_error = NAN;
};

class ActionSurface {
 public:
  ActionSurface(RepFamily family, SurfaceOptions opts);

  // Solves at eps, warm-starting from the nearest solved member.
  SolveResult solve_at(cd eps);
  SurfacePoint evaluate(cd eps);
  const RepFamily& family() const { return family_; }
  const QuadratureLayout& layout() const { return layout_; }

 private:
  RepFamily family_;
  SurfaceOptions opts_;
  QuadratureLayout layout_;
  std::optional<SurfacePoint> centre_;
  std::vector<std::pair<cd, ResidueParametrization>> solved_;
};

// Row-major sweep over the grid; members that leave the regular locus become holes.
std::vector<SurfacePoint> action_surface(const RepFamily& family, const std::vector<cd>& grid,
                                         const SurfaceOptions& opts);

// S_{e ebar} from the five-point cross of a 3x3 stencil s[im + 1][re + 1] with spacing a.
double levi_form(const std::array<std::array<double, 3>, 3>& s, double spacing);

struct LeviReport {
  double levi = NAN;       // of the Kahler potential -S/2 in the coordinate w
  double levi_half = NAN;  // same at half spacing
  cd w0;
  double spacing = 0;
  std::array<std::array<double, 3>, 3> stencil{}, stencil_half{};
  double worst_coordinate_error = 0;
};

// Levi form of -S/2 in the flag cross-ratio coordinate w around the family centre,
// at spacing a and a/2 (a measured in w).
LeviReport levi_in_flag_coordinate(ActionSurface& surface, double spacing);

}  // namespace rhwz
