#include "rhwz/moduli.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

namespace rhwz {

ModuliDims expected_dims(int r, int n) {
  if (r < 1 || n < 3) throw Error(ErrorKind::Validation, "expected_dims needs r >= 1 and n >= 3");
  double rr = r, nn = n;
  return {0.5 * nn * (rr * rr - 1) - rr * rr + 1, 0.5 * nn * (rr * rr - rr) - rr * rr + 1};
}

namespace {

// Real coordinates of an r x r anti-Hermitian matrix.
CMatrix anti_hermitian_basis(int r, int k) {
  CMatrix X = CMatrix::Zero(r, r);
  int idx = 0;
  for (int p = 0; p < r; ++p)
    for (int q = p; q < r; ++q) {
      if (p == q) {
        if (idx++ == k) X(p, p) = kI;
        continue;
      }
      if (idx++ == k) {
        X(p, q) = 1;
        X(q, p) = -1;
      }
      if (idx++ == k) {
        X(p, q) = kI;
        X(q, p) = kI;
      }
    }
  return X;
}

// Phase mismatch of spec(prod^*) against exp(2 pi i alpha_n).
Eigen::VectorXd spectrum_residual(const WeightSystem& ws, const std::vector<CMatrix>& U) {
  const int r = ws.rank(), n = ws.n();
  CMatrix prod = identity(r);
  for (int i = 0; i + 1 < n; ++i) {
    std::vector<cd> ph;
    for (double a : ws.weights[i]) ph.push_back(std::exp(2.0 * kPi * kI * a));
    prod = prod * U[i] * diag(ph) * U[i].adjoint();
  }
  auto es = eig_small(prod.adjoint(), INFINITY);
  std::vector<cd> target;
  for (double a : ws.weights[n - 1]) target.push_back(std::exp(2.0 * kPi * kI * a));
  auto match = match_values(es.values, target);
  Eigen::VectorXd f(r);
  for (int k = 0; k < r; ++k) f(k) = std::arg(es.values[k] / target[match[k]]);
  return f;
}

std::vector<CMatrix> move(const std::vector<CMatrix>& U, const Eigen::VectorXd& x, int r) {
  const int per = r * r;
  std::vector<CMatrix> out = U;
  for (size_t i = 0; i < U.size(); ++i) {
    CMatrix X = CMatrix::Zero(r, r);
    for (int k = 0; k < per; ++k) X += x(static_cast<int>(i) * per + k) * anti_hermitian_basis(r, k);
    out[i] = mat_exp(X) * U[i];
  }
  return out;
}

}  // namespace

Direction random_direction(const WeightSystem& ws, Rng& rng) {
  Direction d;
  for (int i = 0; i + 1 < ws.n(); ++i) {
    d.re.push_back(random_anti_hermitian(ws.rank(), rng));
    d.im.push_back(random_anti_hermitian(ws.rank(), rng));
  }
  return d;
}

AdmissibleRep project_admissible(const WeightSystem& ws, std::vector<CMatrix> U, double tol, int max_iter) {
  const int r = ws.rank(), m = (ws.n() - 1) * r * r;
  if (static_cast<int>(U.size()) != ws.n() - 1) throw Error(ErrorKind::Validation, "expected n-1 conjugators");
  Eigen::VectorXd f = spectrum_residual(ws, U);
  const double h = 1e-7;
  for (int it = 0; it < max_iter && f.cwiseAbs().maxCoeff() > tol; ++it) {
    Eigen::MatrixXd J(r, m);
    for (int k = 0; k < m; ++k) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
      e(k) = h;
      J.col(k) = (spectrum_residual(ws, move(U, e, r)) - spectrum_residual(ws, move(U, -e, r))) / (2 * h);
    }
    // Minimum-norm Gauss-Newton step with backtracking.
    Eigen::VectorXd step = -J.completeOrthogonalDecomposition().solve(f);
    double t = 1;
    bool moved = false;
    for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
      auto cand = move(U, t * step, r);
      Eigen::VectorXd fc = spectrum_residual(ws, cand);
      if (fc.norm() < f.norm()) {
        U = std::move(cand);
        f = fc;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  if (!(f.cwiseAbs().maxCoeff() <= tol))
    throw Error(ErrorKind::Radius, "admissibility projection did not converge (spectrum mismatch " +
                                       std::to_string(f.cwiseAbs().maxCoeff()) + ")");
  return build_admissible_rep(ws, U);
}

AdmissibleRep random_admissible_rep(const WeightSystem& ws, Rng& rng, int attempts) {
  for (int a = 0; a < attempts; ++a) {
    std::vector<CMatrix> U;
    for (int i = 0; i + 1 < ws.n(); ++i) U.push_back(random_unitary(ws.rank(), rng));
    try {
      auto rep = project_admissible(ws, U);
      if (rep.warnings.empty()) return rep;
    } catch (const Error&) {
    }
  }
  throw Error(ErrorKind::NotAdmissible, "no irreducible admissible representation found");
}

namespace {

Eigen::MatrixXd spectrum_jacobian(const WeightSystem& ws, const std::vector<CMatrix>& U) {
  const int r = ws.rank(), m = (ws.n() - 1) * r * r;
  const double h = 1e-7;
  Eigen::MatrixXd J(r, m);
  for (int k = 0; k < m; ++k) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
    e(k) = h;
    J.col(k) = (spectrum_residual(ws, move(U, e, r)) - spectrum_residual(ws, move(U, -e, r))) / (2 * h);
  }
  return J;
}

}  // namespace

AdmissibleRep deform_rep(const AdmissibleRep& center, const Direction& dir, cd eps, double radius) {
  if (eps == 0.0) return center;
  if (std::abs(eps) > radius) throw Error(ErrorKind::Radius, "parameter outside the chart radius");
  const auto& ws = center.weights;
  const int n = center.n(), r = ws.rank();
  if (static_cast<int>(dir.re.size()) != n - 1 || static_cast<int>(dir.im.size()) != n - 1)
    throw Error(ErrorKind::Validation, "direction needs one pair per finite point");
  std::vector<CMatrix> U0(center.conjugators.begin(), center.conjugators.end() - 1);
  std::vector<CMatrix> U;
  for (int i = 0; i + 1 < n; ++i) U.push_back(mat_exp(eps.real() * dir.re[i] + eps.imag() * dir.im[i]) * U0[i]);
  // Correct along the normal space of the constraint at the centre, kept fixed so the chart is smooth in eps.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(spectrum_jacobian(ws, U0), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  int k = 0;
  while (k < sv.size() && sv(k) > 1e-8 * sv(0)) ++k;
  Eigen::MatrixXd N = svd.matrixV().leftCols(k);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(k);
  auto at = [&](const Eigen::VectorXd& yy) { return move(U, N * yy, r); };
  Eigen::VectorXd f = spectrum_residual(ws, U);
  const double h = 1e-7;
  for (int it = 0; it < 40 && f.cwiseAbs().maxCoeff() > 1e-12; ++it) {
    Eigen::MatrixXd Jy(r, k);
    for (int j = 0; j < k; ++j) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(k);
      e(j) = h;
      Jy.col(j) = (spectrum_residual(ws, at(y + e)) - spectrum_residual(ws, at(y - e))) / (2 * h);
    }
    y -= Jy.completeOrthogonalDecomposition().solve(f);
    f = spectrum_residual(ws, at(y));
  }
  if (!(f.cwiseAbs().maxCoeff() <= 1e-10))
    throw Error(ErrorKind::Radius, "deformation left the chart (spectrum mismatch " +
                                       std::to_string(f.cwiseAbs().maxCoeff()) + ")");
  return build_admissible_rep(ws, at(y));
}

cd flag_cross_ratio(const FuchsianSystem& sys) {
  if (sys.rank() != 2 || sys.weights.n() != 4) throw Error(ErrorKind::Validation, "cross-ratio needs rank 2 and n = 4");
  std::vector<CMatrix> res = sys.residues;
  res.push_back(sys.residue_at_infinity());
  std::vector<CVector> lines;
  for (int i = 0; i < 4; ++i) {
    auto es = eig_small(res[i], INFINITY);
    // The larger real part is the top weight (alpha_{i2}, or Lambda_2 at infinity).
    int k = es.values[0].real() > es.values[1].real() ? 0 : 1;
    lines.push_back(es.vectors.col(k));
  }
  auto br = [&](int a, int b) { return lines[a](0) * lines[b](1) - lines[a](1) * lines[b](0); };
  return br(0, 2) * br(1, 3) / (br(0, 3) * br(1, 2));
}

ActionSurface::ActionSurface(RepFamily family, SurfaceOptions opts) : family_(std::move(family)), opts_(std::move(opts)) {
  opts_.quadrature.strict = false;
}

SolveResult ActionSurface::solve_at(cd eps) {
  auto rep = family_.at(eps);
  std::optional<ResidueParametrization> init;
  double best = INFINITY;
  for (const auto& [e, p] : solved_)
    if (std::abs(e - eps) < best) {
      best = std::abs(e - eps);
      init = p;
    }
  auto res = solve(rep.weights, rep, init, opts_.solver);
  if (res.report.success) solved_.push_back({eps, res.params.recentred()});
  return res;
}

SurfacePoint ActionSurface::evaluate(cd eps) {
  if (eps == 0.0 && centre_) return *centre_;
  SurfacePoint p;
  p.eps = eps;
  try {
    if (layout_.empty() && eps != 0.0) evaluate(0.0);
    auto res = solve_at(eps);
    p.large_cell_flag = res.report.large_cell_flag;
    if (!res.report.success) {
      p.note = "solver did not converge";
    } else if (!res.normalization || !res.report.large_cell_flag) {
      p.note = "outside the regular locus";
    } else {
      const auto& sys = res.normalization->canonical;
      if (sys.rank() == 2 && sys.weights.n() == 4) p.coordinate = flag_cross_ratio(sys);
      auto field = MetricField::from_normalization(*res.normalization, opts_.quadrature.transport_tol);
      auto a = action_regularized(field, opts_.deltas, opts_.quadrature, &layout_);
      p.value = a.value;
      p.extrapolation_error = a.extrapolation_error;
      p.hole = false;
    }
    p.solution = std::move(res);
  } catch (const Error& e) {
    p.note = e.what();
  }
  // The centre fixes the quadrature layout, so it is computed once.
  if (eps == 0.0) centre_ = p;
  return p;
}

std::vector<SurfacePoint> action_surface(const RepFamily& family, const std::vector<cd>& grid, const SurfaceOptions& opts) {
  // Sort row-major (by imaginary part, then real part) for the warm-start sweep.
  std::vector<size_t> order(grid.size());
  for (size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (grid[a].imag() != grid[b].imag()) return grid[a].imag() < grid[b].imag();
    return grid[a].real() < grid[b].real();
  });
  ActionSurface surface(family, opts);
  std::vector<SurfacePoint> out(grid.size());
  for (size_t k : order) out[k] = surface.evaluate(grid[k]);
  return out;
}

double levi_form(const std::array<std::array<double, 3>, 3>& s, double a) {
  if (!(a > 0)) throw Error(ErrorKind::Validation, "stencil spacing must be positive");
  // Corners do not enter the five-point formula and may be left unset.
  for (double v : {s[1][1], s[1][0], s[1][2], s[0][1], s[2][1]})
    if (!std::isfinite(v)) throw Error(ErrorKind::Hole, "stencil contains a point outside the regular locus");
  return (s[1][2] + s[1][0] + s[2][1] + s[0][1] - 4 * s[1][1]) / (4 * a * a);
}

namespace {

cd coordinate_at(ActionSurface& surface, cd eps) {
  auto res = surface.solve_at(eps);
  if (!res.report.success || !res.normalization)
    throw Error(ErrorKind::Hole, "family member did not solve");
  return flag_cross_ratio(res.normalization->canonical);
}

}  // namespace

LeviReport levi_in_flag_coordinate(ActionSurface& surface, double a) {
  LeviReport rep;
  rep.spacing = a;
  rep.w0 = coordinate_at(surface, 0.0);
  const double h = 1e-4;
  cd dre = (coordinate_at(surface, h) - coordinate_at(surface, -h)) / (2 * h);
  cd dim = (coordinate_at(surface, cd(0, h)) - coordinate_at(surface, cd(0, -h))) / (2 * h);
  Eigen::Matrix2d J;
  J << dre.real(), dim.real(), dre.imag(), dim.imag();
  if (std::abs(J.determinant()) < 1e-12) throw Error(ErrorKind::Singular, "the family does not move the cross-ratio");
  Eigen::Matrix2d Jinv = J.inverse();

  // Parameter reaching w0 + dw, by chord Newton.
  auto reach = [&](cd dw) {
    cd target = rep.w0 + dw;
    Eigen::Vector2d x = Jinv * Eigen::Vector2d(dw.real(), dw.imag());
    for (int it = 0; it < 30; ++it) {
      cd w = coordinate_at(surface, cd(x(0), x(1)));
      cd err = target - w;
      if (std::abs(err) <= 1e-11 * (1 + std::abs(target))) break;
      x += Jinv * Eigen::Vector2d(err.real(), err.imag());
    }
    cd w = coordinate_at(surface, cd(x(0), x(1)));
    rep.worst_coordinate_error = std::max(rep.worst_coordinate_error, std::abs(w - target));
    return cd(x(0), x(1));
  };
  auto potential = [&](cd eps) {
    auto p = surface.evaluate(eps);
    if (p.hole) throw Error(ErrorKind::Hole, "stencil point outside the regular locus: " + p.note);
    return -0.5 * p.value;
  };
  double centre = potential(0.0);
  auto fill = [&](double s, std::array<std::array<double, 3>, 3>& st) {
    for (auto& row : st) row.fill(NAN);
    st[1][1] = centre;
    st[1][2] = potential(reach(s));
    st[1][0] = potential(reach(-s));
    st[2][1] = potential(reach(cd(0, s)));
    st[0][1] = potential(reach(cd(0, -s)));
  };
  fill(a, rep.stencil);
  rep.levi = levi_form(rep.stencil, a);
  fill(a / 2, rep.stencil_half);
  rep.levi_half = levi_form(rep.stencil_half, a / 2);
  return rep;
}

}  // namespace rhwz
