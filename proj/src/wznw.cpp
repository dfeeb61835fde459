#include "rhwz/wznw.hpp"

#include <algorithm>
#include <cmath>

namespace rhwz {

MetricField::MetricField(FuchsianSystem system, cd basepoint, CMatrix Y0, bool canonical, double tol)
    : sys_(std::move(system)), z0_(basepoint), Y0_(std::move(Y0)), canonical_(canonical), tol_(tol) {
  if (Y0_.rows() != sys_.rank() || Y0_.cols() != sys_.rank())
    throw Error(ErrorKind::Validation, "initial solution has the wrong shape");
}

MetricField MetricField::from_normalization(const InfinityNormalization& norm, double tol) {
  return MetricField(norm.canonical, norm.basepoint, norm.Y0, norm.large_cell_flag, tol);
}

double MetricField::distance_to_points(cd z) const {
  double d = INFINITY;
  for (cd p : sys_.weights.points) d = std::min(d, std::abs(z - p));
  return d;
}

CMatrix MetricField::continue_solution(const CMatrix& Y, cd from, cd to, double r_min) const {
  if (from == to) return Y;
  TransportOptions o;
  o.tol = tol_;
  o.r_min = r_min;
  return transport(sys_, {PathSegment::line(from, to)}, Y, o).value;
}

CMatrix MetricField::solution_at(cd z) const {
  const auto& pts = sys_.weights.points;
  double dz = distance_to_points(z);
  if (dz <= 0) throw Error(ErrorKind::Proximity, "evaluation point coincides with a marked point");
  double r_min = std::min(default_r_min(pts), 0.5 * dz);
  double spacing = INFINITY;
  for (size_t i = 0; i < pts.size(); ++i)
    for (size_t j = i + 1; j < pts.size(); ++j) spacing = std::min(spacing, 0.5 * std::abs(pts[i] - pts[j]));
  if (!std::isfinite(spacing)) spacing = 0.5;
  double H = std::max(z0_.imag(), z.imag());
  std::vector<Path> candidates;
  candidates.push_back({PathSegment::line(z0_, z)});
  candidates.push_back({PathSegment::line(z0_, cd(z.real(), H)), PathSegment::line(cd(z.real(), H), z)});
  for (double k : {1.0, -1.0, 2.0, -2.0}) {
    double x = z.real() + k * spacing;
    candidates.push_back({PathSegment::line(z0_, cd(x, H)), PathSegment::line(cd(x, H), cd(x, z.imag())),
                          PathSegment::line(cd(x, z.imag()), z)});
  }
  for (const auto& path : candidates) {
    bool clear = true;
    for (const auto& seg : path)
      for (cd p : pts)
        if (seg.distance_to(p) < r_min) clear = false;
    if (!clear) continue;
    TransportOptions o;
    o.tol = tol_;
    o.r_min = r_min;
    return transport(sys_, path, Y0_, o).value;
  }
  throw Error(ErrorKind::Proximity, "no clear route to the evaluation point");
}

MetricSample MetricField::sample(const CMatrix& Y, cd z) const {
  MetricSample s;
  s.Y = Y;
  s.h = hermitian_part(inverse(Y * Y.adjoint()));
  s.A = sys_.A(z);
  return s;
}

MetricSample MetricField::metric_at(cd z) const { return sample(solution_at(z), z); }

cd kinetic_density_complex(const CMatrix& h, const CMatrix& A) {
  return (A * inverse(h) * A.adjoint() * h).trace();
}

double kinetic_density(const CMatrix& h, const CMatrix& A) { return kinetic_density_complex(h, A).real(); }

double topological_density(const CMatrix& h, const CMatrix& A) {
  CMatrix b = cholesky_upper(HermitianPD::unchecked(h));
  CMatrix X = b * A * inverse(b);
  double l = 0, u = 0;
  for (int i = 0; i < X.rows(); ++i)
    for (int j = 0; j < X.cols(); ++j) {
      if (i > j) l += std::norm(X(i, j));
      if (i < j) u += std::norm(X(i, j));
    }
  return l - u;
}

double topological_density_differential(const CMatrix& h, const CMatrix& A) {
  CMatrix b = cholesky_upper(HermitianPD::unchecked(h));
  CMatrix hA = h * A, Ah = A.adjoint() * h;
  CMatrix bx = cholesky_differential(b, hA + Ah);
  CMatrix by = cholesky_differential(b, kI * (hA - Ah));
  CMatrix binv = inverse(b);
  CMatrix tz = 0.5 * (bx - kI * by) * binv;
  CMatrix tzb = 0.5 * (bx + kI * by) * binv;
  return (tzb * tzb.adjoint() - tz * tz.adjoint()).trace().real();
}

namespace {

cd omega_c(const CMatrix& h, const CMatrix& Y, const CMatrix& Z) {
  CMatrix b = cholesky_upper(HermitianPD::unchecked(h));
  CMatrix binv = inverse(b);
  CMatrix ty = cholesky_differential(b, Y) * binv;
  CMatrix tz = cholesky_differential(b, Z) * binv;
  return (ty * tz.adjoint() - tz * ty.adjoint()).trace();
}

}  // namespace

ThreeFormPair three_form_pair(const HermitianPD& hp, const CMatrix& X, const CMatrix& Y, const CMatrix& Z, double t) {
  const CMatrix& h = hp.matrix();
  CMatrix hi = inverse(h);
  const CMatrix* V[3] = {&X, &Y, &Z};
  static const int perms[6][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}, {1, 0, 2}, {0, 2, 1}, {2, 1, 0}};
  cd theta = 0;
  for (int p = 0; p < 6; ++p) {
    double sgn = p < 3 ? 1.0 : -1.0;
    theta += sgn * (hi * *V[perms[p][0]] * hi * *V[perms[p][1]] * hi * *V[perms[p][2]]).trace();
  }
  auto D = [&](const CMatrix& dir, const CMatrix& a, const CMatrix& b) {
    return (omega_c(h + t * dir, a, b) - omega_c(h - t * dir, a, b)) / (2 * t);
  };
  ThreeFormPair out;
  out.theta3 = theta;
  out.dOmega2 = 3.0 * (D(X, Y, Z) - D(Y, X, Z) + D(Z, X, Y));
  return out;
}

double flatness_residual(const MetricField& field, cd z, double s) {
  if (field.distance_to_points(z) < 4 * s) throw Error(ErrorKind::Proximity, "stencil reaches a marked point");
  CMatrix Yc = field.solution_at(z);
  auto h = [&](double a, double b) {
    cd p = z + s * cd(a, b);
    return field.sample(field.continue_solution(Yc, z, p), p).h;
  };
  CMatrix h0 = h(0, 0);
  CMatrix hp2 = h(2, 0), hm2 = h(-2, 0), hpi2 = h(0, 2), hmi2 = h(0, -2);
  CMatrix hpp = h(1, 1), hpm = h(1, -1), hmp = h(-1, 1), hmm = h(-1, -1);
  auto F = [&](const CMatrix& hc, const CMatrix& xp, const CMatrix& xm, const CMatrix& yp, const CMatrix& ym) {
    CMatrix hz = 0.5 * ((xp - xm) / (2 * s) - kI * (yp - ym) / (2 * s));
    return CMatrix(inverse(hc) * hz);
  };
  CMatrix hxp = field.sample(field.continue_solution(Yc, z, z + s), z + s).h;
  CMatrix hxm = field.sample(field.continue_solution(Yc, z, z - s), z - s).h;
  CMatrix hyp = field.sample(field.continue_solution(Yc, z, z + kI * s), z + kI * s).h;
  CMatrix hym = field.sample(field.continue_solution(Yc, z, z - kI * s), z - kI * s).h;
  CMatrix Fxp = F(hxp, hp2, h0, hpp, hpm);
  CMatrix Fxm = F(hxm, h0, hm2, hmp, hmm);
  CMatrix Fyp = F(hyp, hpp, hmp, hpi2, h0);
  CMatrix Fym = F(hym, hpm, hmm, h0, hmi2);
  CMatrix dzb = 0.5 * ((Fxp - Fxm) / (2 * s) + kI * (Fyp - Fym) / (2 * s));
  return frob(dzb);
}

}  // namespace rhwz
