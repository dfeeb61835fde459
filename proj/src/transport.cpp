#include <algorithm>
#include <cmath>

#include "rhwz/fuchs.hpp"

namespace rhwz {

PathSegment PathSegment::line(cd a, cd b) {
  PathSegment s;
  s.kind = Kind::Line;
  s.a = a;
  s.b = b;
  return s;
}

PathSegment PathSegment::arc(cd center, double radius, double theta0, double theta1) {
  PathSegment s;
  s.kind = Kind::Arc;
  s.center = center;
  s.radius = radius;
  s.t0 = theta0;
  s.t1 = theta1;
  return s;
}

PathSegment PathSegment::log_ray(cd center, double theta, double rho0, double rho1) {
  PathSegment s;
  s.kind = Kind::LogRay;
  s.center = center;
  s.theta = theta;
  s.t0 = rho0;
  s.t1 = rho1;
  return s;
}

cd PathSegment::z(double s) const {
  switch (kind) {
    case Kind::Line: return a + s * (b - a);
    case Kind::Arc: return center + radius * std::exp(kI * (t0 + s * (t1 - t0)));
    case Kind::LogRay: return center + std::exp(t0 + s * (t1 - t0)) * std::exp(kI * theta);
  }
  return 0.0;
}

cd PathSegment::dz(double s) const {
  switch (kind) {
    case Kind::Line: return b - a;
    case Kind::Arc: return kI * (t1 - t0) * radius * std::exp(kI * (t0 + s * (t1 - t0)));
    case Kind::LogRay: return (t1 - t0) * std::exp(t0 + s * (t1 - t0)) * std::exp(kI * theta);
  }
  return 0.0;
}

double PathSegment::length() const {
  switch (kind) {
    case Kind::Line: return std::abs(b - a);
    case Kind::Arc: return radius * std::abs(t1 - t0);
    case Kind::LogRay: return std::abs(std::exp(t1) - std::exp(t0));
  }
  return 0.0;
}

static double segment_distance(cd a, cd b, cd p) {
  cd d = b - a;
  double L2 = std::norm(d);
  if (L2 == 0.0) return std::abs(p - a);
  double t = std::clamp(((p - a) * std::conj(d)).real() / L2, 0.0, 1.0);
  return std::abs(p - (a + t * d));
}

double PathSegment::distance_to(cd p) const {
  if (kind == Kind::Line) return segment_distance(a, b, p);
  if (kind == Kind::LogRay) return segment_distance(start(), end(), p);
  double ends = std::min(std::abs(p - start()), std::abs(p - end()));
  double span = std::abs(t1 - t0);
  double ring = std::abs(std::abs(p - center) - radius);
  if (span >= 2 * kPi || std::abs(p - center) == 0.0) return std::min(ends, ring);
  double lo = std::min(t0, t1);
  double phi = std::arg(p - center);
  double rel = std::fmod(phi - lo, 2 * kPi);
  if (rel < 0) rel += 2 * kPi;
  return rel <= span ? std::min(ends, ring) : ends;
}

cd PathSegment::log_increment(cd p) const {
  if (kind != Kind::Arc) return std::log((end() - p) / (start() - p));
  int pieces = std::max(1, static_cast<int>(std::ceil(std::abs(t1 - t0) / (kPi / 4))));
  cd s = 0;
  for (int k = 0; k < pieces; ++k) {
    cd z0 = z(static_cast<double>(k) / pieces), z1 = z(static_cast<double>(k + 1) / pieces);
    s += std::log((z1 - p) / (z0 - p));
  }
  return s;
}

double default_r_min(const std::vector<cd>& points) {
  double m = INFINITY;
  for (size_t i = 0; i < points.size(); ++i)
    for (size_t j = 0; j < i; ++j) m = std::min(m, std::abs(points[i] - points[j]));
  if (!std::isfinite(m)) m = 1.0;
  return 0.05 * m;
}

void check_path_clearance(const std::vector<cd>& points, const Path& path, double r_min) {
  for (size_t k = 0; k < path.size(); ++k)
    for (size_t i = 0; i < points.size(); ++i) {
      double d = path[k].distance_to(points[i]);
      if (d < r_min)
        throw Error(ErrorKind::Proximity, "path segment " + std::to_string(k) + " passes within " + std::to_string(d) +
                                              " of point " + std::to_string(i + 1));
    }
}

namespace {

// Dormand-Prince 5(4)
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;

}  // namespace

CMatrix transport_segment(const FuchsianSystem& sys, const PathSegment& seg, const CMatrix& start, double tol,
                          long* steps, double* err_out, long max_steps, double min_step) {
  auto rhs = [&](double s, const CMatrix& Y) -> CMatrix {
    CMatrix a = sys.A(seg.z(s)) * seg.dz(s);
    return -(a * Y);
  };
  CMatrix Y = start;
  double s = 0.0, h = 0.05;
  double err_prev = 1e-4;
  long count = 0;
  double err_sum = 0;
  CMatrix k1 = rhs(0.0, Y);
  // Shrink the first step until the predicted Euler increment is modest.
  double yn = std::max(1.0, frob(Y));
  double fn = frob(k1);
  if (fn > 0) h = std::min(h, 0.1 * yn / fn);
  h = std::max(h, 1e-6);
  while (s < 1.0) {
    if (count++ > max_steps) throw Error(ErrorKind::Stiffness, "step budget exhausted");
    if (h < min_step) throw Error(ErrorKind::Stiffness, "step size underflow");
    bool last = false;
    if (s + h >= 1.0) {
      h = 1.0 - s;
      last = true;
    }
    CMatrix k2 = rhs(s + c2 * h, Y + h * (a21 * k1));
    CMatrix k3 = rhs(s + c3 * h, Y + h * (a31 * k1 + a32 * k2));
    CMatrix k4 = rhs(s + c4 * h, Y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    CMatrix k5 = rhs(s + c5 * h, Y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    CMatrix k6 = rhs(s + h, Y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    CMatrix Yn = Y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    CMatrix k7 = rhs(s + h, Yn);
    CMatrix E = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double scale = std::max(1.0, std::max(frob(Y), frob(Yn)));
    double err = frob(E) / (tol * scale);
    if (!std::isfinite(err)) {
      h *= 0.2;
      continue;
    }
    if (err <= 1.0) {
      s = last ? 1.0 : s + h;
      Y = Yn;
      k1 = k7;
      err_sum += err * tol * scale;
      double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.7 / 5) * std::pow(err_prev, 0.4 / 5);
      h *= std::clamp(fac, 0.2, 5.0);
      err_prev = std::max(err, 1e-4);
    } else {
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
    }
  }
  if (steps) *steps += count;
  if (err_out) *err_out += err_sum;
  return Y;
}

TransportResult transport(const FuchsianSystem& sys, const Path& path, const CMatrix& start,
                          const TransportOptions& opts) {
  double r_min = opts.r_min >= 0 ? opts.r_min : default_r_min(sys.weights.points);
  check_path_clearance(sys.weights.points, path, r_min);
  TransportResult res;
  res.value = start;
  cd int_tr = 0;
  for (const auto& seg : path) {
    res.value = transport_segment(sys, seg, res.value, opts.tol, &res.step_count, &res.error_estimate, opts.max_steps,
                                  opts.min_step);
    for (size_t i = 0; i < sys.residues.size(); ++i)
      int_tr += sys.residues[i].trace() * seg.log_increment(sys.weights.points[i]);
  }
  cd ratio = det(res.value) / det(start) * std::exp(int_tr);
  res.det_residual = std::abs(std::log(ratio));
  return res;
}

cd default_basepoint(const std::vector<cd>& points) {
  double m = 0;
  for (cd p : points) m = std::max(m, std::abs(p));
  if (m == 0) m = 0.5;
  return kI * (2.0 * m);
}

void check_generator_order(const std::vector<cd>& points, cd basepoint) {
  for (size_t i = 1; i < points.size(); ++i)
    if (!(std::arg(points[i] - basepoint) > std::arg(points[i - 1] - basepoint)))
      throw Error(ErrorKind::Ordering,
                  "points must be ordered by increasing argument as seen from the basepoint (left to right below it)");
}

Path loop_path(const std::vector<cd>& points, int i, cd basepoint) {
  cd zi = points[i];
  double d = std::abs(basepoint - zi);
  for (size_t j = 0; j < points.size(); ++j)
    if (static_cast<int>(j) != i) d = std::min(d, std::abs(points[j] - zi));
  double rho = 0.5 * d;
  cd u = (basepoint - zi) / std::abs(basepoint - zi);
  cd p = zi + rho * u;
  double th = std::arg(u);
  return {PathSegment::line(basepoint, p), PathSegment::arc(zi, rho, th, th + 2 * kPi), PathSegment::line(p, basepoint)};
}

Path infinity_loop(const std::vector<cd>&, cd basepoint) {
  double R = std::abs(basepoint);
  double th = std::arg(basepoint);
  return {PathSegment::arc(0.0, R, th, th - 2 * kPi)};
}

MonodromyResult monodromy_rep(const FuchsianSystem& sys, std::optional<cd> basepoint, double tol, bool with_infinity) {
  const auto& pts = sys.weights.points;
  const int r = sys.rank();
  MonodromyResult out;
  out.basepoint = basepoint ? *basepoint : default_basepoint(pts);
  check_generator_order(pts, out.basepoint);
  TransportOptions opts;
  opts.tol = tol;
  for (size_t i = 0; i < pts.size(); ++i) {
    auto tr = transport(sys, loop_path(pts, static_cast<int>(i), out.basepoint), identity(r), opts);
    out.loop_factors.push_back(tr.value);
    out.steps += tr.step_count;
    out.det_residual = std::max(out.det_residual, tr.det_residual);
  }
  if (with_infinity) {
    auto tr = transport(sys, infinity_loop(pts, out.basepoint), identity(r), opts);
    out.loop_factors.push_back(tr.value);
    out.steps += tr.step_count;
    out.det_residual = std::max(out.det_residual, tr.det_residual);
  } else {
    CMatrix p = identity(r);
    for (const auto& t : out.loop_factors) p = t * p;
    out.loop_factors.push_back(inverse(p));
  }
  CMatrix prod = identity(r);
  for (const auto& t : out.loop_factors) {
    out.generators.push_back(inverse(t));
    prod = prod * out.generators.back();
  }
  out.relation_residual = frob(prod - identity(r));
  return out;
}

}  // namespace rhwz
