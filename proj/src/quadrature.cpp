#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <functional>
#include <map>

#include "rhwz/parallel.hpp"
#include "rhwz/wznw.hpp"

namespace rhwz {

namespace {

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
struct GaussLegendre {
  std::vector<double> x, w;
  explicit GaussLegendre(int n) {
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
      double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
      for (int it = 0; it < 100; ++it) {
        double p0 = 1, p1 = z;
        for (int k = 2; k <= n; ++k) {
          double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        double dp = n * (z * p1 - p0) / (z * z - 1);
        double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      double p0 = 1, p1 = z;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (z * p1 - p0) / (z * z - 1);
      x[i] = -z;
      w[i] = 2 / ((1 - z * z) * dp * dp);
    }
  }
};

// C-infinity step: 0 for t <= 0, 1 for t >= 1.
double smooth_step(double t) {
  if (t <= 0) return 0;
  if (t >= 1) return 1;
  double a = std::exp(-1 / t), b = std::exp(-1 / (1 - t));
  return a / (a + b);
}

struct Density {
  double kin = 0, top = 0, kin_im = 0;
};

Density density(const MetricField& f, const CMatrix& Y, cd z) {
  auto s = f.sample(Y, z);
  Density d;
  cd k = kinetic_density_complex(s.h, s.A);
  d.kin = k.real();
  d.kin_im = k.imag();
  d.top = topological_density(s.h, s.A);
  return d;
}

double inner_weight(const QuadratureLayout& L, int i, double r) {
  return 1 - smooth_step((r - L.r_inner[i]) / (L.r_outer[i] - L.r_inner[i]));
}

double outer_weight(const QuadratureLayout& L, double r) { return smooth_step((r - L.R1) / (L.R2 - L.R1)); }

double middle_weight(const QuadratureLayout& L, const std::vector<cd>& pts, cd z) {
  double w = 1 - outer_weight(L, std::abs(z));
  for (size_t i = 0; i < pts.size(); ++i) w -= inner_weight(L, static_cast<int>(i), std::abs(z - pts[i]));
  return std::max(0.0, w);
}

// Lattice of transported solutions filled breadth-first from the basepoint.
class Web {
 public:
  Web(const MetricField& f, const QuadratureLayout& L) : f_(f) {
    const auto& pts = f.system().weights.points;
    double ra = INFINITY;
    for (double r : L.r_inner) ra = std::min(ra, r);
    s_ = 0.5 * ra;
    double half = L.R2 + 2 * s_;
    n_ = static_cast<int>(std::ceil(2 * half / s_)) + 1;
    x0_ = -half;
    y0_ = -half;
    valid_.assign(static_cast<size_t>(n_) * n_, 0);
    filled_.assign(valid_.size(), 0);
    Y_.resize(valid_.size());
    for (int ix = 0; ix < n_; ++ix)
      for (int iy = 0; iy < n_; ++iy) {
        cd p = node(ix, iy);
        bool ok = true;
        for (size_t i = 0; i < pts.size(); ++i)
          if (std::abs(p - pts[i]) < 0.5 * L.r_inner[i]) ok = false;
        valid_[idx(ix, iy)] = ok;
      }
    cd z0 = f.basepoint();
    int sx, sy;
    nearest_valid(z0, sx, sy, false);
    Y_[idx(sx, sy)] = f.continue_solution(f.Y0(), z0, node(sx, sy));
    filled_[idx(sx, sy)] = 1;
    std::deque<std::pair<int, int>> q{{sx, sy}};
    const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
    while (!q.empty()) {
      auto [cx, cy] = q.front();
      q.pop_front();
      for (int k = 0; k < 4; ++k) {
        int nx = cx + dx[k], ny = cy + dy[k];
        if (nx < 0 || ny < 0 || nx >= n_ || ny >= n_) continue;
        size_t id = idx(nx, ny);
        if (!valid_[id] || filled_[id]) continue;
        Y_[id] = f.continue_solution(Y_[idx(cx, cy)], node(cx, cy), node(nx, ny));
        filled_[id] = 1;
        q.push_back({nx, ny});
      }
    }
  }

  CMatrix at(cd z) const {
    int ix, iy;
    nearest_valid(z, ix, iy, true);
    return f_.continue_solution(Y_[idx(ix, iy)], node(ix, iy), z);
  }

  long size() const { return static_cast<long>(std::count(filled_.begin(), filled_.end(), 1)); }

 private:
  size_t idx(int ix, int iy) const { return static_cast<size_t>(ix) * n_ + iy; }
  cd node(int ix, int iy) const { return cd(x0_ + ix * s_, y0_ + iy * s_); }

  void nearest_valid(cd z, int& bx, int& by, bool need_filled) const {
    int cx = static_cast<int>(std::lround((z.real() - x0_) / s_));
    int cy = static_cast<int>(std::lround((z.imag() - y0_) / s_));
    double best = INFINITY;
    bx = by = -1;
    for (int rad = 0; rad < n_ && bx < 0; ++rad) {
      for (int ix = cx - rad; ix <= cx + rad; ++ix)
        for (int iy = cy - rad; iy <= cy + rad; ++iy) {
          if (std::max(std::abs(ix - cx), std::abs(iy - cy)) != rad) continue;
          if (ix < 0 || iy < 0 || ix >= n_ || iy >= n_) continue;
          size_t id = idx(ix, iy);
          if (!valid_[id] || (need_filled && !filled_[id])) continue;
          double d = std::abs(node(ix, iy) - z);
          if (d < best) {
            best = d;
            bx = ix;
            by = iy;
          }
        }
      if (bx >= 0 && rad > 0) break;
    }
    if (bx < 0) throw Error(ErrorKind::Proximity, "no lattice anchor near the evaluation point");
  }

  const MetricField& f_;
  double s_, x0_, y0_;
  int n_;
  std::vector<char> valid_, filled_;
  std::vector<CMatrix> Y_;
};

struct RadialNode {
  double rho, w;
};

// Log-radial Gauss-Legendre panels with breakpoints included.
std::vector<RadialNode> radial_rule(std::vector<double> breaks, double fine_lo, double fine_hi, const QuadratureOptions& o,
                                    const GaussLegendre& gl) {
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(), [](double a, double b) { return std::abs(a - b) < 1e-14; }),
               breaks.end());
  std::vector<RadialNode> out;
  for (size_t k = 0; k + 1 < breaks.size(); ++k) {
    double a = breaks[k], b = breaks[k + 1];
    bool fine = a >= fine_lo - 1e-14 && b <= fine_hi + 1e-14;
    double width = fine ? o.panel_width / 4 : o.panel_width;
    int m = std::max(1, static_cast<int>(std::ceil((b - a) / width - 1e-12)));
    for (int p = 0; p < m; ++p) {
      double lo = a + (b - a) * p / m, hi = a + (b - a) * (p + 1) / m;
      for (size_t q = 0; q < gl.x.size(); ++q)
        out.push_back({0.5 * (lo + hi) + 0.5 * (hi - lo) * gl.x[q], 0.5 * (hi - lo) * gl.w[q]});
    }
  }
  return out;
}

struct PolarTotals {
  std::vector<double> kin, top, im;  // per delta
  long nodes = 0;
};

// Integrates weight(r) * density * r^2 d rho d theta over a log-polar region around c.
// Nodes sorted along the direction of travel; include(k, rho) says whether a node counts for delta k.
PolarTotals polar_region(const MetricField& f, const Web& web, cd c, double rho_start,
                         const std::vector<RadialNode>& nodes, const std::function<double(double)>& weight,
                         const std::function<bool(size_t, double)>& include, size_t ndelta,
                         const QuadratureOptions& o) {
  const int M = o.angular_nodes;
  std::vector<CMatrix> ring(M);
  double r0 = std::exp(rho_start);
  ring[0] = web.at(c + r0);
  for (int m = 1; m < M; ++m) {
    double t0 = 2 * kPi * (m - 1) / M, t1 = 2 * kPi * m / M;
    TransportOptions to;
    to.tol = f.tol();
    to.r_min = 0;
    ring[m] = transport(f.system(), {PathSegment::arc(c, r0, t0, t1)}, ring[m - 1], to).value;
  }
  std::vector<std::vector<Density>> vals(M, std::vector<Density>(nodes.size()));
  parallel_for(M, o.threads, [&](int m) {
    double th = 2 * kPi * m / M;
    CMatrix Y = ring[m];
    double rho = rho_start;
    TransportOptions to;
    to.tol = f.tol();
    to.r_min = 0;
    for (size_t k = 0; k < nodes.size(); ++k) {
      Y = transport(f.system(), {PathSegment::log_ray(c, th, rho, nodes[k].rho)}, Y, to).value;
      rho = nodes[k].rho;
      double w = weight(std::exp(rho));
      if (w > 0) vals[m][k] = density(f, Y, c + std::exp(rho) * std::exp(kI * th));
    }
  });
  PolarTotals t;
  t.kin.assign(ndelta, 0);
  t.top.assign(ndelta, 0);
  t.im.assign(ndelta, 0);
  for (size_t k = 0; k < nodes.size(); ++k) {
    double sk = 0, st = 0, si = 0;
    for (int m = 0; m < M; ++m) {
      sk += vals[m][k].kin;
      st += vals[m][k].top;
      si += vals[m][k].kin_im;
    }
    double r = std::exp(nodes[k].rho);
    double w = weight(r) * nodes[k].w * r * r * 2 * kPi / M;
    for (size_t d = 0; d < ndelta; ++d)
      if (include(d, nodes[k].rho)) {
        t.kin[d] += w * sk;
        t.top[d] += w * st;
        t.im[d] += w * si;
      }
  }
  t.nodes = static_cast<long>(nodes.size()) * M;
  return t;
}

struct CellValue {
  double kin = 0, top = 0, im = 0;
};

CellValue cell_integral(const MetricField& f, const Web& web, const QuadratureLayout& L, const Cell& c,
                        const GaussLegendre& gl) {
  const auto& pts = f.system().weights.points;
  CellValue v;
  double h = 0.5 * c.size;
  for (size_t a = 0; a < gl.x.size(); ++a)
    for (size_t b = 0; b < gl.x.size(); ++b) {
      cd z(c.x + h * (1 + gl.x[a]), c.y + h * (1 + gl.x[b]));
      double w = middle_weight(L, pts, z);
      if (w <= 0) continue;
      auto d = density(f, web.at(z), z);
      double ww = w * gl.w[a] * gl.w[b] * h * h;
      v.kin += ww * d.kin;
      v.top += ww * d.top;
      v.im += ww * d.kin_im;
    }
  return v;
}

std::array<Cell, 4> children(const Cell& c) {
  double h = 0.5 * c.size;
  return {Cell{c.x, c.y, h}, Cell{c.x + h, c.y, h}, Cell{c.x, c.y + h, h}, Cell{c.x + h, c.y + h, h}};
}

}  // namespace

QuadratureLayout make_layout_geometry(const std::vector<cd>& points) {
  QuadratureLayout L;
  double R0 = 0;
  for (size_t i = 0; i < points.size(); ++i) {
    double d = INFINITY;
    for (size_t j = 0; j < points.size(); ++j)
      if (i != j) d = std::min(d, std::abs(points[i] - points[j]));
    if (!std::isfinite(d)) d = 1.0;
    L.r_outer.push_back(0.5 * d);
    L.r_inner.push_back(0.25 * d);
    R0 = std::max(R0, std::abs(points[i]));
  }
  double rb = *std::max_element(L.r_outer.begin(), L.r_outer.end());
  L.R1 = R0 + rb;
  L.R2 = 2 * L.R1;
  return L;
}

double extrapolation_exponent(const WeightSystem& ws) {
  double k = INFINITY;
  for (int i = 0; i + 1 < ws.n(); ++i) k = std::min(k, 2 * (ws.weights[i].front() - ws.weights[i].back() + 1));
  const auto& lam = ws.infinity_exponents;
  double spread = *std::max_element(lam.begin(), lam.end()) - *std::min_element(lam.begin(), lam.end());
  return std::min(k, 2 * (1 - spread));
}

std::array<double, 3> fit_power(const std::vector<double>& deltas, const std::vector<double>& s, double kappa) {
  const int m = static_cast<int>(deltas.size());
  Eigen::MatrixXd X(m, 2);
  Eigen::VectorXd y(m);
  for (int k = 0; k < m; ++k) {
    X(k, 0) = 1;
    X(k, 1) = std::pow(deltas[k], kappa);
    y(k) = s[k];
  }
  Eigen::VectorXd c = X.colPivHouseholderQr().solve(y);
  double res = (X * c - y).cwiseAbs().maxCoeff();
  return {c(0), c(1), res};
}

ActionResult action_regularized(const MetricField& f, const std::vector<double>& deltas, const QuadratureOptions& o,
                                QuadratureLayout* layout_io) {
  if (!f.canonical()) throw Error(ErrorKind::RegularLocus, "field is not canonically normalized (large-cell flag false)");
  if (deltas.size() < 2) throw Error(ErrorKind::Validation, "at least two deltas are required");
  for (size_t k = 1; k < deltas.size(); ++k)
    if (!(deltas[k] < deltas[k - 1])) throw Error(ErrorKind::Validation, "deltas must decrease");
  const auto& ws = f.system().weights;
  const auto& pts = ws.points;
  QuadratureLayout L = (layout_io && !layout_io->empty()) ? *layout_io : make_layout_geometry(pts);
  for (size_t i = 0; i < pts.size(); ++i)
    if (!(deltas[0] < L.r_inner[i])) throw Error(ErrorKind::Validation, "largest delta exceeds the inner disc radius");
  if (!(1 / deltas[0] > L.R2)) throw Error(ErrorKind::Validation, "largest delta too large for the outer region");

  GaussLegendre gl(o.radial_order), gc(o.cell_order);
  Web web(f, L);
  const size_t nd = deltas.size();
  ActionResult res;
  res.K1 = ws.K1();
  res.K2 = ws.K2();
  std::vector<double> kin(nd, 0), top(nd, 0), im(nd, 0);

  for (size_t i = 0; i < pts.size(); ++i) {
    std::vector<double> br{std::log(L.r_inner[i]), std::log(L.r_outer[i])};
    for (double d : deltas) br.push_back(std::log(d));
    auto nodes = radial_rule(br, std::log(L.r_inner[i]), std::log(L.r_outer[i]), o, gl);
    std::reverse(nodes.begin(), nodes.end());
    auto t = polar_region(
        f, web, pts[i], std::log(L.r_outer[i]), nodes, [&](double r) { return inner_weight(L, static_cast<int>(i), r); },
        [&](size_t d, double rho) { return rho > std::log(deltas[d]); }, nd, o);
    for (size_t d = 0; d < nd; ++d) {
      kin[d] += t.kin[d];
      top[d] += t.top[d];
      im[d] += t.im[d];
    }
    res.nodes += t.nodes;
  }
  {
    std::vector<double> br{std::log(L.R1), std::log(L.R2)};
    for (double d : deltas) br.push_back(-std::log(d));
    auto nodes = radial_rule(br, std::log(L.R1), std::log(L.R2), o, gl);
    auto t = polar_region(
        f, web, 0.0, std::log(L.R1), nodes, [&](double r) { return outer_weight(L, r); },
        [&](size_t d, double rho) { return rho < -std::log(deltas[d]); }, nd, o);
    for (size_t d = 0; d < nd; ++d) {
      kin[d] += t.kin[d];
      top[d] += t.top[d];
      im[d] += t.im[d];
    }
    res.nodes += t.nodes;
  }

  // Middle region on a quadtree over [-R2, R2]^2.
  if (L.leaves.empty()) {
    double box = 2 * L.R2;
    double base = box / o.base_cells;
    std::vector<Cell> frontier;
    for (int a = 0; a < o.base_cells; ++a)
      for (int b = 0; b < o.base_cells; ++b) frontier.push_back({-L.R2 + a * base, -L.R2 + b * base, base});
    std::vector<CellValue> fval(frontier.size());
    parallel_for(static_cast<int>(frontier.size()), o.threads,
                 [&](int k) { fval[k] = cell_integral(f, web, L, frontier[k], gc); });
    for (int depth = 0; !frontier.empty(); ++depth) {
      std::vector<std::array<CellValue, 4>> kids(frontier.size());
      parallel_for(static_cast<int>(frontier.size()), o.threads, [&](int k) {
        auto ch = children(frontier[k]);
        for (int q = 0; q < 4; ++q) kids[k][q] = cell_integral(f, web, L, ch[q], gc);
      });
      std::vector<Cell> next;
      std::vector<CellValue> nval;
      for (size_t k = 0; k < frontier.size(); ++k) {
        double sk = 0, st = 0;
        for (auto& v : kids[k]) {
          sk += v.kin;
          st += v.top;
        }
        double err = std::abs(sk - fval[k].kin) + std::abs(st - fval[k].top);
        double area = frontier[k].size * frontier[k].size;
        auto ch = children(frontier[k]);
        if (err > o.cell_tol * area / (box * box) && depth + 1 < o.max_depth) {
          for (int q = 0; q < 4; ++q) {
            next.push_back(ch[q]);
            nval.push_back(kids[k][q]);
          }
        } else {
          for (int q = 0; q < 4; ++q) L.leaves.push_back(ch[q]);
        }
      }
      frontier = std::move(next);
      fval = std::move(nval);
    }
  }
  std::vector<CellValue> leaf(L.leaves.size());
  parallel_for(static_cast<int>(L.leaves.size()), o.threads,
               [&](int k) { leaf[k] = cell_integral(f, web, L, L.leaves[k], gc); });
  double mk = 0, mt = 0, mi = 0;
  for (const auto& v : leaf) {
    mk += v.kin;
    mt += v.top;
    mi += v.im;
  }
  res.nodes += static_cast<long>(L.leaves.size()) * o.cell_order * o.cell_order;
  if (layout_io) *layout_io = L;

  std::vector<double> tot(nd), ks(nd), ts(nd);
  for (size_t d = 0; d < nd; ++d) {
    DeltaRow row;
    row.delta = deltas[d];
    row.kinetic = kin[d] + mk;
    row.topological = top[d] + mt;
    row.counterterm = 2 * kPi * std::log(deltas[d]) * (res.K1 + res.K2);
    row.total = row.kinetic + row.topological + row.counterterm;
    row.imag = im[d] + mi;
    res.per_delta.push_back(row);
    tot[d] = row.total;
    ks[d] = row.kinetic + row.counterterm;
    ts[d] = row.topological;
  }
  res.kappa = extrapolation_exponent(ws);
  auto fit = fit_power(deltas, tot, res.kappa);
  res.value = fit[0];
  res.fit_C = fit[1];
  res.extrapolation_error = fit[2];
  res.kinetic_part = fit_power(deltas, ks, res.kappa)[0];
  res.topological_part = fit_power(deltas, ts, res.kappa)[0];
  {
    std::vector<double> imv;
    for (auto& row : res.per_delta) imv.push_back(row.imag);
    res.imag_part = fit_power(deltas, imv, res.kappa)[0];
  }
  res.spread = *std::max_element(tot.begin(), tot.end()) - *std::min_element(tot.begin(), tot.end());
  if (res.extrapolation_error > 1e-2 * std::abs(res.value)) {
    std::string msg = "fit residual " + std::to_string(res.extrapolation_error) + " exceeds 1% of the value";
    if (o.strict) throw Error(ErrorKind::UnreliableExtrapolation, msg);
    res.warnings.push_back(msg);
  }
  return res;
}

double annulus_kinetic(const MetricField& f, int i, double delta, const QuadratureOptions& o) {
  const auto& pts = f.system().weights.points;
  cd c = pts[i];
  cd z0 = f.basepoint();
  double th0 = std::arg(z0 - c);
  double rho_hi = std::log(2 * delta), rho_lo = std::log(delta);
  CMatrix Yout = f.solution_at(c + 2 * delta * std::exp(kI * th0));
  GaussLegendre gl(o.radial_order);
  std::vector<RadialNode> nodes;
  int panels = 2;
  for (int p = 0; p < panels; ++p) {
    double lo = rho_lo + (rho_hi - rho_lo) * p / panels, hi = rho_lo + (rho_hi - rho_lo) * (p + 1) / panels;
    for (size_t q = 0; q < gl.x.size(); ++q)
      nodes.push_back({0.5 * (lo + hi) + 0.5 * (hi - lo) * gl.x[q], 0.5 * (hi - lo) * gl.w[q]});
  }
  std::reverse(nodes.begin(), nodes.end());
  const int M = o.angular_nodes;
  TransportOptions to;
  to.tol = f.tol();
  to.r_min = 0;
  std::vector<CMatrix> ring(M);
  ring[0] = Yout;
  for (int m = 1; m < M; ++m)
    ring[m] = transport(f.system(), {PathSegment::arc(c, 2 * delta, th0 + 2 * kPi * (m - 1) / M, th0 + 2 * kPi * m / M)},
                        ring[m - 1], to)
                  .value;
  std::vector<double> acc(M, 0.0);
  parallel_for(M, o.threads, [&](int m) {
    double th = th0 + 2 * kPi * m / M;
    CMatrix Y = ring[m];
    double rho = rho_hi;
    for (const auto& nd : nodes) {
      Y = transport(f.system(), {PathSegment::log_ray(c, th, rho, nd.rho)}, Y, to).value;
      rho = nd.rho;
      double r = std::exp(rho);
      auto s = f.sample(Y, c + r * std::exp(kI * th));
      acc[m] += nd.w * r * r * kinetic_density(s.h, s.A);
    }
  });
  double total = 0;
  for (double a : acc) total += a;
  return total * 2 * kPi / M;
}

}  // namespace rhwz
