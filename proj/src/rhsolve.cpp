#include "rhwz/rhsolve.hpp"

#include <algorithm>
#include <cmath>

#include "rhwz/parallel.hpp"

namespace rhwz {

ResidueParametrization ResidueParametrization::at(const std::vector<CMatrix>& base) {
  ResidueParametrization p;
  p.base = base;
  int r = base.empty() ? 0 : static_cast<int>(base[0].rows());
  p.params = Eigen::VectorXd::Zero(static_cast<long>(base.size()) * 2 * (r * r - r));
  return p;
}

ResidueParametrization ResidueParametrization::random(const WeightSystem& ws, Rng& rng) {
  std::vector<CMatrix> base;
  for (int i = 0; i + 1 < ws.n(); ++i) base.push_back(random_complex(ws.rank(), ws.rank(), rng));
  return at(base);
}

ResidueParametrization ResidueParametrization::from_system(const FuchsianSystem& sys) {
  std::vector<CMatrix> base;
  for (size_t i = 0; i < sys.residues.size(); ++i) {
    auto es = eig_small(sys.residues[i], INFINITY);
    std::vector<cd> target(sys.weights.weights[i].begin(), sys.weights.weights[i].end());
    auto match = match_values(es.values, target);
    CMatrix B(sys.rank(), sys.rank());
    for (int k = 0; k < sys.rank(); ++k) B.col(match[k]) = es.vectors.col(k);
    base.push_back(B);
  }
  return at(base);
}

std::vector<CMatrix> ResidueParametrization::frames() const {
  std::vector<CMatrix> out;
  long idx = 0;
  for (const auto& B : base) {
    int r = static_cast<int>(B.rows());
    CMatrix K = CMatrix::Zero(r, r);
    for (int j = 0; j < r; ++j)
      for (int k = 0; k < r; ++k) {
        if (j == k) continue;
        K(j, k) = cd(params(idx), params(idx + 1));
        idx += 2;
      }
    out.push_back(B * mat_exp(K));
  }
  return out;
}

FuchsianSystem ResidueParametrization::system(const WeightSystem& ws) const {
  FuchsianSystem s{ws, {}};
  auto C = frames();
  for (size_t i = 0; i < C.size(); ++i) s.residues.push_back(C[i] * ws.W(static_cast<int>(i)) * inverse(C[i]));
  return s;
}

ResidueParametrization ResidueParametrization::recentred() const { return at(frames()); }

NormalizedMonodromy normalize_monodromy(const MonodromyResult& mono, const WeightSystem& ws) {
  const int r = ws.rank(), n = ws.n();
  if (static_cast<int>(mono.generators.size()) != n) throw Error(ErrorKind::Validation, "monodromy has the wrong length");
  auto es = eig_small(mono.generators[n - 1], INFINITY);
  std::vector<cd> target;
  for (double a : ws.weights[n - 1]) target.push_back(std::exp(2.0 * kPi * kI * a));
  auto match = match_values(es.values, target);
  CMatrix V(r, r);
  for (int k = 0; k < r; ++k) V.col(match[k]) = es.vectors.col(k);

  // Invariant form P = V diag(x) V^*: rho_i P rho_i^* = P, linear in x.
  NormalizedMonodromy out;
  std::vector<double> x(r, 1.0);
  if (r > 1) {
    Eigen::MatrixXd E(2L * (n - 1) * r * r, r);
    for (int i = 0; i < n - 1; ++i)
      for (int j = 0; j < r; ++j) {
        CVector w = mono.generators[i] * V.col(j);
        CMatrix t = w * w.adjoint() - V.col(j) * V.col(j).adjoint();
        for (int a = 0; a < r; ++a)
          for (int b = 0; b < r; ++b) {
            long row = 2L * ((static_cast<long>(i) * r + a) * r + b);
            E(row, j) = t(a, b).real();
            E(row + 1, j) = t(a, b).imag();
          }
      }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(E, Eigen::ComputeFullV);
    auto s = svd.singularValues();
    Eigen::VectorXd v = svd.matrixV().col(r - 1);
    if (v.sum() < 0) v = -v;
    out.unitarity_residual = s(r - 1) / std::max(s(0), 1e-300);
    for (int j = 0; j < r; ++j) {
      if (!(v(j) > 0)) throw Error(ErrorKind::NotAdmissible, "monodromy has no positive invariant Hermitian form");
      x[j] = v(j) / v.maxCoeff();
    }
  }
  CMatrix K(r, r);
  for (int j = 0; j < r; ++j) K.col(j) = std::sqrt(x[j]) * V.col(j);
  CMatrix Kinv = inverse(K);
  out.K = K;
  out.rep.weights = ws;
  for (int i = 0; i < n; ++i) {
    CMatrix g = Kinv * mono.generators[i] * K;
    out.rep.generators.push_back(g);
    if (i == n - 1) {
      out.rep.conjugators.push_back(identity(r));
      continue;
    }
    auto e = eig_small(g, INFINITY);
    std::vector<cd> tg;
    for (double a : ws.weights[i]) tg.push_back(std::exp(2.0 * kPi * kI * a));
    auto mm = match_values(e.values, tg);
    CMatrix U(r, r);
    for (int k = 0; k < r; ++k) U.col(mm[k]) = e.vectors.col(k);
    out.rep.conjugators.push_back(U);
  }
  return out;
}

Eigen::VectorXd residual_vector(const FuchsianSystem& sys, const AdmissibleRep& target, const SolverOptions& opts) {
  const auto& ws = sys.weights;
  const int r = ws.rank(), n = ws.n();
  if (target.n() != n || target.rank() != r) throw Error(ErrorKind::Validation, "target does not match the weights");
  auto mono = monodromy_rep(sys, std::nullopt, opts.transport_tol, false);
  std::vector<cd> tdiag;
  for (int j = 0; j < r; ++j) tdiag.push_back(target.generators[n - 1](j, j));
  auto es = eig_small(mono.generators[n - 1], INFINITY);
  auto match = match_values(es.values, tdiag);
  CMatrix V(r, r);
  for (int k = 0; k < r; ++k) V.col(match[k]) = es.vectors.col(k);
  CMatrix Vinv = inverse(V);
  std::vector<CMatrix> rho;
  for (int i = 0; i < n; ++i) rho.push_back(Vinv * mono.generators[i] * V);

  // Complex diagonal gauge fixed on a star tree rooted at index 0, using the largest target entries.
  std::vector<cd> D(r, 1.0);
  for (int k = 1; k < r; ++k) {
    double best = -1;
    int bi = 0;
    bool upper = true;
    for (int i = 0; i < n - 1; ++i) {
      if (std::abs(target.generators[i](0, k)) > best) {
        best = std::abs(target.generators[i](0, k));
        bi = i;
        upper = true;
      }
      if (std::abs(target.generators[i](k, 0)) > best) {
        best = std::abs(target.generators[i](k, 0));
        bi = i;
        upper = false;
      }
    }
    if (upper) {
      cd c = rho[bi](0, k);
      if (std::abs(c) > 0) D[k] = c / target.generators[bi](0, k);
    } else {
      cd c = rho[bi](k, 0);
      if (std::abs(c) > 0) D[k] = target.generators[bi](k, 0) / c;
    }
  }
  Eigen::VectorXd f(2L * (n - 1) * r * r + 4L * r);
  long idx = 0;
  for (int i = 0; i < n - 1; ++i)
    for (int j = 0; j < r; ++j)
      for (int k = 0; k < r; ++k) {
        cd d = D[j] * rho[i](j, k) / D[k] - target.generators[i](j, k);
        f(idx++) = d.real();
        f(idx++) = d.imag();
      }
  for (int j = 0; j < r; ++j) {
    cd d = rho[n - 1](j, j) - tdiag[j];
    f(idx++) = d.real();
    f(idx++) = d.imag();
  }
  auto an = eig_small(sys.residue_at_infinity(), INFINITY).values;
  std::vector<cd> lam(ws.infinity_exponents.begin(), ws.infinity_exponents.end());
  auto lm = match_values(an, lam);
  std::vector<cd> diff(r);
  for (int k = 0; k < r; ++k) diff[lm[k]] = an[k] - lam[lm[k]];
  for (int j = 0; j < r; ++j) {
    f(idx++) = opts.spectrum_weight * diff[j].real();
    f(idx++) = opts.spectrum_weight * diff[j].imag();
  }
  for (double v : f)
    if (!std::isfinite(v)) throw Error(ErrorKind::NonConvergence, "non-finite residual");
  return f;
}

Eigen::VectorXd residual_vector(const ResidueParametrization& params, const AdmissibleRep& target,
                                const SolverOptions& opts) {
  return residual_vector(params.system(target.weights), target, opts);
}

double monodromy_distance(const FuchsianSystem& sys, const AdmissibleRep& target, double transport_tol,
                          double* relation_residual) {
  auto mono = monodromy_rep(sys, std::nullopt, transport_tol, true);
  if (relation_residual) *relation_residual = mono.relation_residual;
  auto nm = normalize_monodromy(mono, sys.weights);
  return rep_distance(nm.rep, target);
}

namespace {

struct LMOutcome {
  Eigen::VectorXd x;
  double norm = INFINITY;
  int iterations = 0;
  std::vector<double> history;
};

template <class F>
LMOutcome levenberg_marquardt(F&& residual, Eigen::VectorXd x, const SolverOptions& opts) {
  LMOutcome out;
  auto eval = [&](const Eigen::VectorXd& p, Eigen::VectorXd& f) {
    try {
      f = residual(p);
      return true;
    } catch (const Error&) {
      return false;
    }
  };
  Eigen::VectorXd f;
  if (!eval(x, f)) throw Error(ErrorKind::NonConvergence, "residual undefined at the initial point");
  const long P = x.size();
  auto jacobian = [&](const Eigen::VectorXd& p) {
    Eigen::MatrixXd J(f.size(), P);
    std::vector<int> ok(P, 1);
    parallel_for(static_cast<int>(P), opts.threads, [&](int k) {
      double h = opts.fd_step * std::max(1.0, std::abs(p(k)));
      Eigen::VectorXd a = p, b = p, fa, fb;
      a(k) += h;
      b(k) -= h;
      if (!eval(a, fa) || !eval(b, fb)) {
        ok[k] = 0;
        J.col(k).setZero();
        return;
      }
      J.col(k) = (fa - fb) / (2 * h);
    });
    return J;
  };
  double cost = 0.5 * f.squaredNorm();
  out.history.push_back(f.norm());
  if (P == 0) {
    out.x = x;
    out.norm = f.norm();
    return out;
  }
  Eigen::MatrixXd J = jacobian(x);
  Eigen::MatrixXd A = J.transpose() * J;
  Eigen::VectorXd g = J.transpose() * f;
  double mu = opts.initial_damping * A.diagonal().maxCoeff();
  double nu = 2;
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    if (f.norm() <= opts.stop_residual) break;
    Eigen::MatrixXd M = A + mu * Eigen::MatrixXd::Identity(P, P);
    Eigen::VectorXd delta = M.ldlt().solve(-g);
    if (delta.norm() <= 1e-15 * (x.norm() + 1e-15)) break;
    Eigen::VectorXd xn = x + delta, fn;
    double rho = -1;
    if (eval(xn, fn)) {
      double pred = 0.5 * delta.dot(mu * delta - g);
      rho = (cost - 0.5 * fn.squaredNorm()) / std::max(pred, 1e-300);
    }
    if (rho > 0) {
      x = xn;
      f = fn;
      cost = 0.5 * f.squaredNorm();
      out.history.push_back(f.norm());
      J = jacobian(x);
      A = J.transpose() * J;
      g = J.transpose() * f;
      mu *= std::max(1.0 / 3, 1 - std::pow(2 * rho - 1, 3));
      nu = 2;
    } else {
      mu *= nu;
      nu *= 2;
      if (mu > 1e20) break;
    }
  }
  out.x = x;
  out.norm = f.norm();
  out.iterations = it;
  return out;
}

}  // namespace

InfinityNormalization normalize_at_infinity(const FuchsianSystem& sys, double transport_tol,
                                            const std::optional<MonodromyResult>& given) {
  const auto& ws = sys.weights;
  const int r = ws.rank();
  const auto& lam = ws.infinity_exponents;
  for (int j = 0; j < r; ++j)
    for (int k = 0; k < j; ++k) {
      double d = lam[j] - lam[k];
      if (std::abs(d - std::round(d)) < 1e-8) throw Error(ErrorKind::Resonance, "infinity exponents differ by an integer");
    }
  MonodromyResult mono = given ? *given : monodromy_rep(sys, std::nullopt, transport_tol, true);
  auto nm = normalize_monodromy(mono, ws);
  InfinityNormalization out;
  out.K = nm.K;
  out.basepoint = mono.basepoint;
  cd z0 = mono.basepoint;
  double h = std::abs(z0);
  double R = 1e4 * std::max(1.0, h);
  out.radius = R;
  TransportOptions o;
  o.tol = transport_tol;
  Path to_axis;
  if (std::abs(std::arg(z0) - kPi / 2) > 1e-14) to_axis.push_back(PathSegment::arc(0.0, h, std::arg(z0), kPi / 2));
  Path p1 = to_axis;
  p1.push_back(PathSegment::log_ray(0.0, kPi / 2, std::log(h), std::log(R)));
  auto y1 = transport(sys, p1, identity(r), o);
  auto y2 = transport(sys, {PathSegment::log_ray(0.0, kPi / 2, std::log(R), std::log(2 * R))}, y1.value, o);
  auto F = [&](const CMatrix& Y, double rad) {
    std::vector<cd> d;
    for (double l : lam) d.push_back(std::exp(-l * (std::log(rad) + kI * (kPi / 2))));
    return CMatrix(Y * nm.K * diag(d));
  };
  out.G_R = F(y1.value, R);
  out.G_2R = F(y2.value, 2 * R);
  out.G = 2.0 * out.G_2R - out.G_R;
  out.consistency = frob(out.G_R - out.G_2R) / frob(out.G);
  if (out.consistency > 1e-3) out.warnings.push_back("unreliable expansion at infinity: radii disagree by " + std::to_string(out.consistency));
  out.S = antidiagonal(r) * inverse(out.G);
  out.canonical.weights = ws;
  for (const auto& a : sys.residues) out.canonical.residues.push_back(out.S * a * inverse(out.S));
  out.Y0 = out.S * nm.K;
  Eigen::JacobiSVD<CMatrix> svd(out.G);
  auto s = svd.singularValues();
  double cond = s(0) / s(r - 1);
  bool spectrum_ok = sys.infinity_spectrum_error() <= 1e-6;
  out.large_cell_flag = spectrum_ok && cond < 1e10 && out.consistency <= 1e-3 && in_large_cell(out.S * out.G_2R);
  if (!spectrum_ok) out.warnings.push_back("spectrum at infinity does not match the splitting type");
  return out;
}

SolveResult solve(const WeightSystem& ws, const AdmissibleRep& target, const std::optional<ResidueParametrization>& init,
                  const SolverOptions& opts) {
  const int r = ws.rank(), n = ws.n();
  if (target.n() != n || target.rank() != r) throw Error(ErrorKind::Validation, "target does not match the weights");
  if (!is_irreducible(target)) throw Error(ErrorKind::Reducible, "target representation is reducible");
  std::optional<SolveResult> best;
  auto better = [](const SolveResult& a, const SolveResult& b) {
    if (a.report.success != b.report.success) return a.report.success;
    if (a.report.final_residual != b.report.final_residual) return a.report.final_residual < b.report.final_residual;
    return a.report.seed_used < b.report.seed_used;
  };
  int attempts = std::max(1, opts.restarts);
  for (int k = 0; k < attempts; ++k) {
    std::uint64_t seed = opts.seed + static_cast<std::uint64_t>(k);
    ResidueParametrization p0;
    if (k == 0 && init) {
      p0 = *init;
    } else if (r == 1) {
      p0 = ResidueParametrization::at(std::vector<CMatrix>(n - 1, identity(1)));
    } else {
      Rng rng(seed);
      p0 = ResidueParametrization::random(ws, rng);
    }
    SolveResult res;
    res.report.seed_used = seed;
    res.report.restart_index = k;
    try {
      auto lm = levenberg_marquardt(
          [&](const Eigen::VectorXd& x) {
            ResidueParametrization p = p0;
            p.params = x;
            return residual_vector(p, target, opts);
          },
          p0.params, opts);
      res.params = p0;
      res.params.params = lm.x;
      res.report.iterations = lm.iterations;
      res.report.history = lm.history;
      res.system = res.params.system(ws);
      res.report.final_residual = monodromy_distance(res.system, target, opts.transport_tol, &res.report.relation_residual);
      res.report.infinity_spectrum_error = res.system.infinity_spectrum_error();
      res.report.success = res.report.final_residual <= opts.tol && res.report.infinity_spectrum_error <= opts.tol;
    } catch (const Error& e) {
      res.report.warnings.push_back(std::string("restart ") + std::to_string(k) + " failed: " + e.what());
    }
    if (!best || better(res, *best)) best = res;
    if (best->report.success) break;
  }
  SolveResult out = *best;
  if (out.system.residues.empty()) throw Error(ErrorKind::NonConvergence, "all restarts failed");
  if (!out.report.success) out.report.warnings.push_back("solver did not reach the requested tolerance");
  if (out.report.success) {
    try {
      out.normalization = normalize_at_infinity(out.system, opts.transport_tol);
      out.report.large_cell_flag = out.normalization->large_cell_flag;
      for (const auto& w : out.normalization->warnings) out.report.warnings.push_back(w);
    } catch (const Error& e) {
      out.report.warnings.push_back(std::string("normalization at infinity failed: ") + e.what());
    }
  }
  return out;
}

}  // namespace rhwz
