#include "rhwz/fuchs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rhwz {

CMatrix WeightSystem::W(int i) const {
  std::vector<cd> d(weights[i].begin(), weights[i].end());
  return diag(d);
}

CMatrix WeightSystem::Lambda() const {
  std::vector<cd> d(infinity_exponents.begin(), infinity_exponents.end());
  return diag(d);
}

double WeightSystem::K1() const {
  double s = 0;
  for (int i = 0; i + 1 < n(); ++i)
    for (double a : weights[i]) s += a * a;
  return s;
}

double WeightSystem::K2() const {
  double s = 0;
  for (double l : infinity_exponents) s += l * l;
  return s;
}

WeightSystem build_weight_system(const std::vector<cd>& points, const std::vector<std::vector<double>>& weights,
                                 int degree) {
  if (points.empty()) throw Error(ErrorKind::Validation, "at least one finite point is required");
  if (weights.size() != points.size() + 1)
    throw Error(ErrorKind::Validation, "weights must have one row per point plus one for infinity");
  const int n = static_cast<int>(weights.size());
  const int r = static_cast<int>(weights[0].size());
  if (r < 1 || r > kMaxDim) throw Error(ErrorKind::Validation, "rank must be between 1 and 8");
  for (size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i].real()) || !std::isfinite(points[i].imag()))
      throw Error(ErrorKind::Validation, "points must be finite");
    for (size_t j = 0; j < i; ++j)
      if (std::abs(points[i] - points[j]) < 1e-12) throw Error(ErrorKind::Validation, "points must be distinct");
  }
  double total = 0;
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(weights[i].size()) != r) throw Error(ErrorKind::Validation, "weights rows must share the rank");
    for (int j = 0; j < r; ++j) {
      double a = weights[i][j];
      if (!(a > 0.0 && a < 1.0)) throw Error(ErrorKind::Validation, "weights must lie in (0,1)");
      if (j > 0 && !(a > weights[i][j - 1])) throw Error(ErrorKind::Validation, "weights must increase strictly per point");
      total += a;
    }
  }
  double rounded = std::round(total);
  if (std::abs(total - rounded) > 1e-9) throw Error(ErrorKind::Degree, "sum of weights is not an integer");
  if (static_cast<int>(rounded) != -degree)
    throw Error(ErrorKind::Degree, "degree must equal minus the sum of weights (" + std::to_string(-static_cast<int>(rounded)) + ")");
  // d = m r + p with 0 <= p < r
  int m = static_cast<int>(std::floor(static_cast<double>(degree) / r));
  int p = degree - m * r;
  std::vector<int> degs;
  for (int j = 0; j < r - p; ++j) degs.push_back(m);
  for (int j = 0; j < p; ++j) degs.push_back(m + 1);
  for (int mj : degs)
    if (!(mj > -n && mj < 0))
      throw Error(ErrorKind::StabilityRange, "splitting degree " + std::to_string(mj) + " outside (-n, 0)");
  WeightSystem ws;
  ws.points = points;
  ws.weights = weights;
  ws.degree = degree;
  ws.splitting = SplittingType::from_degrees(degs);
  for (int j = 0; j < r; ++j) ws.infinity_exponents.push_back(weights[n - 1][j] + ws.splitting.m[r - 1 - j]);
  return ws;
}

double AdmissibleRep::relation_residual() const {
  if (generators.empty()) return 0;
  CMatrix p = identity(rank());
  for (const auto& m : generators) p = p * m;
  return frob(p - identity(rank()));
}

static CMatrix phase_diag(const std::vector<double>& alpha, double sign = 1.0) {
  std::vector<cd> d;
  for (double a : alpha) d.push_back(std::exp(sign * 2.0 * kPi * kI * a));
  return diag(d);
}

AdmissibleRep build_admissible_rep(const WeightSystem& ws, const std::vector<CMatrix>& conjugators) {
  const int n = ws.n(), r = ws.rank();
  if (static_cast<int>(conjugators.size()) != n - 1)
    throw Error(ErrorKind::Validation, "expected n-1 conjugators");
  AdmissibleRep rep;
  rep.weights = ws;
  CMatrix prod = identity(r);
  for (int i = 0; i < n - 1; ++i) {
    const CMatrix& U = conjugators[i];
    if (U.rows() != r || U.cols() != r) throw Error(ErrorKind::Validation, "conjugator has the wrong shape");
    if (unitarity_error(U) > 1e-10 * r) throw Error(ErrorKind::Validation, "conjugator is not unitary");
    CMatrix M = U * phase_diag(ws.weights[i]) * U.adjoint();
    rep.generators.push_back(M);
    rep.conjugators.push_back(U);
    prod = prod * M;
  }
  CMatrix Mn = prod.adjoint();
  auto es = eig_small(Mn);
  std::vector<cd> target;
  for (double a : ws.weights[n - 1]) target.push_back(std::exp(2.0 * kPi * kI * a));
  auto match = match_values(es.values, target);
  double mismatch = 0;
  for (int k = 0; k < r; ++k) mismatch = std::max(mismatch, std::abs(es.values[k] - target[match[k]]));
  if (mismatch > 1e-6)
    throw Error(ErrorKind::NotAdmissible,
                "spectrum of the product does not match the weights at infinity (mismatch " + std::to_string(mismatch) + ")");
  CMatrix V(r, r);
  for (int k = 0; k < r; ++k) V.col(match[k]) = es.vectors.col(k);
  // Eigenvectors of a unitary matrix with distinct eigenvalues are orthogonal; remove roundoff.
  for (int j = 0; j < r; ++j) {
    for (int k = 0; k < j; ++k) V.col(j) -= V.col(k).dot(V.col(j)) * V.col(k);
    V.col(j) /= V.col(j).norm();
  }
  for (int i = 0; i < n - 1; ++i) {
    rep.generators[i] = V.adjoint() * rep.generators[i] * V;
    rep.conjugators[i] = V.adjoint() * rep.conjugators[i];
  }
  rep.generators.push_back(phase_diag(ws.weights[n - 1]));
  rep.conjugators.push_back(identity(r));
  if (r > 1 && commutant_dimension(rep.generators) > 1) rep.warnings.push_back("reducible: the tuple has a nontrivial commutant");
  return rep;
}

int commutant_dimension(const std::vector<CMatrix>& mats, double tol) {
  if (mats.empty()) return 0;
  const int r = static_cast<int>(mats[0].rows());
  const int r2 = r * r;
  Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(static_cast<long>(mats.size()) * r2, r2);
  for (size_t t = 0; t < mats.size(); ++t) {
    Eigen::MatrixXcd M = mats[t];
    // row (p,q) of XM - MX; vec index p + q r
    for (int p = 0; p < r; ++p)
      for (int q = 0; q < r; ++q) {
        long row = static_cast<long>(t) * r2 + p + q * r;
        for (int s = 0; s < r; ++s) {
          K(row, p + s * r) += M(s, q);
          K(row, s + q * r) -= M(p, s);
        }
      }
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(K);
  auto s = svd.singularValues();
  double smax = std::max(1.0, s(0));
  int dim = 0;
  for (int k = 0; k < s.size(); ++k)
    if (s(k) <= tol * smax) ++dim;
  return dim;
}

bool is_irreducible(const AdmissibleRep& rep) {
  if (rep.rank() == 1) return true;
  return commutant_dimension(rep.generators) == 1;
}

std::vector<CMatrix> hypergeometric_conjugators(const WeightSystem& ws) {
  if (ws.rank() != 2 || ws.n() != 3) throw Error(ErrorKind::Validation, "hypergeometric conjugators need r = 2, n = 3");
  const auto& w = ws.weights;
  cd d11 = std::exp(2.0 * kPi * kI * w[0][0]), d12 = std::exp(2.0 * kPi * kI * w[0][1]);
  cd d21 = std::exp(2.0 * kPi * kI * w[1][0]), d22 = std::exp(2.0 * kPi * kI * w[1][1]);
  cd T = std::exp(-2.0 * kPi * kI * w[2][0]) + std::exp(-2.0 * kPi * kI * w[2][1]);
  // tr(D1 R D2 R^T) = A + sin^2(theta) (B - A), made real by the half-determinant phase.
  cd A = d11 * d21 + d12 * d22, B = d11 * d22 + d12 * d21;
  cd ph = std::exp(-kPi * kI * (w[0][0] + w[0][1] + w[1][0] + w[1][1]));
  double num = (ph * (T - A)).real(), den = (ph * (B - A)).real();
  double t = num / den;
  if (!(t > 1e-12 && t < 1.0 - 1e-12))
    throw Error(ErrorKind::NotAdmissible, "no irreducible unitary triple for these weights");
  double th = std::asin(std::sqrt(t));
  CMatrix R(2, 2);
  R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  return {identity(2), R};
}

RepDistance rep_distance_detail(const AdmissibleRep& a, const AdmissibleRep& b) {
  if (a.n() != b.n() || a.rank() != b.rank()) throw Error(ErrorKind::Validation, "representations differ in shape");
  const int r = a.rank(), n = a.n();
  RepDistance out;
  const CMatrix& Mn = b.generators[n - 1];
  for (int j = 0; j < r; ++j)
    for (int k = 0; k < j; ++k)
      if (std::abs(Mn(j, j) - Mn(k, k)) < 1e-8)
        out.warnings.push_back("repeated eigenvalues at infinity: torus minimization only");
  // maximize Re sum_{jk} e^{i(phi_j - phi_k)} c_jk
  CMatrix c = CMatrix::Zero(r, r);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < r; ++j)
      for (int k = 0; k < r; ++k) c(j, k) += a.generators[i](j, k) * std::conj(b.generators[i](j, k));
  auto objective = [&](const std::vector<double>& phi) {
    double s = 0;
    for (int j = 0; j < r; ++j)
      for (int k = 0; k < r; ++k) s += (std::exp(kI * (phi[j] - phi[k])) * c(j, k)).real();
    return s;
  };
  auto ascend = [&](std::vector<double> phi) {
    double prev = objective(phi);
    for (int sweep = 0; sweep < 1000; ++sweep) {
      for (int j = 1; j < r; ++j) {
        cd s = 0;
        for (int k = 0; k < r; ++k)
          if (k != j) s += std::exp(-kI * phi[k]) * (c(j, k) + std::conj(c(k, j)));
        if (std::abs(s) > 0) phi[j] = -std::arg(s);
      }
      double cur = objective(phi);
      if (cur - prev <= 1e-15 * std::max(1.0, std::abs(cur))) break;
      prev = cur;
    }
    return phi;
  };
  std::vector<double> star(r, 0.0);
  for (int k = 1; k < r; ++k) {
    cd s = c(k, 0) + std::conj(c(0, k));
    star[k] = std::abs(s) > 0 ? -std::arg(s) : 0.0;
  }
  std::vector<double> p1 = ascend(star), p2 = ascend(std::vector<double>(r, 0.0));
  std::vector<double> phi = objective(p1) >= objective(p2) ? p1 : p2;
  double d2 = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < r; ++j)
      for (int k = 0; k < r; ++k)
        d2 += std::norm(std::exp(kI * (phi[j] - phi[k])) * a.generators[i](j, k) - b.generators[i](j, k));
  out.value = std::sqrt(d2);
  out.phases = phi;
  return out;
}

double rep_distance(const AdmissibleRep& a, const AdmissibleRep& b) { return rep_distance_detail(a, b).value; }

CMatrix FuchsianSystem::A(cd z) const {
  const int r = rank();
  CMatrix a = CMatrix::Zero(r, r);
  for (size_t i = 0; i < residues.size(); ++i) a += residues[i] / (z - weights.points[i]);
  return a;
}

cd FuchsianSystem::trace_A(cd z) const {
  cd t = 0;
  for (size_t i = 0; i < residues.size(); ++i) t += residues[i].trace() / (z - weights.points[i]);
  return t;
}

CMatrix FuchsianSystem::residue_at_infinity() const {
  CMatrix s = CMatrix::Zero(rank(), rank());
  for (const auto& a : residues) s -= a;
  return s;
}

static double spectrum_error(const CMatrix& m, const std::vector<double>& target) {
  auto es = eig_small(m, 1e14);
  std::vector<cd> t(target.begin(), target.end());
  auto match = match_values(es.values, t);
  double e = 0;
  for (size_t k = 0; k < t.size(); ++k) e = std::max(e, std::abs(es.values[k] - t[match[k]]));
  return e;
}

double FuchsianSystem::residue_spectrum_error() const {
  double e = 0;
  for (size_t i = 0; i < residues.size(); ++i) e = std::max(e, spectrum_error(residues[i], weights.weights[i]));
  return e;
}

double FuchsianSystem::infinity_spectrum_error() const {
  return spectrum_error(residue_at_infinity(), weights.infinity_exponents);
}

}  // namespace rhwz
