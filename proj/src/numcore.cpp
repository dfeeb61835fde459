#include "rhwz/numcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <unsupported/Eigen/MatrixFunctions>

namespace rhwz {

const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Singular: return "singular";
    case ErrorKind::AmbiguousCell: return "ambiguous-cell";
    case ErrorKind::Defective: return "defective";
    case ErrorKind::BranchCut: return "branch-cut";
    case ErrorKind::NotPositiveDefinite: return "not-positive-definite";
    case ErrorKind::Degree: return "degree";
    case ErrorKind::StabilityRange: return "stability-range";
    case ErrorKind::NotAdmissible: return "not-admissible";
    case ErrorKind::Reducible: return "reducible";
    case ErrorKind::Ordering: return "ordering";
    case ErrorKind::Proximity: return "proximity";
    case ErrorKind::Stiffness: return "stiffness";
    case ErrorKind::Resonance: return "resonance";
    case ErrorKind::RegularLocus: return "regular-locus";
    case ErrorKind::UnreliableExtrapolation: return "unreliable-extrapolation";
    case ErrorKind::Radius: return "radius";
    case ErrorKind::Hole: return "hole";
    case ErrorKind::NonConvergence: return "non-convergence";
  }
  return "error";
}

double frob(const CMatrix& m) { return m.norm(); }

bool all_finite(const CMatrix& m) {
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
  return true;
}

CMatrix identity(int r) { return CMatrix::Identity(r, r); }

CMatrix diag(const std::vector<cd>& d) {
  int r = static_cast<int>(d.size());
  CMatrix m = CMatrix::Zero(r, r);
  for (int i = 0; i < r; ++i) m(i, i) = d[i];
  return m;
}

CMatrix adjoint(const CMatrix& m) { return m.adjoint(); }

CMatrix inverse(const CMatrix& m) {
  if (m.rows() != m.cols()) throw Error(ErrorKind::Validation, "inverse of non-square matrix");
  Eigen::PartialPivLU<CMatrix> lu(m);
  CMatrix inv = lu.inverse();
  if (!all_finite(inv)) throw Error(ErrorKind::Singular, "matrix is not invertible");
  return inv;
}

cd det(const CMatrix& m) {
  if (m.rows() == 0) return 1.0;
  return m.determinant();
}

CMatrix select(const CMatrix& m, const std::vector<int>& rows, const std::vector<int>& cols) {
  CMatrix s(rows.size(), cols.size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < cols.size(); ++j) s(i, j) = m(rows[i], cols[j]);
  return s;
}

Eigensystem eig_small(const CMatrix& m, double max_cond) {
  if (m.rows() != m.cols()) throw Error(ErrorKind::Validation, "eig_small needs a square matrix");
  if (m.rows() > kMaxDim) throw Error(ErrorKind::Validation, "eig_small supports size <= 8");
  if (!all_finite(m)) throw Error(ErrorKind::Validation, "non-finite matrix entries");
  int r = static_cast<int>(m.rows());
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(Eigen::MatrixXcd(m), true);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::Defective, "eigensolver failed");
  std::vector<int> order(r);
  std::iota(order.begin(), order.end(), 0);
  auto ev = es.eigenvalues();
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (ev(a).real() != ev(b).real()) return ev(a).real() < ev(b).real();
    return ev(a).imag() < ev(b).imag();
  });
  Eigensystem out;
  out.vectors.resize(r, r);
  for (int k = 0; k < r; ++k) {
    out.values.push_back(ev(order[k]));
    Eigen::VectorXcd v = es.eigenvectors().col(order[k]);
    out.vectors.col(k) = v / v.norm();
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Eigen::MatrixXcd(out.vectors));
  auto s = svd.singularValues();
  out.condition = s(r - 1) > 0 ? s(0) / s(r - 1) : INFINITY;
  if (!(out.condition <= max_cond))
    throw Error(ErrorKind::Defective, "eigenvector condition number " + std::to_string(out.condition));
  return out;
}

CMatrix mat_exp(const CMatrix& m) {
  Eigen::MatrixXcd x(m);
  Eigen::MatrixXcd e = x.exp();
  return e;
}

CMatrix mat_log_principal(const CMatrix& m) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(Eigen::MatrixXcd(m), false);
  double scale = frob(m);
  for (int k = 0; k < es.eigenvalues().size(); ++k) {
    cd l = es.eigenvalues()(k);
    if (std::abs(l) <= 1e-14 * std::max(scale, 1e-300))
      throw Error(ErrorKind::Singular, "logarithm of a singular matrix");
    if (l.real() < 0 && std::abs(l.imag()) <= 1e-12 * std::abs(l))
      throw Error(ErrorKind::BranchCut, "eigenvalue on the negative real axis");
  }
  Eigen::MatrixXcd x(m);
  Eigen::MatrixXcd lg = x.log();
  return lg;
}

HermitianPD::HermitianPD(const CMatrix& m, double tol) {
  if (m.rows() != m.cols()) throw Error(ErrorKind::Validation, "HermitianPD needs a square matrix");
  if (hermiticity_error(m) > tol * std::max(1.0, frob(m)))
    throw Error(ErrorKind::Validation, "matrix is not Hermitian");
  m_ = hermitian_part(m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Eigen::MatrixXcd(m_), Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues()(0) > 0)) throw Error(ErrorKind::NotPositiveDefinite, "matrix has a nonpositive eigenvalue");
}

HermitianPD HermitianPD::unchecked(const CMatrix& m) {
  HermitianPD h;
  h.m_ = hermitian_part(m);
  return h;
}

std::vector<double> HermitianPD::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Eigen::MatrixXcd(m_), Eigen::EigenvaluesOnly);
  std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  return v;
}

double HermitianPD::condition() const {
  auto v = eigenvalues();
  return v.back() / v.front();
}

double unitarity_error(const CMatrix& u) {
  return frob(u.adjoint() * u - identity(static_cast<int>(u.rows())));
}

double hermiticity_error(const CMatrix& m) { return frob(m - m.adjoint()); }

CMatrix hermitian_part(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

std::vector<int> match_values(const std::vector<cd>& a, const std::vector<cd>& b) {
  int r = static_cast<int>(a.size());
  if (b.size() != a.size()) throw Error(ErrorKind::Validation, "match_values size mismatch");
  std::vector<int> p(r), best;
  std::iota(p.begin(), p.end(), 0);
  double best_cost = INFINITY;
  do {
    double c = 0;
    for (int i = 0; i < r; ++i) c += std::abs(a[i] - b[p[i]]);
    if (c < best_cost) {
      best_cost = c;
      best = p;
    }
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

CMatrix random_complex(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      double re = g(rng);
      double im = g(rng);
      m(i, j) = cd(re, im);
    }
  return m;
}

CMatrix random_unitary(int r, Rng& rng) {
  CMatrix z = random_complex(r, r, rng);
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ();
  CMatrix rr = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < r; ++j) {
    cd d = rr(j, j);
    q.col(j) *= d / std::abs(d);
  }
  return q;
}

CMatrix random_hermitian(int r, Rng& rng) { return hermitian_part(random_complex(r, r, rng)); }

CMatrix random_hpd(int r, Rng& rng, double shift) {
  CMatrix m = random_complex(r, r, rng);
  return hermitian_part(m.adjoint() * m) + shift * identity(r);
}

CMatrix random_anti_hermitian(int r, Rng& rng) {
  CMatrix m = random_complex(r, r, rng);
  return 0.5 * (m - m.adjoint());
}

}  // namespace rhwz
