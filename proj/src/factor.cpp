#include "rhwz/factor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rhwz {

namespace {

constexpr double kZeroTol = 1e-12;    // definitely zero below this (relative)
constexpr double kNonzeroTol = 1e-10; // definitely nonzero above this (relative)

void combinations(int n, int k, std::vector<std::vector<int>>& out) {
  std::vector<int> c(k);
  std::iota(c.begin(), c.end(), 0);
  if (k > n) return;
  while (true) {
    out.push_back(c);
    int i = k - 1;
    while (i >= 0 && c[i] == n - k + i) --i;
    if (i < 0) break;
    ++c[i];
    for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
  }
}

std::vector<int> range(int a, int b) {
  std::vector<int> v;
  for (int i = a; i < b; ++i) v.push_back(i);
  return v;
}

}  // namespace

SplittingType SplittingType::from_degrees(const std::vector<int>& degrees) {
  SplittingType s;
  s.m = degrees;
  std::sort(s.m.begin(), s.m.end());
  for (size_t i = 0; i < s.m.size(); ++i) {
    if (i == 0 || s.m[i] != s.m[i - 1])
      s.partition.push_back(1);
    else
      ++s.partition.back();
  }
  return s;
}

std::vector<int> SplittingType::block_of() const {
  std::vector<int> b;
  for (size_t k = 0; k < partition.size(); ++k)
    for (int j = 0; j < partition[k]; ++j) b.push_back(static_cast<int>(k));
  return b;
}

CMatrix permutation_matrix(const std::vector<int>& perm) {
  int r = static_cast<int>(perm.size());
  CMatrix p = CMatrix::Zero(r, r);
  for (int i = 0; i < r; ++i) p(i, perm[i]) = 1.0;
  return p;
}

CMatrix antidiagonal(int r) {
  std::vector<int> p(r);
  for (int i = 0; i < r; ++i) p[i] = r - 1 - i;
  return permutation_matrix(p);
}

BruhatFactors bruhat_factor(const CMatrix& g, const std::optional<SplittingType>& splitting) {
  if (g.rows() != g.cols() || g.rows() == 0) throw Error(ErrorKind::Validation, "bruhat_factor needs a square matrix");
  if (!all_finite(g)) throw Error(ErrorKind::Validation, "non-finite matrix entries");
  const int r = static_cast<int>(g.rows());
  const double scale = frob(g);
  if (!(std::abs(det(g / scale)) > 1e-12)) throw Error(ErrorKind::Singular, "matrix is singular");
  if (splitting && splitting->rank() != r) throw Error(ErrorKind::Validation, "splitting type rank mismatch");

  // X = Erow g Ecol with Erow, Ecol lower unipotent; reduce X to D Pi.
  CMatrix X = g;
  CMatrix Erow = identity(r), Ecol = identity(r);
  std::vector<int> pivot(r, -1);
  std::vector<bool> used(r, false);
  for (int i = 0; i < r; ++i) {
    int p = -1;
    for (int c = r - 1; c >= 0; --c) {
      if (used[c]) continue;
      double v = std::abs(X(i, c)) / scale;
      if (v > kNonzeroTol) {
        p = c;
        break;
      }
      if (v > kZeroTol) throw Error(ErrorKind::AmbiguousCell, "pivot magnitude within the ambiguity band");
      X(i, c) = 0.0;
    }
    if (p < 0) throw Error(ErrorKind::Singular, "no pivot in row " + std::to_string(i));
    pivot[i] = p;
    used[p] = true;
    cd piv = X(i, p);
    for (int j = 0; j < p; ++j) {
      if (used[j] || X(i, j) == 0.0) continue;
      cd f = -X(i, j) / piv;
      X.col(j) += f * X.col(p);
      Ecol.col(j) += f * Ecol.col(p);
      X(i, j) = 0.0;
    }
    for (int k = i + 1; k < r; ++k) {
      if (X(k, p) == 0.0) continue;
      cd f = -X(k, p) / piv;
      X.row(k) += f * X.row(i);
      Erow.row(k) += f * Erow.row(i);
      X(k, p) = 0.0;
    }
  }
  CMatrix D = CMatrix::Zero(r, r);
  for (int i = 0; i < r; ++i) D(i, i) = X(i, pivot[i]);
  CMatrix Binv = Erow.triangularView<Eigen::UnitLower>().solve(identity(r));
  CMatrix Linv = Ecol.triangularView<Eigen::UnitLower>().solve(identity(r));

  BruhatFactors f;
  f.perm = pivot;
  f.P = Binv * D;
  f.L = Linv;
  // Exact triangular structure.
  for (int i = 0; i < r; ++i)
    for (int j = i + 1; j < r; ++j) {
      f.P(i, j) = 0.0;
      f.L(i, j) = 0.0;
    }
  for (int i = 0; i < r; ++i) f.L(i, i) = 1.0;

  if (splitting && !splitting->scalar()) {
    // Inside each row block order the pivot columns decreasingly; P absorbs the block permutation.
    std::vector<int> blocks = splitting->block_of();
    std::vector<int> perm = pivot;
    int start = 0;
    for (int len : splitting->partition) {
      std::sort(perm.begin() + start, perm.begin() + start + len, std::greater<int>());
      start += len;
    }
    // g = B Pi L = (B pi^{-1}) (pi Pi) L with pi Pi having rows permuted within blocks.
    CMatrix Pi_new = permutation_matrix(perm);
    CMatrix pi = Pi_new * permutation_matrix(pivot).transpose();
    f.P = f.P * pi.transpose();
    f.perm = perm;
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j)
        if (blocks[j] > blocks[i]) f.P(i, j) = 0.0;
  } else if (splitting && splitting->scalar()) {
    // P_N is all of GL(r): the trivial permutation suffices.
    f.P = g;
    f.perm = range(0, r);
    f.L = identity(r);
  }
  f.Pi = permutation_matrix(f.perm);
  return f;
}

bool in_large_cell(const CMatrix& g) {
  const int r = static_cast<int>(g.rows());
  const double scale = frob(g);
  if (scale == 0.0) return false;
  for (int k = 1; k <= r; ++k) {
    cd m = det(select(g, range(0, k), range(r - k, r)));
    if (!(std::abs(m) > kNonzeroTol * std::pow(scale, k))) return false;
  }
  return true;
}

BruhatFactors large_cell_factor_minors(const CMatrix& g) {
  if (!in_large_cell(g)) throw Error(ErrorKind::AmbiguousCell, "matrix is not in the large cell");
  const int r = static_cast<int>(g.rows());
  CMatrix P0 = antidiagonal(r);
  CMatrix M = g * P0;  // = B U with U upper unipotent
  CMatrix B = CMatrix::Zero(r, r), U = identity(r);
  std::vector<cd> lead(r + 1, 1.0);
  for (int k = 1; k <= r; ++k) lead[k] = det(select(M, range(0, k), range(0, k)));
  for (int k = 0; k < r; ++k) {
    std::vector<int> rows = range(0, k + 1), cols = range(0, k);
    for (int j = k + 1; j < r; ++j) {
      auto c = cols;
      c.push_back(j);
      U(k, j) = det(select(M, rows, c)) / lead[k + 1];
    }
    for (int i = k; i < r; ++i) {
      auto rr = range(0, k);
      rr.push_back(i);
      B(i, k) = det(select(M, rr, range(0, k + 1))) / lead[k];
    }
  }
  BruhatFactors f;
  f.P = B;
  f.Pi = P0;
  f.L = P0 * U * P0;
  for (int i = 0; i < r; ++i) f.perm.push_back(r - 1 - i);
  return f;
}

CholeskyFactors cholesky_minors(const HermitianPD& h, const CMatrix& M) {
  const int r = h.size();
  if (M.rows() != r || M.cols() != r) throw Error(ErrorKind::Validation, "M must be r x r");
  const double scale = frob(h.matrix());
  if (frob(M.adjoint() * M - h.matrix()) > 1e-8 * scale) throw Error(ErrorKind::Validation, "M*M does not equal h");
  // Q(j, k) for 1 <= j <= k <= r, Q(0,0) = 1.
  CMatrix Q = CMatrix::Zero(r + 1, r + 1);
  Q(0, 0) = 1.0;
  for (int j = 1; j <= r; ++j) {
    std::vector<std::vector<int>> subsets;
    combinations(r, j, subsets);
    std::vector<int> base = range(0, j);
    std::vector<int> head = range(0, j - 1);
    for (int k = j; k <= r; ++k) {
      auto cols = head;
      cols.push_back(k - 1);
      cd sum = 0.0;
      for (const auto& l : subsets) sum += std::conj(det(select(M, l, base))) * det(select(M, l, cols));
      Q(j, k) = sum;
    }
  }
  CholeskyFactors f;
  f.c = identity(r);
  f.b = CMatrix::Zero(r, r);
  for (int j = 1; j <= r; ++j) {
    double qjj = Q(j, j).real();
    if (!(qjj > 1e-14 * std::pow(scale, j))) throw Error(ErrorKind::NotPositiveDefinite, "leading minor sum is not positive");
    f.a.push_back(qjj / Q(j - 1, j - 1).real());
    for (int k = j + 1; k <= r; ++k) f.c(j - 1, k - 1) = Q(j, k) / qjj;
  }
  for (int j = 0; j < r; ++j) f.b.row(j) = std::sqrt(f.a[j]) * f.c.row(j);
  return f;
}

CMatrix cholesky_upper(const HermitianPD& h) {
  Eigen::LLT<Eigen::MatrixXcd> llt{Eigen::MatrixXcd(h.matrix())};
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::NotPositiveDefinite, "Cholesky failed");
  Eigen::MatrixXcd L = llt.matrixL();
  return L.adjoint();
}

CMatrix cholesky_differential(const CMatrix& b, const CMatrix& dh) {
  const int r = static_cast<int>(b.rows());
  // Phi = b^{-*} dh b^{-1}; db = X b with X upper, Re diag(X) = diag(Phi)/2.
  auto bu = b.triangularView<Eigen::Upper>();
  CMatrix t = bu.adjoint().solve(dh);                                   // b^{-*} dh
  CMatrix phi = bu.adjoint().solve(t.adjoint()).adjoint();              // (b^{-*} (b^{-*} dh)^*)^* = b^{-*} dh b^{-1}
  CMatrix X = CMatrix::Zero(r, r);
  for (int i = 0; i < r; ++i) {
    X(i, i) = 0.5 * phi(i, i).real();
    for (int j = i + 1; j < r; ++j) X(i, j) = phi(i, j);
  }
  CMatrix db = X * b;
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < i; ++j) db(i, j) = 0.0;
  return db;
}

CMatrix cholesky_differential(const HermitianPD& h, const CMatrix& dh, std::vector<std::string>* warnings) {
  if (dh.rows() != h.size() || dh.cols() != h.size()) throw Error(ErrorKind::Validation, "dh has the wrong shape");
  if (warnings && h.condition() > 1e10) warnings->push_back("conditioning: h has condition number above 1e10");
  return cholesky_differential(cholesky_upper(h), dh);
}

}  // namespace rhwz
