#pragma once

// Independent reference computations used only by the tests.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numeric>
#include <vector>

#include "rhwz/numcore.hpp"

namespace oracle {

using rhwz::cd;
using rhwz::CMatrix;

// Characteristic polynomial coefficients (monic, highest first) by Faddeev-LeVerrier.
inline std::vector<cd> charpoly(const CMatrix& A) {
  int n = static_cast<int>(A.rows());
  std::vector<cd> c(n + 1);
  c[0] = 1.0;
  CMatrix M = CMatrix::Zero(n, n);
  CMatrix I = CMatrix::Identity(n, n);
  for (int k = 1; k <= n; ++k) {
    M = A * M + c[k - 1] * I;
    c[k] = -(A * M).trace() / static_cast<double>(k);
  }
  return c;
}

// Durand-Kerner roots of a monic polynomial.
inline std::vector<cd> poly_roots(const std::vector<cd>& c) {
  int n = static_cast<int>(c.size()) - 1;
  std::vector<cd> z(n);
  double bound = 1.0;
  for (int k = 1; k <= n; ++k) bound = std::max(bound, 1.0 + std::abs(c[k]));
  for (int k = 0; k < n; ++k) z[k] = bound * std::pow(cd(0.4, 0.9), k);
  auto p = [&](cd x) {
    cd s = 0;
    for (cd a : c) s = s * x + a;
    return s;
  };
  for (int it = 0; it < 5000; ++it) {
    double change = 0;
    for (int k = 0; k < n; ++k) {
      cd d = 1.0;
      for (int j = 0; j < n; ++j)
        if (j != k) d *= z[k] - z[j];
      cd step = p(z[k]) / d;
      z[k] -= step;
      change = std::max(change, std::abs(step));
    }
    if (change < 1e-15 * bound) break;
  }
  // Newton polish
  for (auto& x : z)
    for (int it = 0; it < 5; ++it) {
      cd v = 0, dv = 0;
      for (cd a : c) {
        dv = dv * x + v;
        v = v * x + a;
      }
      if (std::abs(dv) > 0) x -= v / dv;
    }
  return z;
}

// Rank by Gaussian elimination with full pivoting.
inline int rank(CMatrix m, double tol) {
  int rows = static_cast<int>(m.rows()), cols = static_cast<int>(m.cols());
  int rk = 0;
  for (int step = 0; step < std::min(rows, cols); ++step) {
    int bi = -1, bj = -1;
    double best = tol;
    for (int i = step; i < rows; ++i)
      for (int j = step; j < cols; ++j)
        if (std::abs(m(i, j)) > best) {
          best = std::abs(m(i, j));
          bi = i;
          bj = j;
        }
    if (bi < 0) break;
    m.row(step).swap(m.row(bi));
    m.col(step).swap(m.col(bj));
    for (int i = step + 1; i < rows; ++i) m.row(i) -= (m(i, step) / m(step, step)) * m.row(step);
    ++rk;
  }
  return rk;
}

// All permutations whose top-right rank pattern equals that of g.
// Left multiplication by lower B keeps the span of the leading rows, right multiplication
// by lower L keeps the span of the trailing columns, so these ranks are double-coset invariants.
inline std::vector<std::vector<int>> bruhat_permutations(const CMatrix& g, double tol) {
  int r = static_cast<int>(g.rows());
  std::vector<std::vector<int>> pattern(r, std::vector<int>(r));
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) pattern[i][j] = rank(g.block(0, j, i + 1, r - j), tol);
  std::vector<int> p(r);
  std::iota(p.begin(), p.end(), 0);
  std::vector<std::vector<int>> hits;
  do {
    bool ok = true;
    for (int i = 0; i < r && ok; ++i)
      for (int j = 0; j < r && ok; ++j) {
        int cnt = 0;
        for (int k = 0; k <= i; ++k)
          if (p[k] >= j) ++cnt;
        ok = cnt == pattern[i][j];
      }
    if (ok) hits.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return hits;
}

// Row-by-row Cholesky h = b^* b, b upper.
inline CMatrix textbook_cholesky(const CMatrix& h) {
  int r = static_cast<int>(h.rows());
  CMatrix b = CMatrix::Zero(r, r);
  for (int j = 0; j < r; ++j) {
    cd s = h(j, j);
    for (int k = 0; k < j; ++k) s -= std::norm(b(k, j));
    b(j, j) = std::sqrt(s.real());
    for (int k = j + 1; k < r; ++k) {
      cd t = h(j, k);
      for (int l = 0; l < j; ++l) t -= std::conj(b(l, j)) * b(l, k);
      b(j, k) = t / b(j, j);
    }
  }
  return b;
}

inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
  double flo = f(lo);
  for (int k = 0; k < iters; ++k) {
    double mid = 0.5 * (lo + hi);
    double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// min over diagonal unitary gauge of sum ||g a g^-1 - b||^2 by a dense grid plus local polish.
inline double torus_distance(const std::vector<CMatrix>& a, const std::vector<CMatrix>& b) {
  int r = static_cast<int>(a[0].rows());
  auto f = [&](const std::vector<double>& phi) {
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i)
      for (int j = 0; j < r; ++j)
        for (int k = 0; k < r; ++k)
          s += std::norm(std::exp(cd(0, phi[j] - phi[k])) * a[i](j, k) - b[i](j, k));
    return s;
  };
  int dims = r - 1;
  int grid = dims == 1 ? 720 : (dims == 2 ? 90 : 24);
  std::vector<double> best(r, 0.0);
  double fbest = f(best);
  std::vector<int> idx(dims, 0);
  while (true) {
    std::vector<double> phi(r, 0.0);
    for (int d = 0; d < dims; ++d) phi[d + 1] = 2 * M_PI * idx[d] / grid;
    double v = f(phi);
    if (v < fbest) {
      fbest = v;
      best = phi;
    }
    int d = 0;
    while (d < dims && ++idx[d] == grid) idx[d++] = 0;
    if (d == dims) break;
  }
  // Compass-search polish
  double step = 2 * M_PI / grid;
  while (step > 1e-13) {
    bool moved = false;
    for (int d = 1; d < r; ++d)
      for (double sgn : {1.0, -1.0}) {
        auto t = best;
        t[d] += sgn * step;
        double v = f(t);
        if (v < fbest) {
          fbest = v;
          best = t;
          moved = true;
        }
      }
    if (!moved) step *= 0.5;
  }
  return std::sqrt(std::max(0.0, fbest));
}

// Closed-form regularized action for rank one: h = prod |z - z_i|^{2 alpha_i}.
inline double abelian_action(const std::vector<cd>& pts, const std::vector<double>& alpha) {
  double s = 0;
  for (size_t i = 0; i < pts.size(); ++i)
    for (size_t j = i + 1; j < pts.size(); ++j)
      s -= 4 * rhwz::kPi * alpha[i] * alpha[j] * std::log(std::abs(pts[i] - pts[j]));
  return s;
}

}  // namespace oracle
