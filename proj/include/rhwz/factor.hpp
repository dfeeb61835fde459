#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rhwz/numcore.hpp"

namespace rhwz {

// Conventions: B(r) lower triangular, N(r) lower unipotent, Pi0 antidiagonal,
// Cholesky factors upper triangular.

struct SplittingType {
  std::vector<int> m;          // nondecreasing degrees m_1 <= ... <= m_r
  std::vector<int> partition;  // multiplicities of the distinct degrees, in order

  static SplittingType from_degrees(const std::vector<int>& degrees);
  int rank() const { return static_cast<int>(m.size()); }
  bool evenly_split() const { return m.empty() || m.back() - m.front() <= 1; }
  bool scalar() const { return partition.size() <= 1; }
  // Block index of each row/column.
  std::vector<int> block_of() const;
};

struct BruhatFactors {
  CMatrix P;
  CMatrix Pi;
  CMatrix L;
  std::vector<int> perm;  // Pi(i, perm[i]) = 1
};

CMatrix permutation_matrix(const std::vector<int>& perm);
CMatrix antidiagonal(int r);

BruhatFactors bruhat_factor(const CMatrix& g, const std::optional<SplittingType>& splitting = std::nullopt);

// g in B Pi0 N: every top-right k x k corner minor is nonzero.
bool in_large_cell(const CMatrix& g);

// Large-cell factorization from LU minor formulas applied to g Pi0^{-1}.
BruhatFactors large_cell_factor_minors(const CMatrix& g);

struct CholeskyFactors {
  CMatrix b;              // upper triangular, positive diagonal
  std::vector<double> a;  // positive diagonal
  CMatrix c;              // upper unipotent
};

CholeskyFactors cholesky_minors(const HermitianPD& h, const CMatrix& M);

// b with h = b* b computed by the standard algorithm.
CMatrix cholesky_upper(const HermitianPD& h);

// Upper triangular db with real diagonal solving db* b + b* db = dh.
CMatrix cholesky_differential(const HermitianPD& h, const CMatrix& dh, std::vector<std::string>* warnings = nullptr);
CMatrix cholesky_differential(const CMatrix& b, const CMatrix& dh);

}  // namespace rhwz
