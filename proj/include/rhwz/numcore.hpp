#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "rhwz/error.hpp"

namespace rhwz {

using cd = std::complex<double>;
constexpr double kPi = 3.14159265358979323846;
constexpr cd kI{0.0, 1.0};

// Dynamic size, storage capped at 8x8 so small matrices never touch the heap.
using CMatrix = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, 0, 8, 8>;
using CVector = Eigen::Matrix<cd, Eigen::Dynamic, 1, 0, 8, 1>;
using Rng = std::mt19937_64;

constexpr int kMaxDim = 8;

double frob(const CMatrix& m);
bool all_finite(const CMatrix& m);
CMatrix identity(int r);
CMatrix diag(const std::vector<cd>& d);
CMatrix adjoint(const CMatrix& m);
CMatrix inverse(const CMatrix& m);
cd det(const CMatrix& m);

// Sub-block with the given row and column index lists.
CMatrix select(const CMatrix& m, const std::vector<int>& rows, const std::vector<int>& cols);

struct Eigensystem {
  std::vector<cd> values;  // sorted by (re, im)
  CMatrix vectors;         // unit columns, m V = V diag(values)
  double condition = 1.0;  // of V
};

// Throws Defective when the eigenvector basis has condition above max_cond.
Eigensystem eig_small(const CMatrix& m, double max_cond = 1e10);

CMatrix mat_exp(const CMatrix& m);
CMatrix mat_log_principal(const CMatrix& m);

// Hermitian positive definite matrix, validated on construction.
class HermitianPD {
 public:
  explicit HermitianPD(const CMatrix& m, double tol = 1e-12);
  static HermitianPD unchecked(const CMatrix& m);
  const CMatrix& matrix() const { return m_; }
  int size() const { return static_cast<int>(m_.rows()); }
  std::vector<double> eigenvalues() const;
  double condition() const;

 private:
  HermitianPD() = default;
  CMatrix m_;
};

double unitarity_error(const CMatrix& u);
double hermiticity_error(const CMatrix& m);
CMatrix hermitian_part(const CMatrix& m);

// Solve the assignment of a to b minimizing total |a_i - b_p(i)|, brute force (size <= 8).
std::vector<int> match_values(const std::vector<cd>& a, const std::vector<cd>& b);

CMatrix random_complex(int rows, int cols, Rng& rng);
CMatrix random_unitary(int r, Rng& rng);
CMatrix random_hermitian(int r, Rng& rng);
CMatrix random_hpd(int r, Rng& rng, double shift = 0.5);
CMatrix random_anti_hermitian(int r, Rng& rng);

}  // namespace rhwz
