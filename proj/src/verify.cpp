#include "rhwz/verify.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "rhwz/factor.hpp"
#include "rhwz/rhsolve.hpp"
#include "rhwz/wznw.hpp"

namespace rhwz {

namespace {

int numeric_rank(const CMatrix& m, double tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  const auto& s = svd.singularValues();
  int k = 0;
  while (k < s.size() && s(k) > tol) ++k;
  return k;
}

CMatrix random_lower(int r, Rng& rng, bool unipotent) {
  CMatrix m = random_complex(r, r, rng).triangularView<Eigen::Lower>();
  for (int i = 0; i < r; ++i) m(i, i) = unipotent ? cd(1) : m(i, i) + (std::abs(m(i, i)) < 0.3 ? 1.0 : 0.0);
  return m;
}

std::vector<int> random_perm(int r, Rng& rng) {
  std::vector<int> p(r);
  for (int i = 0; i < r; ++i) p[i] = i;
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

void record(SuiteReport& rep, int k, double err) {
  rep.worst = std::max(rep.worst, err);
  if (err <= rep.tolerance)
    ++rep.passed;
  else
    rep.failures.push_back("sample " + std::to_string(k) + ": error " + std::to_string(err));
}

SuiteReport bruhat_suite(int count, Rng& rng) {
  // Errors are normalized by their bounds: reconstruction 1e-10, large-cell uniqueness 1e-9.
  SuiteReport rep{"bruhat", count, 0, 0, 1.0, {}};
  for (int k = 0; k < count; ++k) {
    int r = k % 2 ? 4 : 3;
    CMatrix g = (k / 2) % 2 ? random_complex(r, r, rng)
                            : random_lower(r, rng, false) * permutation_matrix(random_perm(r, rng)) * random_lower(r, rng, true);
    double err = 0;
    try {
      auto f = bruhat_factor(g);
      err = frob(f.P * f.Pi * f.L - g) / frob(g) / 1e-10;
      // The rank pattern of top-right corners determines the permutation.
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
          int cnt = 0;
          for (int q = 0; q <= i; ++q)
            if (f.perm[q] >= j) ++cnt;
          if (cnt != numeric_rank(g.block(0, j, i + 1, r - j), 1e-9 * frob(g))) err = INFINITY;
        }
      if (in_large_cell(g)) {
        auto m = large_cell_factor_minors(g);
        err = std::max(err, frob(m.P - f.P) / frob(f.P) / 1e-9);
        err = std::max(err, frob(m.L - f.L) / frob(f.L) / 1e-9);
      }
    } catch (const Error&) {
      err = INFINITY;
    }
    record(rep, k, err);
  }
  return rep;
}

// Row-by-row Cholesky h = b* b with b upper.
CMatrix reference_cholesky(const CMatrix& h) {
  const int r = static_cast<int>(h.rows());
  CMatrix b = CMatrix::Zero(r, r);
  for (int j = 0; j < r; ++j) {
    double s = h(j, j).real();
    for (int q = 0; q < j; ++q) s -= std::norm(b(q, j));
    b(j, j) = std::sqrt(s);
    for (int c = j + 1; c < r; ++c) {
      cd t = h(j, c);
      for (int q = 0; q < j; ++q) t -= std::conj(b(q, j)) * b(q, c);
      b(j, c) = t / b(j, j);
    }
  }
  return b;
}

SuiteReport cholesky_suite(int count, Rng& rng) {
  SuiteReport rep{"cholesky", count, 0, 0, 1e-9, {}};
  for (int k = 0; k < count; ++k) {
    CMatrix h = random_hpd(4, rng);
    CMatrix b = reference_cholesky(h);
    CMatrix U = random_unitary(4, rng), V = random_unitary(4, rng);
    HermitianPD hp(h);
    auto f = cholesky_minors(hp, U * b);
    auto g = cholesky_minors(hp, V * U * b);
    double err = frob(f.b - b) / frob(b);
    err = std::max(err, frob(g.b - f.b) / frob(b));
    record(rep, k, err);
  }
  return rep;
}

SuiteReport three_form_suite(int count, Rng& rng) {
  SuiteReport rep{"three-form", count, 0, 0, 1e-5, {}};
  for (int k = 0; k < count; ++k) {
    int r = k % 2 ? 3 : 2;
    HermitianPD h(random_hpd(r, rng));
    CMatrix X = random_hermitian(r, rng), Y = random_hermitian(r, rng), Z = random_hermitian(r, rng);
    auto p = three_form_pair(h, X, Y, Z);
    record(rep, k, std::abs(p.theta3 - p.dOmega2) / (1 + std::abs(p.theta3)));
  }
  return rep;
}

MetricField reference_field(int threads) {
  auto ws = build_weight_system({cd(0, 0), cd(1, 0)}, {{0.1, 0.5}, {0.2, 0.6}, {0.1, 0.5}}, -2);
  SolverOptions o;
  o.threads = threads;
  auto res = solve(ws, build_admissible_rep(ws, hypergeometric_conjugators(ws)), std::nullopt, o);
  if (!res.report.success || !res.normalization) throw Error(ErrorKind::NonConvergence, "reference system did not solve");
  return MetricField::from_normalization(*res.normalization);
}

SuiteReport flatness_suite(int count, Rng& rng, int threads) {
  // Error is the distance of the halving ratio from 4, against the allowed 0.5.
  SuiteReport rep{"flatness", count, 0, 0, 0.5, {}};
  auto field = reference_field(threads);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int k = 0; k < count; ++k) {
    cd z;
    do z = cd(u(rng), u(rng));
    while (field.distance_to_points(z) < 0.3);
    double ratio = flatness_residual(field, z, 0.02) / flatness_residual(field, z, 0.01);
    record(rep, k, std::abs(ratio - 4));
  }
  return rep;
}

SuiteReport counterterm_suite(int threads) {
  auto field = reference_field(threads);
  const auto& ws = field.system().weights;
  SuiteReport rep{"counterterm", ws.n() - 1, 0, 0, 1e-3, {}};
  QuadratureOptions o;
  o.threads = threads;
  for (int i = 0; i + 1 < ws.n(); ++i) {
    double expect = 0;
    for (double a : ws.weights[i]) expect += a * a;
    expect *= 2 * kPi * std::log(2.0);
    record(rep, i, std::abs(annulus_kinetic(field, i, 1e-4, o) - expect) / expect);
  }
  return rep;
}

}  // namespace

std::vector<std::string> suite_names() { return {"bruhat", "cholesky", "three-form", "flatness", "counterterm"}; }

int default_count(const std::string& suite) {
  if (suite == "three-form") return 100;
  if (suite == "flatness") return 50;
  if (suite == "counterterm") return 0;
  return 200;
}

SuiteReport run_suite(const std::string& suite, int count, std::uint64_t seed, int threads) {
  Rng rng(seed);
  if (count < 0) throw Error(ErrorKind::Validation, "sample count must be nonnegative");
  if (suite == "bruhat") return bruhat_suite(count, rng);
  if (suite == "cholesky") return cholesky_suite(count, rng);
  if (suite == "three-form") return three_form_suite(count, rng);
  if (suite == "flatness") return flatness_suite(count, rng, threads);
  if (suite == "counterterm") return counterterm_suite(threads);
  throw Error(ErrorKind::Validation, "unknown suite '" + suite + "'");
}

}  // namespace rhwz
