#include "doctest.h"
#include "oracles.hpp"
#include "rhwz/factor.hpp"

using namespace rhwz;

namespace {

CMatrix random_lower(int r, Rng& rng, bool unipotent) {
  CMatrix m = random_complex(r, r, rng);
  for (int i = 0; i < r; ++i) {
    for (int j = i + 1; j < r; ++j) m(i, j) = 0.0;
    if (unipotent) m(i, i) = 1.0;
    else m(i, i) += 2.0 * m(i, i) / std::abs(m(i, i));
  }
  return m;
}

std::vector<int> random_perm(int r, Rng& rng) {
  std::vector<int> p(r);
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

void check_structure(const BruhatFactors& f, const CMatrix& g) {
  int r = static_cast<int>(g.rows());
  CHECK(frob(f.P * f.Pi * f.L - g) <= 1e-10 * frob(g));
  for (int i = 0; i < r; ++i) {
    CHECK(f.L(i, i) == cd(1.0));
    for (int j = i + 1; j < r; ++j) CHECK(f.L(i, j) == cd(0.0));
  }
}

}  // namespace

TEST_CASE("bruhat trivial cases") {
  auto f = bruhat_factor(identity(3));
  CHECK(frob(f.P - identity(3)) < 1e-15);
  CHECK(frob(f.Pi - identity(3)) < 1e-15);
  CHECK(frob(f.L - identity(3)) < 1e-15);
  CMatrix p0 = antidiagonal(2);
  f = bruhat_factor(p0);
  CHECK(frob(f.P - identity(2)) < 1e-15);
  CHECK(frob(f.Pi - p0) < 1e-15);
  CHECK(frob(f.L - identity(2)) < 1e-15);
  CHECK(in_large_cell(p0));
  CHECK_FALSE(in_large_cell(identity(2)));
}

TEST_CASE("bruhat random generic and constructed matrices match the exhaustive oracle") {
  Rng rng(2024);
  for (int r : {3, 4}) {
    for (int t = 0; t < 100; ++t) {
      CMatrix g;
      if (t % 2 == 0) {
        g = random_complex(r, r, rng);
      } else {
        g = random_lower(r, rng, false) * permutation_matrix(random_perm(r, rng)) * random_lower(r, rng, true);
      }
      auto f = bruhat_factor(g);
      check_structure(f, g);
      for (int i = 0; i < r; ++i)
        for (int j = i + 1; j < r; ++j) CHECK(f.P(i, j) == cd(0.0));
      auto hits = oracle::bruhat_permutations(g, 1e-9 * frob(g));
      REQUIRE(hits.size() == 1);
      CHECK(hits[0] == f.perm);
      CHECK(in_large_cell(g) == (f.Pi == antidiagonal(r)));
    }
  }
}

TEST_CASE("large cell: minor formulas agree with elimination") {
  Rng rng(7);
  for (int t = 0; t < 100; ++t) {
    CMatrix g = random_complex(4, 4, rng);
    REQUIRE(in_large_cell(g));
    auto a = bruhat_factor(g);
    auto b = large_cell_factor_minors(g);
    CHECK(frob(a.P - b.P) <= 1e-9 * frob(a.P));
    CHECK(frob(a.L - b.L) <= 1e-9 * frob(a.L));
  }
}

TEST_CASE("singular and ambiguous inputs") {
  CMatrix s = CMatrix::Zero(2, 2);
  s(0, 0) = 1.0;
  CHECK_THROWS_AS(bruhat_factor(s), Error);
  CMatrix amb = identity(2);
  amb(0, 1) = 1e-11;
  try {
    bruhat_factor(amb);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::AmbiguousCell);
  }
}

TEST_CASE("parabolic factorization and permutation ambiguity") {
  Rng rng(99);
  auto s22 = SplittingType::from_degrees({-2, -2, -1, -1});
  auto s13 = SplittingType::from_degrees({-2, -1, -1, -1});
  for (int t = 0; t < 50; ++t) {
    CMatrix g = t % 2 ? random_complex(4, 4, rng)
                      : random_lower(4, rng, false) * permutation_matrix(random_perm(4, rng)) * random_lower(4, rng, true);
    for (const auto& s : {s22, s13}) {
      auto f = bruhat_factor(g, s);
      check_structure(f, g);
      auto blocks = s.block_of();
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          if (blocks[j] > blocks[i]) CHECK(f.P(i, j) == cd(0.0));
      auto classical = bruhat_factor(g);
      CMatrix pi = f.Pi * classical.Pi.transpose();
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          if (blocks[i] != blocks[j]) CHECK(pi(i, j) == cd(0.0));
    }
  }
  auto scalar = SplittingType::from_degrees({-1, -1});
  CHECK(scalar.scalar());
  CHECK(scalar.evenly_split());
  CHECK_FALSE(SplittingType::from_degrees({-3, -1}).evenly_split());
}

TEST_CASE("cholesky minor formulas") {
  auto f = cholesky_minors(HermitianPD(identity(3)), identity(3));
  for (double a : f.a) CHECK(a == doctest::Approx(1.0));
  CHECK(frob(f.c - identity(3)) < 1e-15);
  CMatrix h(2, 2), M(2, 2);
  h << 4.0, 0.0, 0.0, 9.0;
  M << 2.0, 0.0, 0.0, 3.0;
  f = cholesky_minors(HermitianPD(h), M);
  CHECK(f.a[0] == doctest::Approx(4.0));
  CHECK(f.a[1] == doctest::Approx(9.0));

  Rng rng(42);
  for (int t = 0; t < 200; ++t) {
    CMatrix Mr = random_complex(4, 4, rng);
    CMatrix hh = hermitian_part(Mr.adjoint() * Mr);
    HermitianPD H(hh);
    auto c = cholesky_minors(H, Mr);
    CMatrix bt = oracle::textbook_cholesky(hh);
    CHECK(frob(c.b - bt) <= 1e-9 * frob(bt));
    CHECK(frob(c.c.adjoint() * diag(std::vector<cd>(c.a.begin(), c.a.end())) * c.c - hh) <= 1e-9 * frob(hh));
    CMatrix U = random_unitary(4, rng);
    auto c2 = cholesky_minors(H, U * Mr);
    CHECK(frob(c2.b - c.b) <= 1e-9 * frob(c.b));
  }
}

TEST_CASE("cholesky differential") {
  CHECK(frob(cholesky_differential(HermitianPD(identity(2)), CMatrix::Zero(2, 2))) == 0.0);
  CMatrix dh = CMatrix::Zero(2, 2);
  dh(0, 0) = 2.0;
  CMatrix db = cholesky_differential(HermitianPD(identity(2)), dh);
  CHECK(std::abs(db(0, 0) - 1.0) < 1e-15);
  CHECK(frob(db) == doctest::Approx(1.0));

  Rng rng(17);
  for (int t = 0; t < 50; ++t) {
    CMatrix h = random_hpd(3, rng);
    CMatrix v = random_hermitian(3, rng);
    CMatrix d = cholesky_differential(HermitianPD(h), v);
    double e = 1e-6;
    CMatrix fd = (oracle::textbook_cholesky(h + e * v) - oracle::textbook_cholesky(h - e * v)) / (2 * e);
    CHECK(frob(d - fd) <= 1e-5);
    CMatrix b = cholesky_upper(HermitianPD(h));
    CHECK(frob(d.adjoint() * b + b.adjoint() * d - v) <= 1e-10 * (1 + frob(v)));
  }
  std::vector<std::string> warn;
  CMatrix bad = identity(2);
  bad(1, 1) = 1e-12;
  cholesky_differential(HermitianPD(bad), identity(2), &warn);
  CHECK(warn.size() == 1);
}
