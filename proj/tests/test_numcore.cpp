#include "doctest.h"
#include "oracles.hpp"
#include "rhwz/numcore.hpp"

using namespace rhwz;

TEST_CASE("eig_small trivial inputs") {
  CMatrix d(2, 2);
  d << 1.0, 0.0, 0.0, 2.0;
  auto es = eig_small(d);
  CHECK(std::abs(es.values[0] - 1.0) < 1e-14);
  CHECK(std::abs(es.values[1] - 2.0) < 1e-14);
  CHECK(frob(es.vectors.cwiseAbs().cast<cd>() - identity(2)) < 1e-14);

  CMatrix s(2, 2);
  s << 0.0, 1.0, 1.0, 0.0;
  es = eig_small(s);
  CHECK(std::abs(es.values[0] + 1.0) < 1e-14);
  CHECK(std::abs(es.values[1] - 1.0) < 1e-14);
}

TEST_CASE("eig_small agrees with companion roots") {
  Rng rng(11);
  for (int t = 0; t < 100; ++t) {
    CMatrix m = random_complex(3, 3, rng);
    auto es = eig_small(m);
    auto roots = oracle::poly_roots(oracle::charpoly(m));
    auto match = match_values(es.values, roots);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(es.values[k] - roots[match[k]]) < 1e-9);
    CMatrix lam = diag(es.values);
    CHECK(frob(m * es.vectors - es.vectors * lam) <= 1e-10 * frob(m));
    CHECK(frob(es.vectors * lam * inverse(es.vectors) - m) <= 1e-9 * frob(m));
  }
}

TEST_CASE("eig_small ordering and defective input") {
  Rng rng(3);
  CMatrix m = random_complex(4, 4, rng);
  auto es = eig_small(m);
  for (int k = 1; k < 4; ++k) CHECK(es.values[k - 1].real() <= es.values[k].real());
  CMatrix j(2, 2);
  j << 1.0, 1.0, 0.0, 1.0;
  CHECK_THROWS_AS(eig_small(j), Error);
}

TEST_CASE("principal logarithm") {
  CHECK(frob(mat_log_principal(identity(3))) < 1e-14);
  CMatrix z(1, 1);
  z(0, 0) = std::exp(kI * (kPi / 2));
  CHECK(std::abs(mat_log_principal(z)(0, 0) - kI * (kPi / 2)) < 1e-14);
  CMatrix neg(1, 1);
  neg(0, 0) = -2.0;
  CHECK_THROWS_AS(mat_log_principal(neg), Error);

  Rng rng(5);
  int checked = 0;
  while (checked < 500) {
    CMatrix u = random_unitary(3, rng);
    auto es = eig_small(u);
    bool near_cut = false;
    for (cd l : es.values) near_cut |= std::abs(std::arg(l)) > kPi - 0.05;
    if (near_cut) continue;
    CMatrix lg = mat_log_principal(u);
    CHECK(frob(mat_exp(lg) - u) <= 1e-10 * frob(u));
    for (cd l : eig_small(lg).values) CHECK(std::abs(l.imag()) < kPi);
    ++checked;
  }
}

TEST_CASE("HermitianPD validation") {
  Rng rng(8);
  CHECK_NOTHROW(HermitianPD(random_hpd(4, rng)));
  CMatrix nh = random_complex(3, 3, rng);
  CHECK_THROWS_AS(HermitianPD{nh}, Error);
  CMatrix neg = -identity(2);
  CHECK_THROWS_AS(HermitianPD{neg}, Error);
}

TEST_CASE("random unitary is unitary") {
  Rng rng(9);
  for (int t = 0; t < 20; ++t) CHECK(unitarity_error(random_unitary(4, rng)) < 1e-13);
}
