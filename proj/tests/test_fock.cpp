#include "doctest.h"

#include <sstream>

#include "oracles.hpp"
#include "quon/error.hpp"
#include "quon/fock.hpp"

using namespace quon;

TEST_CASE("quon annihilator matrix") {
  const auto c2 = make_quon_c(QParam(0.3), 2);
  CHECK(c2.matrix()(0, 1) == cplx(1.0, 0.0));
  CHECK(c2.matrix()(0, 0) == cplx(0.0, 0.0));
  CHECK(c2.matrix()(1, 0) == cplx(0.0, 0.0));
  CHECK(c2.matrix()(1, 1) == cplx(0.0, 0.0));
  for (double q : {0.1, 0.5, 1.0}) {
    const auto c = make_quon_c(QParam(q), 40);
    CHECK((c.matrix() - oracle::quon_c(q, 40)).cwiseAbs().maxCoeff() < 1e-14);
  }
  CHECK_THROWS_AS(make_quon_c(QParam(0.5), 1), Error);
}

TEST_CASE("c e_n = beta_{n-1} e_{n-1} and c^dag e_n = beta_n e_{n+1}") {
  const QParam q(0.6);
  const auto c = make_quon_c(q, 20);
  const auto cd = c.adjoint();
  CHECK(c.apply(basis_vector(20, 0)).norm() == 0.0);
  for (int n = 1; n < 19; ++n) {
    CHECK((c.apply(basis_vector(20, n)) - beta(q, n - 1) * basis_vector(20, n - 1)).norm() < 1e-15);
    CHECK((cd.apply(basis_vector(20, n)) - beta(q, n) * basis_vector(20, n + 1)).norm() < 1e-15);
  }
}

TEST_CASE("q-mutator residuals") {
  const QParam q(0.3);
  const auto c = make_quon_c(q, 64);
  CHECK(qmutator_residual(c, c.adjoint(), q, 62) < 1e-12);
  // The truncation edge breaks the relation.
  const DenseMatrix edge = qmutator(c, c.adjoint(), q).matrix() - DenseMatrix::Identity(64, 64);
  CHECK(std::abs(edge(63, 63)) > 0.1);
  // The wrong pair fails.
  CHECK(qmutator_residual(c, c, q, 62) >= 1.0);
  const auto id = make_identity(8);
  CHECK(qmutator(id, id, QParam(1.0)).matrix().cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(qmutator_residual(c, c.adjoint(), q, 0), Error);
  CHECK_THROWS_AS(qmutator_residual(c, make_identity(10), q, 5), Error);
}

TEST_CASE("q-mutator residual over many q") {
  for (double q : {-0.9, 0.0, 0.25, 0.75, 0.999, 1.0, 1.3}) {
    const QParam p(q);
    const auto c = make_quon_c(p, 50);
    CHECK(qmutator_residual(c, c.adjoint(), p, 49) < 1e-12 * std::max(1.0, beta_sq(p, 49)));
  }
}

TEST_CASE("inner product is conjugate-linear in the first slot") {
  FockVector x(2), y(2);
  x << cplx(0, 1), 1.0;
  y << 1.0, 1.0;
  CHECK(std::abs(inner(x, y) - cplx(1.0, -1.0)) < 1e-15);
}

TEST_CASE("matrix CSV dump") {
  DenseMatrix m(2, 2);
  m << cplx(1, 2), cplx(3, 4), cplx(5, 6), cplx(7, -8);
  std::ostringstream os;
  TruncatedOperator(m, "m").write_csv(os);
  CHECK(os.str() == "1,2;3,4\n5,6;7,-8\n");
}

TEST_CASE("operator products and column residuals") {
  const QParam q(0.5);
  const auto c = make_quon_c(q, 10);
  const auto n = c.adjoint() * c;
  for (int k = 0; k < 10; ++k)
    CHECK(n.matrix()(k, k).real() == doctest::Approx(beta_sq(q, k - 1)).epsilon(1e-15));
  CHECK(column_residual(n.matrix(), n.matrix(), 10) == 0.0);
  CHECK(column_residual(n.matrix(), DenseMatrix::Zero(10, 10), 3) ==
        doctest::Approx(beta_sq(q, 1)).epsilon(1e-15));
}
