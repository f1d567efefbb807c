#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "quon/acceptance.hpp"
#include "quon/bicoherent.hpp"
#include "quon/error.hpp"

using namespace quon;

namespace {

BiorthogonalFamily identity_family(double q, int K) {
  return build_family(SimilarityOperator::identity(), QParam(q), K);
}

}  // namespace

TEST_CASE("normalization constant") {
  for (double q : {0.2, 0.7, 1.0}) CHECK(normalization(QParam(q), 0.0, 10).value == 1.0);
  for (double r : {0.1, 0.8, 2.5})
    CHECK(normalization_adaptive(QParam(1.0), r).value ==
          doctest::Approx(std::exp(-r * r / 2)).epsilon(1e-12));
  const auto n = normalization(QParam(0.5), 0.6, 200);
  CHECK(std::abs(n.value - oracle::normalization(0.5, 0.6, 500)) < 1e-12);
  CHECK(n.tail_bound < 1e-12);
  for (double q : {0.3, 0.9})
    for (double f : {0.2, 0.6, 0.95}) {
      const double r = f / std::sqrt(1 - q);
      CHECK(std::abs(normalization_adaptive(QParam(q), r).value - oracle::normalization(q, r, 20000)) <
            1e-11);
    }
}

TEST_CASE("normalization domain and convergence errors") {
  CHECK_THROWS_AS(normalization(QParam(0.5), std::sqrt(2.0), 10), Error);
  CHECK_THROWS_AS(normalization(QParam(1.5), 0.1, 10), Error);
  CHECK_THROWS_AS(normalization(QParam(-0.5), 0.1, 10), Error);
  try {
    normalization(QParam(0.5), 1.3, 5);
    FAIL("short series accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Convergence);
  }
}

TEST_CASE("bi-coherent states at z = 0 are the vacua") {
  const auto fam = worked_family(0.5, 64);
  const auto st = bicoherent_states(fam, 0.0);
  CHECK((st.phi_z.head(64) - fam.phi()[0]).norm() < 1e-15);
  CHECK((st.psi_z.head(64) - fam.psi()[0]).norm() < 1e-15);
  const auto [ea, eb] = eigen_check(st, fam);
  CHECK(ea < 1e-15);
  CHECK(eb < 1e-15);
  const auto id = build_family(SimilarityOperator::identity(), QParam(0.5), 16);
  const auto [ia, ib] = eigen_check(bicoherent_states(id, 0.0), id);
  CHECK(ia == 0.0);
  CHECK(ib == 0.0);
}

TEST_CASE("identity similarity gives the quon coherent state") {
  const auto fam = identity_family(0.5, 64);
  const cplx z = 0.5;
  const auto st = bicoherent_states(fam, z);
  const auto e = oracle::coherent(0.5, z, st.dim);
  CHECK((st.phi_z - e).norm() < 1e-14);
  CHECK((st.psi_z - e).norm() < 1e-14);
  CHECK((quon_coherent_state(QParam(0.5), z, st.terms, st.dim, st.norm_const) - e).norm() < 1e-14);
}

TEST_CASE("eigenvalue property") {
  const auto id = identity_family(0.5, 200);
  const auto s1 = bicoherent_states(id, cplx(0.4, 0.0));
  const auto [a1, b1] = eigen_check(s1, id);
  CHECK(a1 < 1e-10);
  CHECK(b1 < 1e-10);

  const auto fam = worked_family(0.5, 64);
  const auto s2 = bicoherent_states(fam, cplx(0.3, 0.0));
  const auto [a2, b2] = eigen_check(s2, fam);
  CHECK(a2 < 1e-9);
  CHECK(b2 < 1e-9);
  CHECK(std::abs(pairing(s2) - 1.0) < 1e-12);

  // Independent check with oracle matrices a = S c S^{-1}, b = S c^dag S^{-1}.
  const int d = s2.dim;
  const auto& dfm = fam.source().deformation();
  const DenseMatrix S = oracle::rank_one(dfm.u.head(6), dfm.v.head(6), cplx(0, 1));
  DenseMatrix Sd = DenseMatrix::Identity(d, d);
  Sd.topLeftCorner(6, 6) = S;
  const DenseMatrix c = oracle::quon_c(0.5, d);
  const DenseMatrix a = Sd * c * Sd.inverse();
  const DenseMatrix b = Sd * c.adjoint() * Sd.inverse();
  const FockVector ra = a * s2.phi_z - s2.z * s2.phi_z;
  const FockVector rb = b.adjoint() * s2.psi_z - s2.z * s2.psi_z;
  CHECK(ra.head(d - 2).norm() < 1e-9);
  CHECK(rb.head(d - 2).norm() < 1e-9);
}

TEST_CASE("eigenvalue property over the disc") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> uf(0.0, 0.9), ut(0.0, 6.283185307179586), uq(0.1, 0.9);
  for (int i = 0; i < 20; ++i) {
    const double q = uq(rng);
    const auto fam = worked_family(q, 64);
    const cplx z = std::polar(uf(rng) / std::sqrt(1 - q), ut(rng));
    const auto st = bicoherent_states(fam, z);
    const auto [ea, eb] = eigen_check(st, fam);
    CAPTURE(q);
    CAPTURE(z);
    CHECK(ea < 1e-9);
    CHECK(eb < 1e-9);
    CHECK(std::abs(pairing(st) - 1.0) < 1e-9);
  }
  const auto fam = worked_family(0.5, 64);
  CHECK_THROWS_AS(bicoherent_states(fam, std::sqrt(2.0)), Error);
}

TEST_CASE("closed-form subset states") {
  const auto fam = worked_family(0.5, 64);
  for (const cplx z : {cplx(0.2, 0.1), cplx(-0.7, 0.4), cplx(0.0, 1.2)}) {
    const auto st = bicoherent_states(fam, z);
    const auto [phi, psi] =
        closed_form_riesz_states(worked_configuration(), cplx(0, 1), fam.q(), z, st.terms, st.dim);
    CHECK((phi - st.phi_z).norm() < 1e-10);
    CHECK((psi - st.psi_z).norm() < 1e-10);
  }
}

TEST_CASE("uncertainty product") {
  for (double q : {0.3, 0.5, 0.9}) {
    const auto fam = identity_family(q, 64);
    CHECK(std::abs(uncertainty_product(fam, 0.0).product - 0.5) < 1e-14);
  }
  const auto u = uncertainty_product(identity_family(0.5, 64), 0.6);
  CHECK(u.predicted == doctest::Approx(0.41).epsilon(1e-15));
  CHECK(std::abs(u.product - 0.41) < 1e-8);
  for (const cplx z : {cplx(0.5, 0.5), cplx(2.0, -1.0)}) {
    const auto b = uncertainty_product(identity_family(1.0, 64), z);
    CHECK(std::abs(b.product - 0.5) < 1e-9);
  }
  const auto r = uncertainty_product(worked_family(0.7, 64), std::polar(1.1, 2.0));
  CHECK(std::abs(r.product - r.predicted) < 1e-7);
}

TEST_CASE("radii") {
  const auto fam = worked_family(0.5, 64);
  CHECK(fock_family_radius(fam) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  std::vector<double> ones(40, 1.0);
  const auto rep = radius_report(ones, ones, QParam(0.5), FitPolicy::bounded(2.0, 3.0));
  CHECK(rep.rho == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(rep.phi.growth == GrowthKind::Constant);
  CHECK(rep.phi.A == 2.0);
  CHECK(rep.psi.A == 3.0);
  CHECK(std::abs(rep.empirical_rho - std::sqrt(2.0)) / std::sqrt(2.0) < 1e-4);

  const auto pos = radius_report(ones, ones, QParam(0.5), FitPolicy::position(0.3));
  CHECK(pos.rho == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(pos.phi.growth == GrowthKind::QFactorial);
  CHECK(to_string(GrowthKind::Geometric) == "geometric");

  // Norms growing like r^n shrink the radius by 1/r.
  std::vector<double> geo;
  for (int n = 0; n < 40; ++n) geo.push_back(std::pow(1.5, n));
  CHECK(empirical_radius(geo, QParam(0.5)) == doctest::Approx(std::sqrt(2.0) / 1.5).epsilon(1e-3));
  CHECK_THROWS_AS(empirical_radius(std::vector<double>(5, 1.0), QParam(0.5)), Error);
  CHECK_THROWS_AS(radius_report(ones, std::vector<double>(40, 0.0), QParam(0.5), FitPolicy::generic()),
                  Error);
}

TEST_CASE("coherent coefficients in the boson limit") {
  const cplx z(0.3, 0.9);
  const auto c = coherent_coefficients(QParam(1.0), z, 15);
  for (int k = 0; k < 15; ++k)
    CHECK(std::abs(c[k] - std::pow(z, k) / std::sqrt(std::tgamma(k + 1.0))) < 1e-13 * std::abs(c[k]) + 1e-300);
}
