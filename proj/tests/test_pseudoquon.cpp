#include "doctest.h"

#include <nlohmann/json.hpp>
#include <random>

#include "oracles.hpp"
#include "quon/acceptance.hpp"
#include "quon/error.hpp"
#include "quon/pseudoquon.hpp"

using namespace quon;

namespace {

constexpr cplx kI{0.0, 1.0};

BiorthogonalFamily identity_family(double q, int K) {
  return build_family(SimilarityOperator::identity(), QParam(q), K);
}

}  // namespace

TEST_CASE("rank-one inverse coefficients") {
  const auto cfg = worked_configuration();
  const auto d = RankOneDeformation::from_alpha(cfg.u(16), cfg.v(16), kI);
  CHECK(std::abs(d.beta_def - cplx(-0.5, -0.5)) < 1e-16);
  CHECK(d.support_max() == 5);
  const auto s = SimilarityOperator::rank_one(d);
  CHECK(s.extent() == 6);
  CHECK((s.forward(16) * s.inverse(16) - DenseMatrix::Identity(16, 16)).norm() < 1e-15);
  CHECK((s.forward(16) - oracle::rank_one(cfg.u(16), cfg.v(16), kI)).norm() < 1e-15);
  CHECK(s.norm_bound() >= s.forward(16).operatorNorm() - 1e-12);
  CHECK(s.inverse_norm_bound() >= s.inverse(16).operatorNorm() - 1e-12);
}

TEST_CASE("invalid deformations are rejected") {
  const auto cfg = worked_configuration();
  try {
    RankOneDeformation::from_alpha(cfg.u(8), cfg.v(8), -1.0);
    FAIL("alpha = -1 accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Singular);
  }
  CHECK_THROWS_AS(RankOneDeformation::from_alpha(cfg.u(8), 2.0 * cfg.v(8), kI), Error);
  SubsetConfiguration overlap{{{0, 1.0}}, {{0, 0.5}}, {{1, 0.5}}};
  CHECK_THROWS_AS(overlap.validate(), Error);
  SubsetConfiguration not_unit{{{0, 2.0}}, {{1, 0.5}}, {{2, 0.5}}};
  CHECK_THROWS_AS(not_unit.validate(), Error);
  CHECK_NOTHROW(worked_configuration().validate());
  CHECK_THROWS_AS(SimilarityOperator::dense(DenseMatrix::Zero(3, 3)), Error);
  const auto s = SimilarityOperator::rank_one(RankOneDeformation::from_alpha(cfg.u(8), cfg.v(8), kI));
  CHECK_THROWS_AS(build_family(s, QParam(0.5), 8), Error);
}

TEST_CASE("identity similarity reproduces the quon operators") {
  const auto fam = identity_family(0.5, 32);
  CHECK(fam.k_safe() == 30);
  const auto c = oracle::quon_c(0.5, 32);
  CHECK((fam.pair().a.matrix() - c).norm() < 1e-15);
  CHECK((fam.pair().b.matrix() - c.adjoint()).norm() < 1e-15);
  for (int n = 0; n < 32; ++n) {
    CHECK((fam.phi()[n] - basis_vector(32, n)).norm() < 1e-15);
    CHECK((fam.psi()[n] - basis_vector(32, n)).norm() < 1e-15);
  }
  CHECK(check_ladder(fam).max() < 1e-13);
  CHECK(biorthogonality_defect(fam) < 1e-13);
}

TEST_CASE("subset configuration family vectors") {
  const auto cfg = worked_configuration();
  const int K = 40;
  const auto fam = worked_family(0.5, K);
  const FockVector u = cfg.u(K), v = cfg.v(K);
  for (int k = 0; k < K; ++k) {
    FockVector expected = basis_vector(K, k);
    if (u(k) != 0.0) expected += kI * std::conj(u(k)) * v;
    CHECK((fam.phi()[k] - expected).norm() < 1e-15);
  }
  // Indices outside I_0 u I_1 are untouched.
  CHECK((fam.phi()[3] - basis_vector(K, 3)).norm() == 0.0);
  CHECK((fam.phi()[10] - basis_vector(K, 10)).norm() == 0.0);
}

TEST_CASE("four-term expansion equals S c S^{-1}") {
  const auto cfg = worked_configuration();
  for (double q : {0.2, 0.5, 0.9}) {
    const auto d = RankOneDeformation::from_alpha(cfg.u(48), cfg.v(48), kI);
    const auto direct = make_pair(SimilarityOperator::rank_one(d), QParam(q), 48);
    const auto expanded = make_pair_expanded(d, QParam(q), 48);
    const DenseMatrix S = oracle::rank_one(cfg.u(48), cfg.v(48), kI);
    const DenseMatrix c = oracle::quon_c(q, 48);
    const DenseMatrix Sinv = S.inverse();
    CHECK((expanded.a.matrix() - direct.a.matrix()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((expanded.b.matrix() - direct.b.matrix()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((direct.a.matrix() - S * c * Sinv).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((direct.b.matrix() - S * c.adjoint() * Sinv).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("rank-one family residuals at q = 0.4") {
  const auto fam = worked_family(0.4, 64);
  CHECK(fam.k_safe() == 64 - 2 - 7);
  CHECK(qmutator_residual(fam.pair().a, fam.pair().b, fam.q(), fam.k_safe()) < 1e-12);
  CHECK(biorthogonality_defect(fam) < 1e-11);
  CHECK(fam.iteration_residual() < 1e-11);
  const auto l = check_ladder(fam);
  CHECK(l.raise_phi < 1e-11);
  CHECK(l.lower_phi < 1e-11);
  CHECK(l.raise_psi < 1e-11);
  CHECK(l.lower_psi < 1e-11);
  CHECK(l.vacuum_phi < 1e-11);
  CHECK(l.vacuum_psi < 1e-11);
}

TEST_CASE("number operator eigenvalues") {
  const auto fam = worked_family(0.5, 64);
  const DenseMatrix N = fam.pair().b.matrix() * fam.pair().a.matrix();
  CHECK((N * fam.phi()[0]).norm() < 1e-14);
  CHECK((N * fam.phi()[3] - 1.75 * fam.phi()[3]).norm() < 1e-11);
  const auto r = number_eigencheck(fam);
  CHECK(r.phi_residual < 1e-11);
  CHECK(r.psi_residual < 1e-11);
  CHECK(r.spectrum_mismatch < 1e-9);
  CHECK(r.spectrum_vs_beta < 1e-9);

  const auto boson = identity_family(1.0, 20);
  const DenseMatrix Nb = boson.pair().b.matrix() * boson.pair().a.matrix();
  for (int n = 0; n < 19; ++n) CHECK((Nb * boson.phi()[n] - double(n) * boson.phi()[n]).norm() < 1e-13);
}

TEST_CASE("Theta operator") {
  const auto id = identity_family(0.5, 24);
  const auto tid = build_theta(id);
  CHECK((tid.theta.matrix() - DenseMatrix::Identity(24, 24)).norm() < 1e-15);

  const auto fam = worked_family(0.5, 64);
  const auto th = build_theta(fam);
  const DenseMatrix S = oracle::rank_one(fam.source().deformation().u, fam.source().deformation().v, kI);
  const DenseMatrix expected = (S * S.adjoint()).inverse();
  CHECK((th.theta.matrix() - expected).cwiseAbs().maxCoeff() < 1e-11);
  const auto r = check_theta(fam, th);
  CHECK(r.closed_form < 1e-11);
  CHECK(r.hermiticity < 1e-14);
  CHECK(r.maps_phi_to_psi < 1e-12);
  CHECK(r.inverse_identity < 1e-11);
  CHECK(r.min_eigenvalue > 0.0);
  CHECK(r.intertwining < 1e-10);
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(expected);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("Theta conjugacy and its negative control") {
  CHECK(check_theta_conjugate(identity_family(0.5, 24), make_identity(24)).conjugacy < 1e-15);
  const auto fam = worked_family(0.5, 64);
  const auto th = build_theta(fam);
  const auto good = check_theta_conjugate(fam, th.theta);
  CHECK(good.conjugacy < 1e-10);
  CHECK(good.psi_equals_theta_phi < 1e-10);
  const auto bad = check_theta_conjugate(fam, make_identity(64));
  CHECK(bad.conjugacy > 0.1);
}

TEST_CASE("weak resolution of the identity") {
  const auto id = identity_family(0.5, 16);
  const auto [a0, b0] = weak_resolution_check(id, basis_vector(16, 0), basis_vector(16, 0));
  CHECK(std::abs(a0 - 1.0) < 1e-15);
  CHECK(std::abs(b0 - 1.0) < 1e-15);

  const auto fam = worked_family(0.5, 64);
  const auto [a1, b1] = weak_resolution_check(fam, basis_vector(64, 1), basis_vector(64, 2));
  CHECK(std::abs(a1) < 1e-11);
  CHECK(std::abs(b1) < 1e-11);

  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    const FockVector f = oracle::random_supported(rng, 64, 30);
    const FockVector g = oracle::random_supported(rng, 64, 30);
    const auto [x, y] = weak_resolution_check(fam, f, g);
    CHECK(std::abs(x - inner(f, g)) < 1e-10 * f.norm() * g.norm());
    CHECK(std::abs(y - inner(f, g)) < 1e-10 * f.norm() * g.norm());
  }
  CHECK_THROWS_AS(weak_resolution_check(fam, basis_vector(64, 63), basis_vector(64, 0)), Error);
}

TEST_CASE("norm growth ratios") {
  const auto quon = identity_family(0.5, 40);
  const auto m = norm_growth_probe(QParam(0.5), quon.phi());
  for (std::size_t n = 0; n < m.size(); ++n)
    CHECK(m[n] == doctest::Approx(beta_sq(QParam(0.5), static_cast<int>(n))).epsilon(1e-14));
  CHECK(m.back() == doctest::Approx(2.0).epsilon(1e-10));

  const auto boson = identity_family(1.0, 20);
  const auto mb = norm_growth_probe(QParam(1.0), boson.phi());
  for (std::size_t n = 0; n < mb.size(); ++n) CHECK(mb[n] == doctest::Approx(n + 1.0));

  const auto fam = worked_family(0.5, 64);
  double bound = 0.0;
  for (const auto& p : fam.phi()) bound = std::max(bound, p.norm());
  CHECK(bound <= fam.source().norm_bound() + 1e-12);
}

TEST_CASE("random rank-one deformations satisfy every identity") {
  std::mt19937_64 rng(20241019);
  std::uniform_real_distribution<double> uq(0.05, 0.95), ua(0.1, 2.0), uphase(0.0, 6.283185307179586);
  for (int trial = 0; trial < 25; ++trial) {
    const double q = uq(rng);
    const int support = 1 + static_cast<int>(rng() % 8);
    const auto [u, v] = oracle::unit_pair(rng, 48, support);
    cplx alpha = std::polar(ua(rng), uphase(rng));
    if (std::abs(alpha + 1.0) < 0.2) alpha += 0.5;
    const auto s = SimilarityOperator::rank_one(RankOneDeformation::from_alpha(u, v, alpha));
    const auto fam = build_family(s, QParam(q), 48);
    const double scale = s.norm_bound() * s.inverse_norm_bound();
    CAPTURE(trial);
    CHECK(qmutator_residual(fam.pair().a, fam.pair().b, fam.q(), fam.k_safe()) < 1e-12 * scale * scale);
    CHECK(biorthogonality_defect(fam) < 1e-12 * scale);
    CHECK(check_ladder(fam).max() < 1e-11 * scale * scale);
    const auto th = build_theta(fam);
    CHECK(check_theta(fam, th).min_eigenvalue > 0.0);
    CHECK(check_theta_conjugate(fam, th.theta).conjugacy < 1e-10 * scale * scale);
  }
}

TEST_CASE("dense similarity blocks") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 0.2);
  DenseMatrix block = DenseMatrix::Identity(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) block(i, j) += cplx(g(rng), g(rng));
  const auto s = SimilarityOperator::dense(block);
  const auto fam = build_family(s, QParam(0.6), 40);
  CHECK(biorthogonality_defect(fam) < 1e-12);
  CHECK(check_ladder(fam).max() < 1e-11);
  CHECK(qmutator_residual(fam.pair().a, fam.pair().b, fam.q(), fam.k_safe()) < 1e-12);
  CHECK(check_theta(fam, build_theta(fam)).closed_form < 1e-11);
}

TEST_CASE("family export") {
  const auto fam = worked_family(0.5, 16);
  const auto j = export_family(fam);
  CHECK(j.at("K") == 16);
  CHECK(j.at("k_safe") == fam.k_safe());
  CHECK(j.at("phi").size() == 16);
  CHECK(j.at("psi").size() == 16);
  CHECK(j.contains("residuals"));
  CHECK(fam.resized(32).dim() == 32);
}
