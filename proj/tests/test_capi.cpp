#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "quon/quon.h"

namespace {

const int kIdx0[] = {0, 2};
const quon_complex kW0[] = {{0.6, 0.0}, {0.0, 0.8}};
const int kIdx1[] = {1, 4};
const quon_complex kW1[] = {{0.5, 0.0}, {-0.3, 0.2}};
const int kIdx2[] = {3, 5};
const quon_complex kW2[] = {{0.0, 0.4}, {0.25, 0.0}};

quon_family* worked(double q, int K) {
  quon_family* f = nullptr;
  REQUIRE(quon_family_subsets(q, K, kIdx0, kW0, 2, kIdx1, kW1, 2, kIdx2, kW2, 2, {0.0, 1.0}, &f) ==
          QUON_OK);
  return f;
}

}  // namespace

TEST_CASE("scalar functions") {
  double x = 0.0;
  CHECK(quon_beta_sq(0.5, 1, &x) == QUON_OK);
  CHECK(x == doctest::Approx(1.5));
  CHECK(quon_q_factorial(1.0, 3, &x) == QUON_OK);
  CHECK(x == doctest::Approx(std::sqrt(24.0)));
  CHECK(quon_log_number_eigenvalue(0.9, 12, &x) == QUON_OK);
  CHECK(x == doctest::Approx(12.0));
  CHECK(quon_log_number_eigenvalue(1.5, 2, &x) == QUON_DOMAIN);
  CHECK(std::string(quon_last_error()).find("q") != std::string::npos);
  CHECK(quon_beta_sq(0.5, 1, nullptr) == QUON_INVALID_ARGUMENT);
  CHECK(std::strlen(quon_version()) > 0);
}

TEST_CASE("family handles") {
  quon_family* f = worked(0.5, 64);
  CHECK(quon_family_dim(f) == 64);
  CHECK(quon_family_k_safe(f) == 55);
  quon_family_report r{};
  CHECK(quon_family_check(f, &r) == QUON_OK);
  CHECK(r.qmutator < 1e-12);
  CHECK(r.biorthogonality < 1e-11);
  CHECK(r.ladder < 1e-11);
  CHECK(r.number < 1e-11);
  CHECK(r.spectra < 1e-9);
  CHECK(r.theta_closed_form < 1e-11);
  CHECK(r.theta_conjugacy < 1e-10);
  CHECK(r.theta_inverse < 1e-11);
  CHECK(r.theta_min_eigenvalue > 0.0);

  std::vector<quon_complex> phi(64), psi(64);
  CHECK(quon_family_vector(f, 0, 2, phi.data(), 64) == QUON_OK);
  CHECK(quon_family_vector(f, 1, 2, psi.data(), 64) == QUON_OK);
  double re = 0, im = 0;
  for (int k = 0; k < 64; ++k) {
    re += phi[k].re * psi[k].re + phi[k].im * psi[k].im;
    im += phi[k].re * psi[k].im - phi[k].im * psi[k].re;
  }
  CHECK(re == doctest::Approx(1.0));
  CHECK(std::abs(im) < 1e-14);
  CHECK(quon_family_vector(f, 0, 64, phi.data(), 64) == QUON_INVALID_ARGUMENT);
  CHECK(quon_family_vector(f, 0, 2, phi.data(), 10) == QUON_DIMENSION_MISMATCH);

  std::vector<quon_complex> a(64 * 64);
  CHECK(quon_family_operator(f, 0, a.data(), static_cast<int>(a.size())) == QUON_OK);

  quon_bicoherent_report b{};
  CHECK(quon_bicoherent(f, {0.3, 0.2}, &b) == QUON_OK);
  CHECK(b.eigen_a < 1e-9);
  CHECK(b.eigen_b_dagger < 1e-9);
  CHECK(std::abs(b.pairing.re - 1.0) < 1e-12);
  CHECK(b.rho == doctest::Approx(std::sqrt(2.0)));
  CHECK(std::abs(b.uncertainty_product.re - b.predicted_uncertainty) < 1e-7);
  CHECK(quon_bicoherent(f, {2.0, 0.0}, &b) == QUON_DOMAIN);
  quon_family_free(f);
}

TEST_CASE("invalid families") {
  quon_family* f = nullptr;
  const quon_complex u[] = {{1.0, 0.0}};
  const quon_complex v[] = {{2.0, 0.0}};
  CHECK(quon_family_rank_one(0.5, 32, u, v, 1, {1.0, 0.0}, &f) == QUON_INVALID_ARGUMENT);
  CHECK(f == nullptr);
  CHECK(quon_family_rank_one(0.5, 32, u, u, 1, {-1.0, 0.0}, &f) == QUON_SINGULAR);
  CHECK(quon_family_rank_one(0.5, 32, u, u, 1, {0.5, 0.0}, &f) == QUON_OK);
  quon_family_free(f);
  quon_family_free(nullptr);
}

TEST_CASE("quadrature and resolution") {
  quon_quadrature* quad = nullptr;
  REQUIRE(quon_quadrature_solve(0.5, std::sqrt(2.0), 12, &quad) == QUON_OK);
  CHECK(quon_quadrature_feasible(quad) == 1);
  CHECK(quon_quadrature_max_residual(quad) < 1e-10);
  const int n = quon_quadrature_size(quad);
  std::vector<double> r(n), w(n);
  CHECK(quon_quadrature_nodes(quad, r.data(), w.data(), n) == QUON_OK);
  for (int j = 0; j < n; ++j) CHECK(w[j] > 0.0);

  quon_family* f = worked(0.5, 64);
  const quon_complex x[] = {{1, 0}, {0, 1}, {0.5, 0}};
  const quon_complex y[] = {{0, 0}, {2, 0}, {1, -1}};
  quon_complex out{};
  CHECK(quon_resolution_check(f, quad, 64, x, y, 3, &out) == QUON_OK);
  // <x, y> = conj(i) * 2 + 0.5 * (1 - i) = 0.5 - 2.5 i.
  CHECK(std::abs(out.re - 0.5) < 1e-8);
  CHECK(std::abs(out.im + 2.5) < 1e-8);
  quon_family_free(f);
  quon_quadrature_free(quad);

  REQUIRE(quon_quadrature_solve(0.5, std::sqrt(0.5), 12, &quad) == QUON_OK);
  CHECK(quon_quadrature_feasible(quad) == 0);
  quon_quadrature_free(quad);
  CHECK(quon_quadrature_solve(0.5, std::sqrt(2.0), 100, &quad) == QUON_CONDITIONING);
}

TEST_CASE("position handles") {
  quon_position* p = nullptr;
  REQUIRE(quon_position_create(0.6, 0.5, 5, &p) == QUON_OK);
  double ladder = 1.0, rel = 1.0;
  int bound = 0;
  CHECK(quon_position_ladder(p, &ladder) == QUON_OK);
  CHECK(ladder < 1e-10);
  CHECK(quon_position_norm_formula(p, &rel, &bound) == QUON_OK);
  CHECK(rel < 1e-6);
  CHECK(bound == 1);
  const int n = quon_position_grid_size(p);
  CHECK(n == 4096);
  std::vector<double> x(n);
  std::vector<quon_complex> v(n);
  CHECK(quon_position_sample(p, 0, 0, x.data(), v.data(), n) == QUON_OK);
  CHECK(x.front() == doctest::Approx(-12.5));
  const double mid = std::pow(M_PI, -0.25) * std::exp(-x[2048] * x[2048] / 2 + 0.5 * x[2048]);
  CHECK(std::hypot(v[2048].re, v[2048].im) == doctest::Approx(mid).epsilon(1e-12));
  CHECK(quon_position_sample(p, 0, 9, x.data(), v.data(), n) == QUON_INVALID_ARGUMENT);
  quon_position_free(p);
  CHECK(quon_position_create(1.2, 0.0, 3, &p) == QUON_DOMAIN);
}

TEST_CASE("config runs") {
  int code = -1;
  char* summary = nullptr;
  const char* cfg = R"({"q": 0.5, "K": 64, "family": "identity", "tasks": ["mutator", "family"]})";
  CHECK(quon_run_config(cfg, nullptr, 3, 1.0, &code, &summary) == QUON_OK);
  CHECK(code == 0);
  REQUIRE(summary != nullptr);
  CHECK(std::string(summary).find("\"passed\": true") != std::string::npos);
  quon_string_free(summary);

  CHECK(quon_run_config(cfg, nullptr, 3, 1e-40, &code, nullptr) == QUON_OK);
  CHECK(code == 1);
  CHECK(std::string(quon_last_error()).find("tolerance failure") != std::string::npos);

  const char* bad = R"({"q": 1.5, "K": 64, "family": "identity", "tasks": ["bicoherent"]})";
  CHECK(quon_run_config(bad, nullptr, -1, 1.0, &code, nullptr) == QUON_CONFIG);
  CHECK(std::string(quon_last_error()).find("$.q") != std::string::npos);
  CHECK(quon_run_config("{not json", nullptr, -1, 1.0, &code, nullptr) == QUON_CONFIG);
}

TEST_CASE("selftest entry point") {
  CHECK(quon_criterion_count() == 12);
  int calls = 0;
  const int failed = quon_selftest(
      12, [](int id, const char*, int passed, const char*, void* user) {
        ++*static_cast<int*>(user);
        CHECK(id == 12);
        CHECK(passed == 1);
      },
      &calls);
  CHECK(failed == 0);
  CHECK(calls == 1);
  CHECK(quon_selftest(13, nullptr, nullptr) == -1);
}
