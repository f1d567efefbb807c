#include "doctest.h"

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "quon/error.hpp"
#include "quon/qcore.hpp"

using namespace quon;

TEST_CASE("beta_n^2 worked values") {
  CHECK(beta(QParam(1.0), 3) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(beta_sq(QParam(1.0), 3) == 4.0);
  CHECK(beta_sq(QParam(0.5), 1) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(beta_sq(QParam(-1.0), 1) == 0.0);
  CHECK(beta(QParam(-1.0), 1) == 0.0);
  for (double q : {-1.0, 0.0, 0.3, 1.0, 1.7}) {
    CHECK(beta_sq(QParam(q), -1) == 0.0);
    CHECK(beta_sq(QParam(q), 0) == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("beta_n^2 against the geometric sum") {
  for (double q : {0.05, 0.3, 0.5, 0.9, 0.999, 1.0 - 1e-9, 1.2})
    for (int n = 0; n < 60; ++n) {
      const double ref = static_cast<double>(oracle::beta_sq(q, n));
      CHECK(std::abs(beta_sq(QParam(q), n) - ref) <= 1e-13 * ref);
      CHECK(std::abs(beta_sq_recursive(QParam(q), n) - ref) <= 1e-13 * ref);
    }
}

TEST_CASE("beta_n^2 increases to 1/(1-q)") {
  for (double q : {0.1, 0.5, 0.95}) {
    const QParam p(q);
    double prev = 0.0;
    for (int n = 0; n < 400; ++n) {
      const double b = beta_sq(p, n);
      CHECK(b >= prev);
      CHECK(b <= p.beta_sq_limit() * (1 + 1e-15));
      prev = b;
    }
    CHECK(prev == doctest::Approx(p.beta_sq_limit()).epsilon(1e-8));
  }
}

TEST_CASE("q-factorials") {
  CHECK(q_factorial(QParam(1.0), 3) == doctest::Approx(std::sqrt(24.0)).epsilon(1e-15));
  CHECK(q_factorial(QParam(0.5), 2) == doctest::Approx(std::sqrt(1.5 * 1.75)).epsilon(1e-15));
  CHECK(q_factorial(QParam(0.7), 0) == 1.0);
  CHECK(q_factorial(QParam(0.7), -1) == 1.0);
  for (double q : {0.2, 0.6, 0.99})
    for (int n = 0; n < 40; ++n) {
      const double ref = static_cast<double>(oracle::beta_factorial(q, n));
      CHECK(std::abs(q_factorial(QParam(q), n) - ref) <= 1e-13 * ref);
      CHECK(q_number(QParam(q), n + 1) == doctest::Approx(beta_sq(QParam(q), n)).epsilon(1e-15));
      CHECK(q_number_factorial(QParam(q), n + 1) ==
            doctest::Approx(ref * ref).epsilon(1e-13));
    }
}

TEST_CASE("log-number eigenvalues are the integers") {
  CHECK(log_number_eigenvalue(QParam(0.5), 0) == 0.0);
  CHECK(log_number_eigenvalue(QParam(0.5), 5) == doctest::Approx(5.0).epsilon(1e-13));
  CHECK(log_number_eigenvalue(QParam(0.9), 12) == doctest::Approx(12.0).epsilon(1e-12));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uq(0.02, 0.98);
  // 1 - beta_{n-1}^2 (1-q) = q^n loses digits once q^n nears the rounding
  // level, so levels are drawn with q^n >= 1e-4.
  for (int i = 0; i < 100; ++i) {
    const double q = uq(rng);
    const int n_top = static_cast<int>(std::log(1e-4) / std::log(q));
    const int n = static_cast<int>(rng() % (n_top + 1));
    CAPTURE(q);
    CAPTURE(n);
    CHECK(std::abs(log_number_eigenvalue(QParam(q), n) - n) < 1e-9 * (n + 1));
  }
  CHECK_THROWS_AS(log_number_eigenvalue(QParam(1.0), 2), Error);
  CHECK_THROWS_AS(log_number_eigenvalue(QParam(-0.5), 2), Error);
}

TEST_CASE("beta sequence cache") {
  BetaSequence seq(QParam(0.4), 30);
  CHECK(seq.size() == 30);
  CHECK(seq.value(-1) == 0.0);
  CHECK(seq.factorial(-1) == 1.0);
  for (int n = 0; n < 30; ++n) {
    CHECK(seq.value(n) == doctest::Approx(beta(QParam(0.4), n)).epsilon(1e-15));
    CHECK(seq.factorial(n) == doctest::Approx(q_factorial(QParam(0.4), n)).epsilon(1e-14));
  }
  CHECK_THROWS(seq.value(30));
}

TEST_CASE("domain checks") {
  CHECK(QParam(0.5).in_open_unit());
  CHECK_FALSE(QParam(1.0).in_open_unit());
  CHECK_THROWS_AS(QParam(1.5).require_open_unit("test"), Error);
  try {
    QParam(0.0).require_open_unit("test");
    FAIL("expected a domain error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Domain);
  }
}
