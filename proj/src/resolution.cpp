#include "quon/resolution.hpp"

#include <algorithm>
#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "quon/error.hpp"

namespace quon {

namespace {

using real50 = boost::multiprecision::cpp_bin_float_50;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<real50> radial_moments_mp(const QParam& q, int count) {
  // [k]! / (2 pi) with [k] = (1 - q^k)/(1 - q), or k at q = 1.
  const real50 qv = q.value();
  const real50 two_pi = 2 * boost::math::constants::pi<real50>();
  std::vector<real50> m(count);
  real50 fact = 1;
  for (int k = 0; k < count; ++k) {
    if (k >= 1) fact *= q.value() == 1.0 ? real50(k) : (1 - pow(qv, k)) / (1 - qv);
    m[k] = fact / two_pi;
  }
  return m;
}

struct Recurrence {
  std::vector<real50> alpha;
  std::vector<real50> beta;  // beta[0] = total mass
  bool breakdown = false;
};

// Chebyshev algorithm: moments m_0..m_{2n-1} -> three-term recurrence.
Recurrence chebyshev(const std::vector<real50>& m, int n) {
  Recurrence rec;
  rec.alpha.assign(n, 0);
  rec.beta.assign(n, 0);
  const int L = 2 * n;
  std::vector<real50> prev(L, real50(0)), cur(m.begin(), m.begin() + L);
  rec.alpha[0] = m[1] / m[0];
  rec.beta[0] = m[0];
  for (int k = 1; k < n; ++k) {
    std::vector<real50> next(L, real50(0));
    for (int l = k; l < L - k; ++l)
      next[l] = cur[l + 1] - rec.alpha[k - 1] * cur[l] - rec.beta[k - 1] * prev[l];
    if (!(next[k] > 0)) {
      rec.breakdown = true;
      return rec;
    }
    rec.alpha[k] = next[k + 1] / next[k] - cur[k] / cur[k - 1];
    rec.beta[k] = next[k] / cur[k - 1];
    prev = std::move(cur);
    cur = std::move(next);
  }
  return rec;
}

// Number of eigenvalues of the Jacobi matrix below x (Sturm sequence).
int sturm_count(const Recurrence& rec, const real50& x) {
  const int n = static_cast<int>(rec.alpha.size());
  int count = 0;
  real50 d = 1;
  for (int k = 0; k < n; ++k) {
    d = rec.alpha[k] - x - (k ? rec.beta[k] / d : real50(0));
    if (d == 0) d = real50(1e-60);
    if (d < 0) ++count;
  }
  return count;
}

struct GaussRule {
  std::vector<real50> nodes;
  std::vector<real50> weights;
};

GaussRule gauss_from_recurrence(const Recurrence& rec) {
  const int n = static_cast<int>(rec.alpha.size());
  real50 lo = 0, hi = 0;
  for (int k = 0; k < n; ++k) {
    real50 radius = 0;
    if (k) radius += sqrt(rec.beta[k]);
    if (k + 1 < n) radius += sqrt(rec.beta[k + 1]);
    lo = k ? std::min(lo, real50(rec.alpha[k] - radius)) : real50(rec.alpha[k] - radius);
    hi = k ? std::max(hi, real50(rec.alpha[k] + radius)) : real50(rec.alpha[k] + radius);
  }
  GaussRule rule;
  for (int i = 0; i < n; ++i) {
    real50 a = lo, b = hi;
    for (int it = 0; it < 400 && b - a > abs(b) * real50(1e-48); ++it) {
      const real50 mid = (a + b) / 2;
      if (sturm_count(rec, mid) > i) b = mid; else a = mid;
    }
    const real50 t = (a + b) / 2;
    // Christoffel number from the orthonormal polynomials.
    real50 p_prev = 0, p = 1, sum = 1;
    for (int k = 0; k + 1 < n; ++k) {
      const real50 p_next =
          ((t - rec.alpha[k]) * p - (k ? sqrt(rec.beta[k]) : real50(0)) * p_prev) / sqrt(rec.beta[k + 1]);
      p_prev = p;
      p = p_next;
      sum += p * p;
    }
    rule.nodes.push_back(t);
    rule.weights.push_back(rec.beta[0] / sum);
  }
  return rule;
}

void fill_residuals(RadialQuadrature& quad, const std::vector<double>& moments) {
  quad.residuals.assign(quad.k_mom, 0.0);
  for (int k = 0; k < quad.k_mom; ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j < quad.nodes.size(); ++j)
      s += quad.weights[j] * std::pow(quad.nodes[j] * quad.nodes[j], k);
    quad.residuals[k] = std::abs(s - moments[k]) / moments[k];
  }
}

bool try_gauss(RadialQuadrature& quad, const QParam& q, double rho2, double tol) {
  const int n = (quad.k_mom + 1) / 2;
  const auto m = radial_moments_mp(q, 2 * n);
  const auto rec = chebyshev(m, n);
  if (rec.breakdown) return false;
  const auto rule = gauss_from_recurrence(rec);
  for (int j = 0; j < n; ++j) {
    const double t = static_cast<double>(rule.nodes[j]);
    const double w = static_cast<double>(rule.weights[j]);
    if (!(t >= 0.0) || !(t < rho2) || !(w >= 0.0)) return false;
    quad.nodes.push_back(std::sqrt(t));
    quad.weights.push_back(w);
  }
  fill_residuals(quad, radial_moments(q, quad.k_mom));
  quad.method = "gauss";
  return quad.max_residual() <= tol;
}

void nnls_fallback(RadialQuadrature& quad, const QParam& q, double rho2) {
  const auto moments = radial_moments(q, quad.k_mom);
  // Uniform points plus points accumulating geometrically at rho^2, where
  // the mass of the measure concentrates.
  std::vector<double> grid;
  constexpr int kUniform = 200, kRefined = 200;
  for (int j = 0; j < kUniform; ++j) grid.push_back(rho2 * j / kUniform);
  for (int j = 1; j <= kRefined; ++j) grid.push_back(rho2 * (1.0 - std::pow(10.0, -8.0 * j / kRefined)));
  std::sort(grid.begin(), grid.end());

  std::vector<std::vector<double>> A(quad.k_mom, std::vector<double>(grid.size()));
  std::vector<double> b(quad.k_mom, 1.0);
  for (int k = 0; k < quad.k_mom; ++k)
    for (std::size_t j = 0; j < grid.size(); ++j) A[k][j] = std::pow(grid[j], k) / moments[k];
  const auto w = nnls(A, b);

  quad.nodes.clear();
  quad.weights.clear();
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (w[j] > 0.0) {
      quad.nodes.push_back(std::sqrt(grid[j]));
      quad.weights.push_back(w[j]);
    }
  }
  fill_residuals(quad, moments);
  quad.method = "nnls";
}

}  // namespace

double RadialQuadrature::max_residual() const {
  return residuals.empty() ? 0.0 : *std::max_element(residuals.begin(), residuals.end());
}

std::vector<double> radial_moments(const QParam& q, int count) {
  std::vector<double> out(count);
  for (int k = 0; k < count; ++k) out[k] = q_number_factorial(q, k) / kTwoPi;
  return out;
}

RadialQuadrature solve_moment_measure(const QParam& q, double rho, int k_mom, double moment_tol) {
  q.require_open_unit("solve_moment_measure");
  if (k_mom < 1) fail(ErrorCode::InvalidArgument, "solve_moment_measure: k_mom must be positive");
  if (k_mom > kMaxMoments) {
    std::ostringstream os;
    os << "solve_moment_measure: k_mom = " << k_mom << " exceeds the stable range (<= " << kMaxMoments
       << ")";
    fail(ErrorCode::Conditioning, os.str());
  }
  if (!(rho > 0.0) || !std::isfinite(rho)) fail(ErrorCode::InvalidArgument, "rho must be positive");

  RadialQuadrature quad;
  quad.k_mom = k_mom;
  quad.rho = rho;
  const double rho2 = rho * rho;

  // A measure on [0, rho) needs m_{k+1} <= rho^2 m_k.
  const auto moments = radial_moments(q, k_mom);
  bool plausible = true;
  for (int k = 0; k + 1 < k_mom; ++k)
    if (moments[k + 1] > rho2 * moments[k] * (1.0 + 1e-14)) plausible = false;

  if (k_mom == 1) {
    quad.nodes = {0.0};
    quad.weights = {moments[0]};
    fill_residuals(quad, moments);
    quad.method = "gauss";
  } else if (!plausible || !try_gauss(quad, q, rho2, moment_tol)) {
    nnls_fallback(quad, q, rho2);
  }
  quad.feasible = plausible && quad.max_residual() <= moment_tol;
  return quad;
}

double angular_exactness(int n_theta, int k_max) {
  double worst = 0.0;
  for (int d = -k_max; d <= k_max; ++d) {
    cplx s = 0.0;
    for (int m = 0; m < n_theta; ++m) s += std::polar(1.0, kTwoPi * d * m / n_theta);
    s /= static_cast<double>(n_theta);
    worst = std::max(worst, std::abs(s - (d == 0 ? 1.0 : 0.0)));
  }
  return worst;
}

double moment_ratio(const RadialQuadrature& quad, const QParam& q, int k) {
  double s = 0.0;
  for (std::size_t j = 0; j < quad.nodes.size(); ++j)
    s += quad.weights[j] * std::pow(quad.nodes[j], 2 * k);
  return kTwoPi * s / q_number_factorial(q, k);
}

cplx resolution_check(const BiorthogonalFamily& family, const RadialQuadrature& quad, int n_theta,
                      const FockVector& f, const FockVector& g) {
  const int K = family.dim();
  if (f.size() != K || g.size() != K)
    fail(ErrorCode::DimensionMismatch, "resolution_check: vector size mismatch");
  std::vector<cplx> fa(K), gb(K);
  int k_max = 0;
  for (int k = 0; k < K; ++k) {
    fa[k] = inner(f, family.phi()[k]);
    gb[k] = inner(family.psi()[k], g);
    if (fa[k] != cplx(0.0) || gb[k] != cplx(0.0)) k_max = k;
  }
  if (2 * k_max >= quad.k_mom) {
    std::ostringstream os;
    os << "resolution_check: index " << k_max << " exceeds the matched moments (k_mom = " << quad.k_mom
       << ")";
    fail(ErrorCode::InvalidArgument, os.str());
  }
  if (n_theta <= k_max) fail(ErrorCode::InvalidArgument, "resolution_check: n_theta too small");

  const auto& q = family.q();
  std::vector<double> inv_fact(k_max + 1);
  for (int k = 0; k <= k_max; ++k) inv_fact[k] = 1.0 / q_factorial(q, k - 1);

  cplx total = 0.0;
  for (std::size_t j = 0; j < quad.nodes.size(); ++j) {
    cplx ring = 0.0;
    for (int m = 0; m < n_theta; ++m) {
      const cplx z = std::polar(quad.nodes[j], kTwoPi * m / n_theta);
      // N^{-2} <f, phi(z)> <Psi(z), g> as a product of two finite series.
      cplx fz = 0.0, gz = 0.0, zk = 1.0;
      for (int k = 0; k <= k_max; ++k) {
        fz += zk * inv_fact[k] * fa[k];
        gz += std::conj(zk) * inv_fact[k] * gb[k];
        zk *= z;
      }
      ring += fz * gz;
    }
    total += quad.weights[j] * (kTwoPi / n_theta) * ring;
  }
  return total;
}

std::vector<double> nnls(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                         int max_iter) {
  const int m = static_cast<int>(A.size());
  const int n = m ? static_cast<int>(A[0].size()) : 0;
  Eigen::MatrixXd M(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = A[i][j];
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(b.data(), m);
  if (max_iter <= 0) max_iter = 3 * n;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(n, false);
  const double tol = 1e-12 * M.cwiseAbs().maxCoeff() * std::max(m, n);

  auto solve_passive = [&](Eigen::VectorXd& z) {
    std::vector<int> idx;
    for (int j = 0; j < n; ++j)
      if (passive[j]) idx.push_back(j);
    Eigen::MatrixXd Mp(m, idx.size());
    for (std::size_t c = 0; c < idx.size(); ++c) Mp.col(c) = M.col(idx[c]);
    const Eigen::VectorXd zp = Mp.colPivHouseholderQr().solve(rhs);
    z.setZero(n);
    for (std::size_t c = 0; c < idx.size(); ++c) z(idx[c]) = zp(c);
  };

  for (int iter = 0; iter < max_iter; ++iter) {
    const Eigen::VectorXd grad = M.transpose() * (rhs - M * x);
    int best = -1;
    double best_val = tol;
    for (int j = 0; j < n; ++j)
      if (!passive[j] && grad(j) > best_val) {
        best_val = grad(j);
        best = j;
      }
    if (best < 0) break;
    passive[best] = true;

    Eigen::VectorXd z;
    for (int inner_it = 0; inner_it < 3 * n; ++inner_it) {
      solve_passive(z);
      bool ok = true;
      for (int j = 0; j < n; ++j)
        if (passive[j] && z(j) <= 0.0) ok = false;
      if (ok) break;
      double step = 1.0;
      for (int j = 0; j < n; ++j)
        if (passive[j] && z(j) <= 0.0) step = std::min(step, x(j) / (x(j) - z(j)));
      x += step * (z - x);
      for (int j = 0; j < n; ++j)
        if (passive[j] && x(j) <= 1e-300) {
          passive[j] = false;
          x(j) = 0.0;
        }
    }
    x = z;
  }
  return std::vector<double>(x.data(), x.data() + n);
}

}  // namespace quon
