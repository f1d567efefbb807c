#include "quon/positionrep.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "quon/error.hpp"

namespace quon {

namespace {

constexpr cplx kI{0.0, 1.0};
constexpr double kBoundaryTol = 1e-14;

double binomial(int n, int k) {
  double r = 1.0;
  for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

}  // namespace

PositionParams PositionParams::make(double q, double gamma) {
  QParam qp(q);
  qp.require_open_unit("position representation");
  if (!std::isfinite(gamma)) fail(ErrorCode::InvalidArgument, "gamma must be finite");
  return PositionParams{qp, std::sqrt(-std::log(q) / 2.0), gamma};
}

double PositionParams::scale() const {
  return std::sqrt(-std::expm1(-2.0 * alpha_pos * alpha_pos));
}

Grid Grid::for_gamma(double gamma) {
  const double half = 12.0 + std::abs(gamma);
  return Grid{-half, half, 4096};
}

cplx grid_inner(const GridFunction& f, const GridFunction& g) {
  if (f.values.size() != g.values.size() || f.grid.x_min != g.grid.x_min ||
      f.grid.x_max != g.grid.x_max)
    fail(ErrorCode::DimensionMismatch, "grid functions live on different grids");
  const std::size_t n = f.values.size();
  cplx s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
    s += w * std::conj(f.values[i]) * g.values[i];
  }
  return s * f.grid.step();
}

double grid_norm(const GridFunction& f) { return std::sqrt(std::max(0.0, grid_inner(f, f).real())); }

GridFunction operator-(const GridFunction& f, const GridFunction& g) {
  if (f.values.size() != g.values.size()) fail(ErrorCode::DimensionMismatch, "grid size mismatch");
  GridFunction out{f.grid, f.values};
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= g.values[i];
  return out;
}

AnalyticFunction AnalyticFunction::gaussian_term(cplx nu, double alpha, cplx amplitude, int m,
                                                 int power) {
  AnalyticFunction f(nu, alpha);
  f.add({m, power}, amplitude);
  return f;
}

void AnalyticFunction::add(Key key, cplx value) {
  if (key.second < 0) fail(ErrorCode::InvalidArgument, "negative polynomial power");
  terms_[key] += value;
}

AnalyticFunction& AnalyticFunction::operator+=(const AnalyticFunction& other) {
  if (other.nu_ != nu_ || other.alpha_ != alpha_)
    fail(ErrorCode::InvalidArgument, "cannot combine analytic functions with different envelopes");
  for (const auto& [k, v] : other.terms_) terms_[k] += v;
  return *this;
}

AnalyticFunction& AnalyticFunction::operator-=(const AnalyticFunction& other) {
  if (other.nu_ != nu_ || other.alpha_ != alpha_)
    fail(ErrorCode::InvalidArgument, "cannot combine analytic functions with different envelopes");
  for (const auto& [k, v] : other.terms_) terms_[k] -= v;
  return *this;
}

AnalyticFunction& AnalyticFunction::operator*=(cplx s) {
  for (auto& [k, v] : terms_) v *= s;
  return *this;
}

AnalyticFunction operator+(AnalyticFunction f, const AnalyticFunction& g) { return f += g; }
AnalyticFunction operator-(AnalyticFunction f, const AnalyticFunction& g) { return f -= g; }
AnalyticFunction operator*(cplx s, AnalyticFunction f) { return f *= s; }

AnalyticFunction AnalyticFunction::times_phase(int s) const {
  AnalyticFunction out(nu_, alpha_);
  for (const auto& [k, v] : terms_) out.terms_[{k.first + s, k.second}] += v;
  return out;
}

AnalyticFunction AnalyticFunction::shifted() const {
  // x^p exp(-x^2/2 + lambda x) at x + i alpha:
  //   (x + i alpha)^p exp(-x^2/2 + (lambda - i alpha) x) exp(alpha^2/2 + i alpha lambda)
  AnalyticFunction out(nu_, alpha_);
  const cplx ia = kI * alpha_;
  for (const auto& [k, v] : terms_) {
    const auto [m, p] = k;
    const cplx lambda = nu_ + ia * static_cast<double>(m);
    const cplx factor = std::exp(0.5 * alpha_ * alpha_ + ia * lambda);
    for (int j = 0; j <= p; ++j)
      out.terms_[{m - 1, j}] += v * factor * binomial(p, j) * std::pow(ia, p - j);
  }
  return out;
}

AnalyticFunction AnalyticFunction::times_exp(double kappa) const {
  AnalyticFunction out(nu_ + kappa, alpha_);
  out.terms_ = terms_;
  return out;
}

cplx AnalyticFunction::operator()(double x) const {
  cplx s = 0.0;
  for (const auto& [k, v] : terms_) {
    const auto [m, p] = k;
    s += v * std::pow(x, p) * std::exp(-0.5 * x * x + (nu_ + kI * alpha_ * static_cast<double>(m)) * x);
  }
  return s;
}

GridFunction AnalyticFunction::sample(const Grid& grid) const {
  GridFunction g{grid, std::vector<cplx>(grid.n_pts)};
  for (int i = 0; i < grid.n_pts; ++i) g.values[i] = (*this)(grid.x(i));
  return g;
}

// a = [e^{-2i alpha x} - T e^{-i alpha (x+gamma)}] / (-i s)
AnalyticFunction apply_a(const PositionParams& p, const AnalyticFunction& f) {
  const auto inner = std::exp(-kI * p.alpha_pos * p.gamma) * f.times_phase(-1);
  auto out = f.times_phase(-2) - inner.shifted();
  return (1.0 / (-kI * p.scale())) * out;
}

// b = [e^{2i alpha x} - e^{i alpha (x-gamma)} T] / (i s)
AnalyticFunction apply_b(const PositionParams& p, const AnalyticFunction& f) {
  const auto moved = std::exp(-kI * p.alpha_pos * p.gamma) * f.shifted().times_phase(1);
  auto out = f.times_phase(2) - moved;
  return (1.0 / (kI * p.scale())) * out;
}

// a^dag = [e^{2i alpha x} - e^{i alpha (x+gamma)} T] / (i s)
AnalyticFunction apply_a_dagger(const PositionParams& p, const AnalyticFunction& f) {
  const auto moved = std::exp(kI * p.alpha_pos * p.gamma) * f.shifted().times_phase(1);
  auto out = f.times_phase(2) - moved;
  return (1.0 / (kI * p.scale())) * out;
}

// b^dag = [e^{-2i alpha x} - T e^{-i alpha (x-gamma)}] / (-i s)
AnalyticFunction apply_b_dagger(const PositionParams& p, const AnalyticFunction& f) {
  const auto inner = std::exp(kI * p.alpha_pos * p.gamma) * f.times_phase(-1);
  auto out = f.times_phase(-2) - inner.shifted();
  return (1.0 / (-kI * p.scale())) * out;
}

namespace {

AnalyticFunction vacuum(const PositionParams& p, double sign) {
  const cplx nu = sign * p.gamma + 1.5 * kI * p.alpha_pos;
  return AnalyticFunction::gaussian_term(nu, p.alpha_pos, std::pow(std::numbers::pi, -0.25));
}

}  // namespace

AnalyticFunction vacuum_phi(const PositionParams& p) { return vacuum(p, 1.0); }
AnalyticFunction vacuum_psi(const PositionParams& p) { return vacuum(p, -1.0); }

PositionFamily build_position_family(const PositionParams& p, int n_max) {
  if (n_max < 0) fail(ErrorCode::InvalidArgument, "n_max must be nonnegative");
  PositionFamily fam{p, {vacuum_phi(p)}, {vacuum_psi(p)}};
  for (int n = 1; n <= n_max; ++n) {
    const double b = beta(p.q, n - 1);
    fam.phi.push_back((1.0 / b) * apply_b(p, fam.phi.back()));
    fam.psi.push_back((1.0 / b) * apply_a_dagger(p, fam.psi.back()));
  }
  return fam;
}

void require_contained(const GridFunction& f) {
  if (f.values.empty()) return;
  const double lo = std::abs(f.values.front()), hi = std::abs(f.values.back());
  if (lo >= kBoundaryTol || hi >= kBoundaryTol) {
    std::ostringstream os;
    os << "function escapes the grid [" << f.grid.x_min << ", " << f.grid.x_max
       << "]: boundary magnitudes " << lo << ", " << hi;
    fail(ErrorCode::Domain, os.str());
  }
}

double qmutation_grid_check(const PositionParams& p, const std::vector<AnalyticFunction>& tests,
                            const Grid& grid) {
  double worst = 0.0;
  for (const auto& f : tests) {
    require_contained(f.sample(grid));
    const auto ab = apply_a(p, apply_b(p, f));
    const auto ba = apply_b(p, apply_a(p, f));
    const auto lhs = ab - cplx(p.q.value()) * ba;
    require_contained(lhs.sample(grid));
    worst = std::max(worst, grid_norm(lhs.sample(grid) - f.sample(grid)));
  }
  return worst;
}

CoefficientTable coefficient_recursion(const PositionParams& p, int n_max) {
  const auto fam = build_position_family(p, n_max);
  const cplx amp0 = std::pow(std::numbers::pi, -0.25);
  CoefficientTable table;
  for (int n = 0; n <= n_max; ++n) {
    // Undo the prefactor (1/beta_{n-1}!) (-i/s)^n pi^{-1/4}.
    const cplx pref = amp0 * std::pow(-kI / p.scale(), n) / q_factorial(p.q, n - 1);
    std::vector<cplx> row(n + 1, 0.0);
    for (const auto& [key, v] : fam.phi[n].terms()) {
      const auto [m, power] = key;
      if (power != 0 || m < 0 || m % 2 != 0 || m / 2 > n) {
        if (std::abs(v) > 1e-13) fail(ErrorCode::Convergence, "unexpected term in phi_n expansion");
        continue;
      }
      row[m / 2] = v / pref;
    }
    table.push_back(std::move(row));
  }
  return table;
}

double PositionLadderReport::max() const {
  return std::max({raise_phi, lower_phi, raise_psi, lower_psi, vacuum_phi, vacuum_psi});
}

PositionLadderReport position_ladder_check(const PositionFamily& family, const Grid& grid) {
  const auto& p = family.params;
  const int n_top = static_cast<int>(family.phi.size()) - 1;
  PositionLadderReport r;
  r.vacuum_phi = grid_norm(apply_a(p, family.phi[0]).sample(grid));
  r.vacuum_psi = grid_norm(apply_b_dagger(p, family.psi[0]).sample(grid));
  for (int n = 0; n <= n_top; ++n) {
    const double bn = beta(p.q, n), bm = beta(p.q, n - 1);
    const auto phi_n = family.phi[n].sample(grid);
    const auto psi_n = family.psi[n].sample(grid);
    require_contained(phi_n);
    require_contained(psi_n);
    if (n < n_top) {
      r.raise_phi = std::max(r.raise_phi, grid_norm(apply_b(p, family.phi[n]).sample(grid) -
                                                    (bn * family.phi[n + 1]).sample(grid)));
      r.raise_psi = std::max(r.raise_psi, grid_norm(apply_a_dagger(p, family.psi[n]).sample(grid) -
                                                    (bn * family.psi[n + 1]).sample(grid)));
    }
    if (n >= 1) {
      r.lower_phi = std::max(r.lower_phi, grid_norm(apply_a(p, family.phi[n]).sample(grid) -
                                                    (bm * family.phi[n - 1]).sample(grid)));
      r.lower_psi = std::max(r.lower_psi, grid_norm(apply_b_dagger(p, family.psi[n]).sample(grid) -
                                                    (bm * family.psi[n - 1]).sample(grid)));
    }
  }
  return r;
}

SimilarityReport similarity_check(const PositionParams& p, int n_max, const Grid& grid) {
  const auto fam = build_position_family(p, n_max);
  const auto undeformed = build_position_family(PositionParams::make(p.q.value(), 0.0), n_max);
  const auto mirrored = build_position_family(PositionParams::make(p.q.value(), -p.gamma), n_max);

  SimilarityReport r;
  std::vector<GridFunction> phi_s, psi_s;
  for (int n = 0; n <= n_max; ++n) {
    phi_s.push_back(fam.phi[n].sample(grid));
    psi_s.push_back(fam.psi[n].sample(grid));
    require_contained(phi_s.back());
    require_contained(psi_s.back());
    r.phi_vs_scaled = std::max(
        r.phi_vs_scaled, grid_norm(phi_s.back() - undeformed.phi[n].times_exp(p.gamma).sample(grid)));
    r.psi_vs_scaled = std::max(
        r.psi_vs_scaled, grid_norm(psi_s.back() - undeformed.phi[n].times_exp(-p.gamma).sample(grid)));
    r.gamma_symmetry =
        std::max(r.gamma_symmetry, grid_norm(psi_s.back() - mirrored.phi[n].sample(grid)));
  }
  Eigen::MatrixXcd gram(n_max + 1, n_max + 1);
  for (int n = 0; n <= n_max; ++n)
    for (int m = 0; m <= n_max; ++m) {
      const cplx g = grid_inner(phi_s[n], psi_s[m]);
      r.biorthogonality = std::max(r.biorthogonality, std::abs(g - (n == m ? 1.0 : 0.0)));
      gram(n, m) = grid_inner(phi_s[n], phi_s[m]);
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram, Eigen::EigenvaluesOnly);
  r.gram_condition = eig.eigenvalues().maxCoeff() / eig.eigenvalues().minCoeff();
  return r;
}

cplx l_sum(const PositionParams& p, int n) {
  const double a2 = p.alpha_pos * p.alpha_pos;
  cplx s = 0.0;
  for (int k = 0; k <= n; ++k)
    for (int l = 0; l <= n; ++l) {
      const double sign = ((k + l) % 2 == 0) ? 1.0 : -1.0;
      const double denom = q_number_factorial(p.q, k) * q_number_factorial(p.q, l) *
                           q_number_factorial(p.q, n - k) * q_number_factorial(p.q, n - l);
      const double d = static_cast<double>(l - k);
      s += sign * std::exp(-a2 * (k + l + d * d)) *
           std::exp(2.0 * kI * p.alpha_pos * p.gamma * d) / denom;
    }
  return s;
}

double norm_formula(const PositionParams& p, int n) {
  return q_number_factorial(p.q, n) * std::exp(p.gamma * p.gamma) *
         std::pow(1.0 - p.q.value(), -n) * l_sum(p, n).real();
}

NormFormulaReport norm_formula_check(const PositionParams& p, int n_max, const Grid& grid) {
  const auto fam = build_position_family(p, n_max);
  NormFormulaReport r;
  for (int n = 0; n <= n_max; ++n) {
    const auto phi_n = fam.phi[n].sample(grid);
    const auto psi_n = fam.psi[n].sample(grid);
    require_contained(phi_n);
    require_contained(psi_n);
    const double ns = grid_inner(phi_n, phi_n).real();
    const double ps = grid_inner(psi_n, psi_n).real();
    const cplx L = l_sum(p, n);
    const double formula = norm_formula(p, n);
    r.grid_norm_sq.push_back(ns);
    r.psi_norm_sq.push_back(ps);
    r.formula.push_back(formula);
    r.max_relative = std::max(r.max_relative, std::abs(ns - formula) / std::abs(formula));
    r.max_phi_psi_gap = std::max(r.max_phi_psi_gap, std::abs(ns - ps) / ns);
    r.max_imag_l = std::max(r.max_imag_l, std::abs(L.imag()));
    if (L.real() > (n + 1.0) * (n + 1.0)) r.bound_holds = false;
  }
  return r;
}

double theta_conjugacy_grid_check(const PositionFamily& family, const Grid& grid) {
  const auto& p = family.params;
  double worst = 0.0;
  for (const auto& f : family.phi) {
    const auto lhs = apply_a(p, f).sample(grid);
    const auto rhs = apply_b_dagger(p, f.times_exp(-2.0 * p.gamma)).times_exp(2.0 * p.gamma).sample(grid);
    worst = std::max(worst, grid_norm(lhs - rhs));
  }
  return worst;
}

std::vector<double> position_norms(const PositionFamily& family, const Grid& grid, bool psi) {
  std::vector<double> out;
  for (const auto& f : psi ? family.psi : family.phi) {
    const auto s = f.sample(grid);
    require_contained(s);
    out.push_back(grid_norm(s));
  }
  return out;
}

}  // namespace quon
