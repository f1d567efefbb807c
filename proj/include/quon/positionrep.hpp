#pragma once

#include <complex>
#include <map>
#include <utility>
#include <vector>

#include "quon/qcore.hpp"

namespace quon {

using cplx = std::complex<double>;

// q = exp(-2 alpha^2), gamma real.
struct PositionParams {
  QParam q;
  double alpha_pos;
  double gamma;

  static PositionParams make(double q, double gamma);
  // sqrt(1 - exp(-2 alpha^2)) = sqrt(1 - q).
  double scale() const;
};

struct Grid {
  double x_min = -12.0;
  double x_max = 12.0;
  int n_pts = 4096;

  // [-12 - |gamma|, 12 + |gamma|] with 4096 points.
  static Grid for_gamma(double gamma);
  double step() const { return (x_max - x_min) / (n_pts - 1); }
  double x(int i) const { return x_min + i * step(); }
};

struct GridFunction {
  Grid grid;
  std::vector<cplx> values;
};

// Trapezoid-rule <f, g> and ||f||.
cplx grid_inner(const GridFunction& f, const GridFunction& g);
double grid_norm(const GridFunction& f);
GridFunction operator-(const GridFunction& f, const GridFunction& g);

// Finite sum of terms  A_{m,p} x^p exp(-x^2/2 + (nu + i alpha m) x)  with a
// common complex nu and a fixed alpha. Every operator of the model maps this
// family into itself, so the shift e^{i alpha d/dx} (f(x) -> f(x + i alpha))
// is applied by exact substitution.
class AnalyticFunction {
 public:
  using Key = std::pair<int, int>;  // (m, p)

  AnalyticFunction(cplx nu, double alpha) : nu_(nu), alpha_(alpha) {}

  static AnalyticFunction gaussian_term(cplx nu, double alpha, cplx amplitude, int m = 0,
                                        int power = 0);

  cplx nu() const noexcept { return nu_; }
  double alpha() const noexcept { return alpha_; }
  const std::map<Key, cplx>& terms() const noexcept { return terms_; }

  void add(Key key, cplx value);
  AnalyticFunction& operator+=(const AnalyticFunction& other);
  AnalyticFunction& operator-=(const AnalyticFunction& other);
  AnalyticFunction& operator*=(cplx s);

  // Multiplication by e^{i alpha s x}.
  AnalyticFunction times_phase(int s) const;
  // f(x) -> f(x + i alpha).
  AnalyticFunction shifted() const;
  // Multiplication by e^{kappa x}, kappa real.
  AnalyticFunction times_exp(double kappa) const;

  cplx operator()(double x) const;
  GridFunction sample(const Grid& grid) const;

 private:
  cplx nu_;
  double alpha_;
  std::map<Key, cplx> terms_;
};

AnalyticFunction operator+(AnalyticFunction f, const AnalyticFunction& g);
AnalyticFunction operator-(AnalyticFunction f, const AnalyticFunction& g);
AnalyticFunction operator*(cplx s, AnalyticFunction f);

AnalyticFunction apply_a(const PositionParams& p, const AnalyticFunction& f);
AnalyticFunction apply_b(const PositionParams& p, const AnalyticFunction& f);
AnalyticFunction apply_a_dagger(const PositionParams& p, const AnalyticFunction& f);
AnalyticFunction apply_b_dagger(const PositionParams& p, const AnalyticFunction& f);

// pi^{-1/4} exp(-x^2/2 + x(+-gamma + 3 i alpha / 2)).
AnalyticFunction vacuum_phi(const PositionParams& p);
AnalyticFunction vacuum_psi(const PositionParams& p);

// phi_n = b phi_{n-1} / beta_{n-1} and Psi_n = a^dag Psi_{n-1} / beta_{n-1}.
struct PositionFamily {
  PositionParams params;
  std::vector<AnalyticFunction> phi;
  std::vector<AnalyticFunction> psi;
};

PositionFamily build_position_family(const PositionParams& p, int n_max);

// Throws Domain when a sampled function is not below 1e-14 at both ends.
void require_contained(const GridFunction& f);

// max ||[a,b]_q f - f|| over the test functions.
double qmutation_grid_check(const PositionParams& p, const std::vector<AnalyticFunction>& tests,
                            const Grid& grid);

// c^{(n)}_k, read off phi_n = (1/beta_{n-1}!) (-i/sqrt(1-q))^n phi_0 sum_k c_k e^{2 i alpha k x}.
using CoefficientTable = std::vector<std::vector<cplx>>;
CoefficientTable coefficient_recursion(const PositionParams& p, int n_max);

struct PositionLadderReport {
  double raise_phi = 0, lower_phi = 0, raise_psi = 0, lower_psi = 0;
  double vacuum_phi = 0, vacuum_psi = 0;
  double max() const;
};

PositionLadderReport position_ladder_check(const PositionFamily& family, const Grid& grid);

struct SimilarityReport {
  double phi_vs_scaled = 0.0;   // ||phi_n^{(gamma)} - e^{gamma x} phi_n^{(0)}||
  double psi_vs_scaled = 0.0;   // ||Psi_n^{(gamma)} - e^{-gamma x} phi_n^{(0)}||
  double gamma_symmetry = 0.0;  // ||Psi_n^{(gamma)} - phi_n^{(-gamma)}||
  double biorthogonality = 0.0; // max |<phi_n, Psi_m> - delta|
  double gram_condition = 0.0;  // condition number of the Gram matrix of phi_0..phi_n
};

SimilarityReport similarity_check(const PositionParams& p, int n_max, const Grid& grid);

// L_n = sum_{k,l} (-1)^{k+l} e^{-alpha^2 (k + l + (l-k)^2)} e^{2 i alpha gamma (l-k)}
//        / ([k]! [l]! [n-k]! [n-l]!).
cplx l_sum(const PositionParams& p, int n);
// [n]! e^{gamma^2} (1-q)^{-n} L_n.
double norm_formula(const PositionParams& p, int n);

struct NormFormulaReport {
  std::vector<double> grid_norm_sq;
  std::vector<double> formula;
  std::vector<double> psi_norm_sq;
  double max_relative = 0.0;
  double max_phi_psi_gap = 0.0;  // relative |‖phi_n‖^2 - ‖Psi_n‖^2|
  double max_imag_l = 0.0;
  bool bound_holds = true;       // L_n <= (n+1)^2
};

NormFormulaReport norm_formula_check(const PositionParams& p, int n_max, const Grid& grid);

// max_n ||a phi_n - e^{2 gamma x} b^dag (e^{-2 gamma x} phi_n)|| (Theta = e^{-2 gamma x}).
double theta_conjugacy_grid_check(const PositionFamily& family, const Grid& grid);

std::vector<double> position_norms(const PositionFamily& family, const Grid& grid, bool psi);

}  // namespace quon
