#pragma once

#include <string>
#include <vector>

#include "quon/pseudoquon.hpp"

namespace quon {

inline constexpr int kMaxMoments = 64;

// Atoms on [0, rho) for a radial measure d lambda(r) with
//   sum_j w_j r_j^{2k} = (beta_{k-1}!)^2 / (2 pi),  k < k_mom.
struct RadialQuadrature {
  std::vector<double> nodes;    // r_j
  std::vector<double> weights;  // w_j >= 0
  int k_mom = 0;
  double rho = 0.0;
  std::vector<double> residuals;  // relative moment mismatch per k
  bool feasible = false;
  std::string method;  // "gauss" or "nnls"

  double max_residual() const;
};

// Target moments (beta_{k-1}!)^2 / (2 pi) for k < count.
std::vector<double> radial_moments(const QParam& q, int count);

// Gauss rule from the moment sequence (Chebyshev algorithm in extended
// precision, nodes by Sturm bisection, Christoffel weights). Falls back to a
// nonnegative least-squares fit on a grid refined toward rho when the Hankel
// route breaks down or leaves [0, rho). An infeasible moment problem is
// returned with feasible = false and its residuals; it never throws for that.
// Throws Conditioning when k_mom exceeds kMaxMoments.
RadialQuadrature solve_moment_measure(const QParam& q, double rho, int k_mom,
                                      double moment_tol = 1e-10);

// sum_j w_j sum_m (2 pi / n_theta) N(|z|)^{-2} <f, phi(z)> <Psi(z), g>
// at z = r_j e^{2 pi i m / n_theta}. Requires every index k that carries a
// nonzero <f, phi_k> or <Psi_k, g> to satisfy 2k < k_mom, and n_theta > k_max.
cplx resolution_check(const BiorthogonalFamily& family, const RadialQuadrature& quad, int n_theta,
                      const FockVector& f, const FockVector& g);

// max over index pairs k, l <= k_max of |(1/n) sum_m e^{i(k-l) theta_m} - delta_{kl}|.
double angular_exactness(int n_theta, int k_max);

// 2 pi sum_j w_j r_j^{2k} / (beta_{k-1}!)^2; equals 1 when moment k is matched.
double moment_ratio(const RadialQuadrature& quad, const QParam& q, int k);

// Lawson-Hanson nonnegative least squares: min ||A x - b||, x >= 0.
std::vector<double> nnls(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                         int max_iter = 0);

}  // namespace quon
