#pragma once

#include <optional>
#include <string>
#include <vector>

#include "quon/pseudoquon.hpp"

namespace quon {

// Cap on the number of series terms kept for any bi-coherent evaluation.
inline constexpr int kMaxSeriesTerms = 4096;
inline constexpr double kSeriesTailTarget = 1e-16;

struct Normalization {
  double value = 1.0;       // N(r)
  double tail_bound = 0.0;  // bound on the dropped part of sum r^{2k}/(beta_{k-1}!)^2
  int terms = 0;
};

// N(r) from a fixed number of terms. Throws Domain for r >= 1/sqrt(1-q) and
// Convergence when the geometric tail bound at `terms` exceeds `tail_target`.
// q = 1 is accepted as the bosonic limit.
Normalization normalization(const QParam& q, double r, int terms,
                            double tail_target = kSeriesTailTarget);

// Smallest term count meeting the tail target, up to kMaxSeriesTerms.
Normalization normalization_adaptive(const QParam& q, double r,
                                     double tail_target = kSeriesTailTarget);

// Coefficients z^k / beta_{k-1}! for k < terms, built by the ratio recursion.
std::vector<cplx> coherent_coefficients(const QParam& q, cplx z, int terms);

struct BiCoherentState {
  cplx z;
  double q = 0.0;
  int terms = 0;      // series terms kept
  int dim = 0;        // Fock dimension of phi_z, psi_z
  double norm_const = 1.0;
  FockVector phi_z;
  FockVector psi_z;
  double tail_bound = 0.0;  // bound on ||dropped part|| of either series
};

// Truncated phi(z), Psi(z). The family is rebuilt at the dimension the
// series needs; |z| must lie inside the convergence radius of the family's
// similarity (1/sqrt(1-q) for the bounded kinds handled here).
BiCoherentState bicoherent_states(const BiorthogonalFamily& family, cplx z,
                                  int extra_dim = 0);

// Quon coherent state e(z) in dimension `dim`, with `terms` series terms.
FockVector quon_coherent_state(const QParam& q, cplx z, int terms, int dim, double norm_const);

// (||a phi(z) - z phi(z)||, ||b^dag Psi(z) - z Psi(z)||).
std::pair<double, double> eigen_check(const BiCoherentState& state, const TruncatedOperator& a,
                                      const TruncatedOperator& b);

// Family pair rebuilt at the state's dimension, then eigen_check.
std::pair<double, double> eigen_check(const BiCoherentState& state,
                                      const BiorthogonalFamily& family);

// <phi(z), Psi(z)>.
cplx pairing(const BiCoherentState& state);

// phi(z) = e(z) + alpha N(|z|) Gamma_1(z) v and
// Psi(z) = e(z) + conj(beta) N(|z|) Gamma_2(z) u for the subset configuration.
std::pair<FockVector, FockVector> closed_form_riesz_states(const SubsetConfiguration& config,
                                                           cplx alpha, const QParam& q, cplx z,
                                                           int terms, int dim);

struct UncertaintyResult {
  cplx delta_q;       // principal sqrt of <Q^2> - <Q>^2
  cplx delta_p;
  cplx product;       // delta_q * delta_p
  double predicted;   // (|z|^2 (q-1) + 1) / 2
};

UncertaintyResult uncertainty_product(const BiorthogonalFamily& family, cplx z);

enum class GrowthKind { Constant, Geometric, QFactorial };
std::string to_string(GrowthKind kind);

// How the constants in ||phi_n|| <= A r^n M_n are obtained.
struct FitPolicy {
  enum class Kind { BoundedSimilarity, PositionAnalytic, Generic };
  Kind kind = Kind::Generic;
  double s_norm = 1.0;      // BoundedSimilarity: ||S||
  double s_inv_norm = 1.0;  // BoundedSimilarity: ||S^{-1}||
  double gamma = 0.0;       // PositionAnalytic: shift parameter

  static FitPolicy bounded(double s_norm, double s_inv_norm);
  static FitPolicy position(double gamma);
  static FitPolicy generic();
};

struct SideRadius {
  double A = 0.0;
  double r = 0.0;
  double M_limit = 0.0;
  GrowthKind growth = GrowthKind::Constant;
  double rho = 0.0;
  double empirical_rho = 0.0;
};

struct RadiusReport {
  SideRadius phi;
  SideRadius psi;
  double rho = 0.0;
  double empirical_rho = 0.0;
};

RadiusReport radius_report(const std::vector<double>& phi_norms,
                           const std::vector<double>& psi_norms, const QParam& q,
                           const FitPolicy& policy);

// Radius from the tail of log(||phi_k|| / beta_{k-1}!): the fitted slope s over
// the upper half of the samples gives exp(-s).
double empirical_radius(const std::vector<double>& norms, const QParam& q);

// Convergence radius of a family built on a bounded similarity (Fock kinds).
double fock_family_radius(const BiorthogonalFamily& family);

}  // namespace quon
