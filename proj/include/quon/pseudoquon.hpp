#pragma once

#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <utility>
#include <vector>

#include "quon/fock.hpp"

namespace quon {

// S = 1 + alpha P_{u,v}, P_{u,v} f = <u,f> v, with <u,v> = 1 and
// alpha + beta + alpha beta = 0 so that S^{-1} = 1 + beta P_{u,v}.
struct RankOneDeformation {
  FockVector u;
  FockVector v;
  cplx alpha_def;
  cplx beta_def;

  // beta = -alpha/(1+alpha); alpha = -1 is rejected (S would be singular).
  static RankOneDeformation from_alpha(FockVector u, FockVector v, cplx alpha);

  // Largest index where u or v is nonzero.
  int support_max() const;
};

// Three disjoint finite index sets with weights gamma_k; u = c0 + c1 and
// v = c0 + c2, where c_j = sum_{k in I_j} gamma_k e_k and ||c0|| = 1.
struct SubsetConfiguration {
  std::vector<std::pair<int, cplx>> set0;
  std::vector<std::pair<int, cplx>> set1;
  std::vector<std::pair<int, cplx>> set2;

  FockVector u(int K) const;
  FockVector v(int K) const;
  int support_max() const;
  void validate() const;
};

class SimilarityOperator {
 public:
  enum class Kind { Identity, RankOne, Dense };

  static SimilarityOperator identity();
  static SimilarityOperator rank_one(RankOneDeformation deformation);
  // Acts as `block` on the leading block and as the identity beyond it.
  static SimilarityOperator dense(DenseMatrix block);

  Kind kind() const noexcept { return kind_; }
  const RankOneDeformation& deformation() const;
  const DenseMatrix& block() const;

  // Number of leading indices where S differs from the identity.
  int extent() const noexcept;

  DenseMatrix forward(int K) const;
  DenseMatrix inverse(int K) const;
  DenseMatrix adjoint(int K) const;
  DenseMatrix adjoint_inverse(int K) const;

  // Upper bounds on ||S|| and ||S^{-1}||.
  double norm_bound() const;
  double inverse_norm_bound() const;

  nlohmann::json describe() const;

 private:
  SimilarityOperator(Kind kind) : kind_(kind) {}

  Kind kind_;
  std::optional<RankOneDeformation> deformation_;
  DenseMatrix block_;
  DenseMatrix block_inverse_;
};

// Leading indices on which the truncated algebra is exact:
// K - 2 for S = 1, K - 2 - (extent + 1) otherwise (c^dagger u, c v reach one
// index further than u, v).
int safe_dim(const SimilarityOperator& s, int K);

struct PseudoQuonPair {
  TruncatedOperator a;
  TruncatedOperator b;
  int k_safe;
};

// a = S c S^{-1}, b = S c^dagger S^{-1} on the K-dimensional truncation.
PseudoQuonPair make_pair(const SimilarityOperator& s, const QParam& q, int K);

// Same pair assembled from the four-term rank-one expansion
// a = c + alpha P_{c^dag u, v} + beta P_{u, c v} + alpha beta P_{<cv,u>u, v}.
PseudoQuonPair make_pair_expanded(const RankOneDeformation& d, const QParam& q, int K);

class BiorthogonalFamily {
 public:
  int dim() const noexcept { return K_; }
  int k_safe() const noexcept { return k_safe_; }
  const QParam& q() const noexcept { return q_; }
  const SimilarityOperator& source() const noexcept { return source_; }
  const std::vector<FockVector>& phi() const noexcept { return phi_; }
  const std::vector<FockVector>& psi() const noexcept { return psi_; }
  const PseudoQuonPair& pair() const noexcept { return pair_; }

  // max_{n < k_safe} of ||phi_n^{iterated} - phi_n|| and the Psi analogue.
  double iteration_residual() const noexcept { return iteration_residual_; }

  // Same source and q at a different truncation.
  BiorthogonalFamily resized(int K) const;

  friend BiorthogonalFamily build_family(const SimilarityOperator& s, const QParam& q, int K);

 private:
  BiorthogonalFamily(SimilarityOperator s, QParam q, PseudoQuonPair pair)
      : source_(std::move(s)), q_(q), pair_(std::move(pair)) {}

  SimilarityOperator source_;
  QParam q_;
  PseudoQuonPair pair_;
  int K_ = 0;
  int k_safe_ = 0;
  std::vector<FockVector> phi_;
  std::vector<FockVector> psi_;
  double iteration_residual_ = 0.0;
};

// phi_n = S e_n, Psi_n = (S^dagger)^{-1} e_n; the iterated construction
// phi_n = b phi_{n-1} / beta_{n-1} is run alongside and its deviation recorded.
BiorthogonalFamily build_family(const SimilarityOperator& s, const QParam& q, int K);

// ||G - 1||_max with G_{nm} = <phi_n, Psi_m>.
double biorthogonality_defect(const BiorthogonalFamily& family);

struct LadderReport {
  double raise_phi = 0.0;   // b phi_n = beta_n phi_{n+1}
  double lower_phi = 0.0;   // a phi_n = beta_{n-1} phi_{n-1}
  double raise_psi = 0.0;   // a^dag Psi_n = beta_n Psi_{n+1}
  double lower_psi = 0.0;   // b^dag Psi_n = beta_{n-1} Psi_{n-1}
  double vacuum_phi = 0.0;  // ||a phi_0||
  double vacuum_psi = 0.0;  // ||b^dag Psi_0||

  double max() const;
};

LadderReport check_ladder(const BiorthogonalFamily& family);

struct NumberReport {
  double phi_residual = 0.0;        // ||b a phi_n - beta_{n-1}^2 phi_n||
  double psi_residual = 0.0;        // ||(ba)^dag Psi_n - beta_{n-1}^2 Psi_n||
  double spectrum_mismatch = 0.0;   // sorted safe-block spectra of N vs N^dag
  double spectrum_vs_beta = 0.0;    // sorted spectrum of N vs beta_{n-1}^2
};

NumberReport number_eigencheck(const BiorthogonalFamily& family);

struct ThetaPair {
  TruncatedOperator theta;
  TruncatedOperator theta_inverse;
};

// Theta = sum_n |Psi_n><Psi_n|, Theta^{-1} = sum_n |phi_n><phi_n|.
ThetaPair build_theta(const BiorthogonalFamily& family);

struct ThetaReport {
  double hermiticity = 0.0;        // ||Theta - Theta^dag||_max
  double maps_phi_to_psi = 0.0;    // max_n ||Theta phi_n - Psi_n||
  double inverse_identity = 0.0;   // Theta Theta^{-1} and Theta^{-1} Theta vs 1 on the safe block
  double closed_form = 0.0;        // ||Theta - (S S^dag)^{-1}||_max
  double min_eigenvalue = 0.0;     // on the safe block
  double intertwining = 0.0;       // max_n ||(N^dag Theta - Theta N) phi_n||
};

ThetaReport check_theta(const BiorthogonalFamily& family, const ThetaPair& theta);

struct ConjugateReport {
  double conjugacy = 0.0;       // max_{n < k_safe} ||a e_n - Theta^{-1} b^dag Theta e_n||
  double psi_equals_theta_phi = 0.0;
};

// Theta^{-1} is taken from an LU factorisation of `theta`.
ConjugateReport check_theta_conjugate(const BiorthogonalFamily& family,
                                      const TruncatedOperator& theta);

// (sum_n <f,phi_n><Psi_n,g>, sum_n <f,Psi_n><phi_n,g>).
std::pair<cplx, cplx> weak_resolution_check(const BiorthogonalFamily& family,
                                            const FockVector& f, const FockVector& g);

// beta_{n-1}^2 (||phi_{n-1}|| / ||phi_n||)^2 for n = 1..size-1.
std::vector<double> norm_growth_probe(const QParam& q, const std::vector<FockVector>& phi);

nlohmann::json export_family(const BiorthogonalFamily& family);

}  // namespace quon
