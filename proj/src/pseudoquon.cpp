#include "quon/pseudoquon.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "quon/error.hpp"

namespace quon {

namespace {

constexpr double kUnitPairingTol = 1e-14;

int last_nonzero(const FockVector& x) {
  for (Eigen::Index i = x.size() - 1; i >= 0; --i)
    if (x(i) != cplx(0.0)) return static_cast<int>(i);
  return -1;
}

FockVector padded(const FockVector& x, int K) {
  if (last_nonzero(x) >= K) fail(ErrorCode::DimensionMismatch, "vector support exceeds truncation");
  FockVector out = FockVector::Zero(K);
  const auto n = std::min<Eigen::Index>(x.size(), K);
  out.head(n) = x.head(n);
  return out;
}

// P_{x,y} f = <x,f> y, i.e. the matrix y x^dagger.
DenseMatrix projector(const FockVector& x, const FockVector& y) { return y * x.adjoint(); }

FockVector embed(const std::vector<std::pair<int, cplx>>& entries, int K) {
  FockVector out = FockVector::Zero(K);
  for (const auto& [k, w] : entries) {
    if (k < 0 || k >= K) fail(ErrorCode::DimensionMismatch, "subset index outside truncation");
    out(k) = w;
  }
  return out;
}

int max_index(const std::vector<std::pair<int, cplx>>& entries) {
  int m = -1;
  for (const auto& e : entries) m = std::max(m, e.first);
  return m;
}

nlohmann::json to_json(cplx z) { return nlohmann::json::array({z.real(), z.imag()}); }

nlohmann::json to_json(const FockVector& x) {
  auto arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i) arr.push_back(to_json(x(i)));
  return arr;
}

DenseMatrix extend_block(const DenseMatrix& block, int K) {
  DenseMatrix out = DenseMatrix::Identity(K, K);
  const auto n = block.rows();
  if (n > K) fail(ErrorCode::DimensionMismatch, "similarity block larger than truncation");
  out.topLeftCorner(n, n) = block;
  return out;
}

}  // namespace

RankOneDeformation RankOneDeformation::from_alpha(FockVector u, FockVector v, cplx alpha) {
  if (std::abs(alpha + 1.0) < 1e-14)
    fail(ErrorCode::Singular, "alpha = -1 makes 1 + alpha P_{u,v} singular");
  const auto n = std::max(u.size(), v.size());
  FockVector uu = FockVector::Zero(n), vv = FockVector::Zero(n);
  uu.head(u.size()) = u;
  vv.head(v.size()) = v;
  const cplx pairing = uu.dot(vv);
  if (std::abs(pairing - 1.0) > kUnitPairingTol) {
    std::ostringstream os;
    os << "rank-one deformation needs <u,v> = 1, got " << pairing;
    fail(ErrorCode::InvalidArgument, os.str());
  }
  const cplx beta = -alpha / (1.0 + alpha);
  return RankOneDeformation{std::move(uu), std::move(vv), alpha, beta};
}

int RankOneDeformation::support_max() const { return std::max(last_nonzero(u), last_nonzero(v)); }

FockVector SubsetConfiguration::u(int K) const { return embed(set0, K) + embed(set1, K); }
FockVector SubsetConfiguration::v(int K) const { return embed(set0, K) + embed(set2, K); }

int SubsetConfiguration::support_max() const {
  return std::max({max_index(set0), max_index(set1), max_index(set2)});
}

void SubsetConfiguration::validate() const {
  std::set<int> seen;
  for (const auto* s : {&set0, &set1, &set2}) {
    for (const auto& [k, w] : *s) {
      if (k < 0) fail(ErrorCode::InvalidArgument, "subset index must be nonnegative");
      if (!seen.insert(k).second) fail(ErrorCode::InvalidArgument, "subsets must be disjoint");
    }
  }
  double norm0 = 0.0;
  for (const auto& [k, w] : set0) norm0 += std::norm(w);
  if (std::abs(norm0 - 1.0) > kUnitPairingTol)
    fail(ErrorCode::InvalidArgument, "weights on the first subset must have unit norm");
}

SimilarityOperator SimilarityOperator::identity() { return SimilarityOperator(Kind::Identity); }

SimilarityOperator SimilarityOperator::rank_one(RankOneDeformation deformation) {
  const cplx constraint = deformation.alpha_def + deformation.beta_def +
                          deformation.alpha_def * deformation.beta_def;
  if (std::abs(constraint) > 1e-14)
    fail(ErrorCode::InvalidArgument, "alpha + beta + alpha beta must vanish");
  SimilarityOperator s(Kind::RankOne);
  s.deformation_ = std::move(deformation);
  return s;
}

SimilarityOperator SimilarityOperator::dense(DenseMatrix block) {
  if (block.rows() != block.cols() || block.rows() == 0)
    fail(ErrorCode::InvalidArgument, "similarity block must be square and nonempty");
  Eigen::FullPivLU<DenseMatrix> lu(block);
  if (!lu.isInvertible()) fail(ErrorCode::Singular, "similarity block is singular");
  SimilarityOperator s(Kind::Dense);
  s.block_inverse_ = lu.inverse();
  s.block_ = std::move(block);
  return s;
}

const RankOneDeformation& SimilarityOperator::deformation() const {
  if (!deformation_) fail(ErrorCode::InvalidArgument, "similarity is not rank-one");
  return *deformation_;
}

const DenseMatrix& SimilarityOperator::block() const {
  if (kind_ != Kind::Dense) fail(ErrorCode::InvalidArgument, "similarity is not dense");
  return block_;
}

int SimilarityOperator::extent() const noexcept {
  switch (kind_) {
    case Kind::Identity: return 0;
    case Kind::RankOne: return deformation_->support_max() + 1;
    case Kind::Dense: return static_cast<int>(block_.rows());
  }
  return 0;
}

DenseMatrix SimilarityOperator::forward(int K) const {
  switch (kind_) {
    case Kind::Identity: return DenseMatrix::Identity(K, K);
    case Kind::RankOne: {
      const auto& d = *deformation_;
      return DenseMatrix::Identity(K, K) + d.alpha_def * projector(padded(d.u, K), padded(d.v, K));
    }
    case Kind::Dense: return extend_block(block_, K);
  }
  return {};
}

DenseMatrix SimilarityOperator::inverse(int K) const {
  switch (kind_) {
    case Kind::Identity: return DenseMatrix::Identity(K, K);
    case Kind::RankOne: {
      const auto& d = *deformation_;
      return DenseMatrix::Identity(K, K) + d.beta_def * projector(padded(d.u, K), padded(d.v, K));
    }
    case Kind::Dense: return extend_block(block_inverse_, K);
  }
  return {};
}

DenseMatrix SimilarityOperator::adjoint(int K) const { return forward(K).adjoint(); }
DenseMatrix SimilarityOperator::adjoint_inverse(int K) const { return inverse(K).adjoint(); }

double SimilarityOperator::norm_bound() const {
  switch (kind_) {
    case Kind::Identity: return 1.0;
    case Kind::RankOne: {
      const auto& d = *deformation_;
      return 1.0 + std::abs(d.alpha_def) * d.u.norm() * d.v.norm();
    }
    case Kind::Dense: {
      Eigen::JacobiSVD<DenseMatrix> svd(block_);
      return std::max(1.0, svd.singularValues()(0));
    }
  }
  return 1.0;
}

double SimilarityOperator::inverse_norm_bound() const {
  switch (kind_) {
    case Kind::Identity: return 1.0;
    case Kind::RankOne: {
      const auto& d = *deformation_;
      return 1.0 + std::abs(d.beta_def) * d.u.norm() * d.v.norm();
    }
    case Kind::Dense: {
      Eigen::JacobiSVD<DenseMatrix> svd(block_inverse_);
      return std::max(1.0, svd.singularValues()(0));
    }
  }
  return 1.0;
}

nlohmann::json SimilarityOperator::describe() const {
  nlohmann::json j;
  switch (kind_) {
    case Kind::Identity: j["kind"] = "identity"; break;
    case Kind::RankOne: {
      const auto& d = *deformation_;
      const int n = d.support_max() + 1;
      j["kind"] = "rank_one";
      j["alpha_def"] = to_json(d.alpha_def);
      j["beta_def"] = to_json(d.beta_def);
      j["u"] = to_json(FockVector(d.u.head(n)));
      j["v"] = to_json(FockVector(d.v.head(n)));
      break;
    }
    case Kind::Dense: j["kind"] = "dense"; j["block_dim"] = block_.rows(); break;
  }
  return j;
}

int safe_dim(const SimilarityOperator& s, int K) {
  const int extent = s.extent();
  return extent == 0 ? K - 2 : K - 2 - (extent + 1);
}

PseudoQuonPair make_pair(const SimilarityOperator& s, const QParam& q, int K) {
  const int k_safe = safe_dim(s, K);
  if (k_safe < 1) {
    std::ostringstream os;
    os << "truncation K = " << K << " leaves no safe block for this similarity";
    fail(ErrorCode::DimensionMismatch, os.str());
  }
  const auto c = make_quon_c(q, K);
  const DenseMatrix fwd = s.forward(K);
  const DenseMatrix inv = s.inverse(K);
  return PseudoQuonPair{TruncatedOperator(fwd * c.matrix() * inv, "a"),
                        TruncatedOperator(fwd * c.matrix().adjoint() * inv, "b"), k_safe};
}

PseudoQuonPair make_pair_expanded(const RankOneDeformation& d, const QParam& q, int K) {
  const auto s = SimilarityOperator::rank_one(d);
  const int k_safe = safe_dim(s, K);
  if (k_safe < 1) fail(ErrorCode::DimensionMismatch, "truncation leaves no safe block");
  const DenseMatrix c = make_quon_c(q, K).matrix();
  const DenseMatrix cd = c.adjoint();
  const FockVector u = padded(d.u, K), v = padded(d.v, K);
  const cplx al = d.alpha_def, be = d.beta_def;

  DenseMatrix a = c + al * projector(cd * u, v) + be * projector(u, c * v) +
                  al * be * projector(inner(c * v, u) * u, v);
  DenseMatrix b = cd + al * projector(c * u, v) + be * projector(u, cd * v) +
                  al * be * projector(inner(cd * v, u) * u, v);
  return PseudoQuonPair{TruncatedOperator(std::move(a), "a"), TruncatedOperator(std::move(b), "b"),
                        k_safe};
}

BiorthogonalFamily build_family(const SimilarityOperator& s, const QParam& q, int K) {
  BiorthogonalFamily fam(s, q, make_pair(s, q, K));
  fam.K_ = K;
  fam.k_safe_ = fam.pair_.k_safe;

  const DenseMatrix fwd = s.forward(K);
  const DenseMatrix adj_inv = s.adjoint_inverse(K);
  fam.phi_.reserve(K);
  fam.psi_.reserve(K);
  for (int n = 0; n < K; ++n) {
    fam.phi_.push_back(fwd.col(n));
    fam.psi_.push_back(adj_inv.col(n));
  }

  // Ladder construction from the vacua: phi_n = b phi_{n-1} / beta_{n-1},
  // Psi_n = a^dag Psi_{n-1} / beta_{n-1}.
  const DenseMatrix& b = fam.pair_.b.matrix();
  const DenseMatrix a_dag = fam.pair_.a.matrix().adjoint();
  FockVector phi_it = fam.phi_[0];
  FockVector psi_it = fam.psi_[0];
  double worst = 0.0;
  for (int n = 1; n < fam.k_safe_; ++n) {
    const double bn = beta(q, n - 1);
    if (bn == 0.0) break;  // q = -1: the ladder stops at n = 1
    phi_it = b * phi_it / bn;
    psi_it = a_dag * psi_it / bn;
    worst = std::max({worst, (phi_it - fam.phi_[n]).norm(), (psi_it - fam.psi_[n]).norm()});
  }
  fam.iteration_residual_ = worst;
  return fam;
}

BiorthogonalFamily BiorthogonalFamily::resized(int K) const { return build_family(source_, q_, K); }

double biorthogonality_defect(const BiorthogonalFamily& family) {
  const int K = family.dim();
  double worst = 0.0;
  for (int n = 0; n < K; ++n)
    for (int m = 0; m < K; ++m) {
      const cplx g = inner(family.phi()[n], family.psi()[m]);
      worst = std::max(worst, std::abs(g - (n == m ? 1.0 : 0.0)));
    }
  return worst;
}

double LadderReport::max() const {
  return std::max({raise_phi, lower_phi, raise_psi, lower_psi, vacuum_phi, vacuum_psi});
}

LadderReport check_ladder(const BiorthogonalFamily& family) {
  const auto& q = family.q();
  const DenseMatrix& a = family.pair().a.matrix();
  const DenseMatrix& b = family.pair().b.matrix();
  const DenseMatrix a_dag = a.adjoint();
  const DenseMatrix b_dag = b.adjoint();
  const auto& phi = family.phi();
  const auto& psi = family.psi();

  LadderReport r;
  r.vacuum_phi = (a * phi[0]).norm();
  r.vacuum_psi = (b_dag * psi[0]).norm();
  for (int n = 0; n < family.k_safe(); ++n) {
    const double bn = beta(q, n);
    const double bm = beta(q, n - 1);
    r.raise_phi = std::max(r.raise_phi, (b * phi[n] - bn * phi[n + 1]).norm());
    r.raise_psi = std::max(r.raise_psi, (a_dag * psi[n] - bn * psi[n + 1]).norm());
    const FockVector phi_prev = n ? phi[n - 1] : FockVector::Zero(family.dim());
    const FockVector psi_prev = n ? psi[n - 1] : FockVector::Zero(family.dim());
    r.lower_phi = std::max(r.lower_phi, (a * phi[n] - bm * phi_prev).norm());
    r.lower_psi = std::max(r.lower_psi, (b_dag * psi[n] - bm * psi_prev).norm());
  }
  return r;
}

namespace {

std::vector<cplx> sorted_spectrum(const DenseMatrix& m) {
  Eigen::ComplexEigenSolver<DenseMatrix> solver(m, false);
  if (solver.info() != Eigen::Success) fail(ErrorCode::Convergence, "eigenvalue solver failed");
  std::vector<cplx> ev(solver.eigenvalues().data(),
                       solver.eigenvalues().data() + solver.eigenvalues().size());
  std::sort(ev.begin(), ev.end(), [](cplx x, cplx y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });
  return ev;
}

}  // namespace

NumberReport number_eigencheck(const BiorthogonalFamily& family) {
  const auto& q = family.q();
  const DenseMatrix number = family.pair().b.matrix() * family.pair().a.matrix();
  const DenseMatrix number_dag = number.adjoint();
  NumberReport r;
  const int ks = family.k_safe();
  for (int n = 0; n < ks; ++n) {
    const double ev = beta_sq(q, n - 1);
    r.phi_residual = std::max(r.phi_residual, (number * family.phi()[n] - ev * family.phi()[n]).norm());
    r.psi_residual =
        std::max(r.psi_residual, (number_dag * family.psi()[n] - ev * family.psi()[n]).norm());
  }
  const auto spec = sorted_spectrum(number.topLeftCorner(ks, ks));
  const auto spec_dag = sorted_spectrum(number_dag.topLeftCorner(ks, ks));
  std::vector<double> expected(ks);
  for (int n = 0; n < ks; ++n) expected[n] = beta_sq(q, n - 1);
  std::sort(expected.begin(), expected.end());
  for (int i = 0; i < ks; ++i) {
    r.spectrum_mismatch = std::max(r.spectrum_mismatch, std::abs(spec[i] - spec_dag[i]));
    r.spectrum_vs_beta = std::max(r.spectrum_vs_beta, std::abs(spec[i] - expected[i]));
  }
  return r;
}

ThetaPair build_theta(const BiorthogonalFamily& family) {
  const int K = family.dim();
  DenseMatrix theta = DenseMatrix::Zero(K, K);
  DenseMatrix theta_inv = DenseMatrix::Zero(K, K);
  for (int n = 0; n < K; ++n) {
    theta.noalias() += family.psi()[n] * family.psi()[n].adjoint();
    theta_inv.noalias() += family.phi()[n] * family.phi()[n].adjoint();
  }
  return ThetaPair{TruncatedOperator(std::move(theta), "Theta"),
                   TruncatedOperator(std::move(theta_inv), "Theta_inv")};
}

ThetaReport check_theta(const BiorthogonalFamily& family, const ThetaPair& theta) {
  const int K = family.dim();
  const int ks = family.k_safe();
  const DenseMatrix& t = theta.theta.matrix();
  const DenseMatrix& ti = theta.theta_inverse.matrix();
  ThetaReport r;
  r.hermiticity = (t - t.adjoint()).cwiseAbs().maxCoeff();
  for (int n = 0; n < K; ++n)
    r.maps_phi_to_psi = std::max(r.maps_phi_to_psi, (t * family.phi()[n] - family.psi()[n]).norm());

  const DenseMatrix id = DenseMatrix::Identity(K, K);
  r.inverse_identity = std::max(column_residual(t * ti, id, ks), column_residual(ti * t, id, ks));

  const DenseMatrix s = family.source().forward(K);
  Eigen::FullPivLU<DenseMatrix> lu(s * s.adjoint());
  r.closed_form = (t - lu.inverse()).cwiseAbs().maxCoeff();

  Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(
      (0.5 * (t + t.adjoint())).topLeftCorner(ks, ks), Eigen::EigenvaluesOnly);
  r.min_eigenvalue = eig.eigenvalues().minCoeff();

  const DenseMatrix number = family.pair().b.matrix() * family.pair().a.matrix();
  const DenseMatrix commutator = number.adjoint() * t - t * number;
  for (int n = 0; n < ks; ++n)
    r.intertwining = std::max(r.intertwining, (commutator * family.phi()[n]).norm());
  return r;
}

ConjugateReport check_theta_conjugate(const BiorthogonalFamily& family,
                                      const TruncatedOperator& theta) {
  if (theta.dim() != family.dim()) fail(ErrorCode::DimensionMismatch, "Theta dimension mismatch");
  Eigen::FullPivLU<DenseMatrix> lu(theta.matrix());
  if (!lu.isInvertible()) fail(ErrorCode::Singular, "Theta is singular on the truncation");
  const DenseMatrix conj =
      lu.inverse() * family.pair().b.matrix().adjoint() * theta.matrix();
  ConjugateReport r;
  r.conjugacy = column_residual(family.pair().a.matrix(), conj, family.k_safe());
  for (int n = 0; n < family.dim(); ++n)
    r.psi_equals_theta_phi = std::max(
        r.psi_equals_theta_phi, (theta.matrix() * family.phi()[n] - family.psi()[n]).norm());
  return r;
}

std::pair<cplx, cplx> weak_resolution_check(const BiorthogonalFamily& family, const FockVector& f,
                                            const FockVector& g) {
  if (f.size() != family.dim() || g.size() != family.dim())
    fail(ErrorCode::DimensionMismatch, "weak_resolution_check: vector size mismatch");
  if (last_nonzero(f) >= family.k_safe() || last_nonzero(g) >= family.k_safe())
    fail(ErrorCode::InvalidArgument, "weak_resolution_check: f, g must be supported in the safe block");
  cplx first = 0.0, second = 0.0;
  for (int n = 0; n < family.dim(); ++n) {
    first += inner(f, family.phi()[n]) * inner(family.psi()[n], g);
    second += inner(f, family.psi()[n]) * inner(family.phi()[n], g);
  }
  return {first, second};
}

std::vector<double> norm_growth_probe(const QParam& q, const std::vector<FockVector>& phi) {
  std::vector<double> out;
  for (std::size_t n = 1; n < phi.size(); ++n) {
    const double prev = phi[n - 1].norm(), cur = phi[n].norm();
    if (prev == 0.0 || cur == 0.0) fail(ErrorCode::InvalidArgument, "zero-norm family vector");
    const double ratio = prev / cur;
    out.push_back(beta_sq(q, static_cast<int>(n) - 1) * ratio * ratio);
  }
  return out;
}

nlohmann::json export_family(const BiorthogonalFamily& family) {
  nlohmann::json j;
  j["K"] = family.dim();
  j["q"] = family.q().value();
  j["k_safe"] = family.k_safe();
  j["S"] = family.source().describe();
  auto phi = nlohmann::json::array(), psi = nlohmann::json::array();
  for (int n = 0; n < family.dim(); ++n) {
    phi.push_back(to_json(family.phi()[n]));
    psi.push_back(to_json(family.psi()[n]));
  }
  j["phi"] = std::move(phi);
  j["psi"] = std::move(psi);

  const auto ladder = check_ladder(family);
  const auto number = number_eigencheck(family);
  j["residuals"] = {
      {"biorthogonality", biorthogonality_defect(family)},
      {"iteration", family.iteration_residual()},
      {"qmutator", qmutator_residual(family.pair().a, family.pair().b, family.q(), family.k_safe())},
      {"ladder",
       {{"b_phi", ladder.raise_phi},
        {"a_phi", ladder.lower_phi},
        {"a_dagger_psi", ladder.raise_psi},
        {"b_dagger_psi", ladder.lower_psi}}},
      {"number_eigenvalue_beta_sq", number.phi_residual},
      {"number_dagger_eigenvalue_beta_sq", number.psi_residual},
  };
  return j;
}

}  // namespace quon
