#include "quon/bicoherent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "quon/error.hpp"

namespace quon {

namespace {

void require_bicoherent_q(const QParam& q, const char* where) {
  if (!(q.value() > 0.0 && q.value() <= 1.0)) {
    std::ostringstream os;
    os << where << ": q = " << q.value() << " outside (0, 1]";
    fail(ErrorCode::Domain, os.str());
  }
}

double disc_radius(const QParam& q) {
  return q.value() == 1.0 ? std::numeric_limits<double>::infinity()
                          : 1.0 / std::sqrt(1.0 - q.value());
}

// Geometric bound on sum_{k >= n} t_k given t_n and the (decreasing) ratio
// t_{k+1}/t_k <= ratio for k >= n.
double geometric_tail(double t_n, double ratio) {
  if (ratio >= 1.0) return std::numeric_limits<double>::infinity();
  return t_n / (1.0 - ratio);
}

// Terms for the vector series sum z^k/beta_{k-1}! x_k with ||x_k|| <= bound,
// chosen so that the dropped part is below target. Returns {terms, tail}.
std::pair<int, double> vector_series_terms(const QParam& q, double r, double bound,
                                           double norm_const, double target) {
  double t = 1.0;  // r^k / beta_{k-1}!
  for (int k = 0; k < kMaxSeriesTerms; ++k) {
    // t currently holds the k-th term; ratio to the next is r / beta_k.
    const double ratio = r / beta(q, k);
    const double tail = norm_const * bound * geometric_tail(t, ratio);
    if (tail < target) return {k, tail};
    t *= ratio;
  }
  std::ostringstream os;
  os << "bi-coherent series at |z| = " << r << " needs more than " << kMaxSeriesTerms << " terms";
  fail(ErrorCode::Convergence, os.str());
}

}  // namespace

Normalization normalization(const QParam& q, double r, int terms, double tail_target) {
  require_bicoherent_q(q, "normalization");
  if (r < 0.0 || !(r < disc_radius(q))) {
    std::ostringstream os;
    os << "normalization: |z| = " << r << " outside the disc of radius " << disc_radius(q);
    fail(ErrorCode::Domain, os.str());
  }
  if (terms < 1) fail(ErrorCode::InvalidArgument, "normalization needs at least one term");
  const double r2 = r * r;
  double t = 1.0, sum = 0.0;
  for (int k = 0; k < terms; ++k) {
    sum += t;
    t *= r2 / beta_sq(q, k);
  }
  // t is now the first dropped term; later ratios are below r^2 / beta_terms^2.
  const double tail = geometric_tail(t, r2 / beta_sq(q, terms));
  if (!(tail <= tail_target * sum)) {
    std::ostringstream os;
    os << "normalization: " << terms << " terms leave relative tail " << tail / sum << " at r = " << r;
    fail(ErrorCode::Convergence, os.str());
  }
  return Normalization{1.0 / std::sqrt(sum), tail, terms};
}

Normalization normalization_adaptive(const QParam& q, double r, double tail_target) {
  require_bicoherent_q(q, "normalization");
  if (r < 0.0 || !(r < disc_radius(q))) {
    std::ostringstream os;
    os << "normalization: |z| = " << r << " outside the disc of radius " << disc_radius(q);
    fail(ErrorCode::Domain, os.str());
  }
  const double r2 = r * r;
  double t = 1.0, sum = 0.0;
  for (int k = 0; k < kMaxSeriesTerms; ++k) {
    sum += t;
    t *= r2 / beta_sq(q, k);
    const double tail = geometric_tail(t, r2 / beta_sq(q, k + 1));
    if (tail <= tail_target * sum) return Normalization{1.0 / std::sqrt(sum), tail, k + 1};
  }
  fail(ErrorCode::Convergence, "normalization: term cap reached");
}

std::vector<cplx> coherent_coefficients(const QParam& q, cplx z, int terms) {
  std::vector<cplx> c(terms);
  cplx t = 1.0;
  for (int k = 0; k < terms; ++k) {
    c[k] = t;
    t *= z / beta(q, k);
  }
  return c;
}

FockVector quon_coherent_state(const QParam& q, cplx z, int terms, int dim, double norm_const) {
  if (terms > dim) fail(ErrorCode::DimensionMismatch, "coherent state: terms exceed dimension");
  FockVector e = FockVector::Zero(dim);
  const auto c = coherent_coefficients(q, z, terms);
  for (int k = 0; k < terms; ++k) e(k) = norm_const * c[k];
  return e;
}

double fock_family_radius(const BiorthogonalFamily& family) {
  // Bounded similarities give ||phi_n|| <= ||S||: M_n = r = 1, so the radius
  // is that of N(|z|) itself.
  return disc_radius(family.q());
}

BiCoherentState bicoherent_states(const BiorthogonalFamily& family, cplx z, int extra_dim) {
  const QParam& q = family.q();
  require_bicoherent_q(q, "bicoherent_states");
  const double r = std::abs(z);
  const double rho = fock_family_radius(family);
  if (!(r < rho)) {
    std::ostringstream os;
    os << "bicoherent_states: |z| = " << r << " not below rho = " << rho;
    fail(ErrorCode::Domain, os.str());
  }
  const auto norm = normalization_adaptive(q, r);
  const auto& s = family.source();
  const double bound = std::max(s.norm_bound(), s.inverse_norm_bound());
  const auto [terms, tail] = vector_series_terms(q, r, bound, norm.value, 1e-16);

  const int needed = std::max(terms, 1);
  const int dim = std::max({needed + 4 + extra_dim, s.extent() + 6 + extra_dim, family.dim()});

  BiCoherentState st;
  st.z = z;
  st.q = q.value();
  st.terms = needed;
  st.dim = dim;
  st.norm_const = norm.value;
  st.tail_bound = tail;
  const FockVector e = quon_coherent_state(q, z, needed, dim, norm.value);
  // phi(z) = sum c_k S e_k = S e(z) and Psi(z) = (S^dag)^{-1} e(z).
  st.phi_z = s.forward(dim) * e;
  st.psi_z = s.adjoint_inverse(dim) * e;
  return st;
}

std::pair<double, double> eigen_check(const BiCoherentState& state, const TruncatedOperator& a,
                                      const TruncatedOperator& b) {
  if (a.dim() != state.dim || b.dim() != state.dim)
    fail(ErrorCode::DimensionMismatch, "eigen_check: operator and state dimensions differ");
  const double ra = (a.apply(state.phi_z) - state.z * state.phi_z).norm();
  const double rb = (b.matrix().adjoint() * state.psi_z - state.z * state.psi_z).norm();
  return {ra, rb};
}

std::pair<double, double> eigen_check(const BiCoherentState& state,
                                      const BiorthogonalFamily& family) {
  const auto pair = make_pair(family.source(), family.q(), state.dim);
  return eigen_check(state, pair.a, pair.b);
}

cplx pairing(const BiCoherentState& state) { return inner(state.phi_z, state.psi_z); }

std::pair<FockVector, FockVector> closed_form_riesz_states(const SubsetConfiguration& config,
                                                           cplx alpha, const QParam& q, cplx z,
                                                           int terms, int dim) {
  config.validate();
  const cplx beta_def = -alpha / (1.0 + alpha);
  const double n = normalization_adaptive(q, std::abs(z)).value;
  const auto coeff = coherent_coefficients(q, z, std::max(terms, config.support_max() + 1));

  // Gamma_1 runs over I_0 u I_1, Gamma_2 over I_0 u I_2.
  auto gamma_sum = [&](const std::vector<std::pair<int, cplx>>& extra) {
    cplx s = 0.0;
    for (const auto* set : {&config.set0, &extra})
      for (const auto& [k, w] : *set) s += coeff[k] * std::conj(w);
    return s;
  };
  const cplx gamma1 = gamma_sum(config.set1);
  const cplx gamma2 = gamma_sum(config.set2);

  const FockVector e = quon_coherent_state(q, z, terms, dim, n);
  FockVector phi = e + alpha * n * gamma1 * config.v(dim);
  FockVector psi = e + std::conj(beta_def) * n * gamma2 * config.u(dim);
  return {std::move(phi), std::move(psi)};
}

UncertaintyResult uncertainty_product(const BiorthogonalFamily& family, cplx z) {
  const auto st = bicoherent_states(family, z, 4);
  const auto pair = make_pair(family.source(), family.q(), st.dim);
  const DenseMatrix& a = pair.a.matrix();
  const DenseMatrix& b = pair.b.matrix();
  const double s2 = std::sqrt(2.0);
  const DenseMatrix Q = (b + a) / s2;
  const DenseMatrix P = cplx(0.0, 1.0) * (b - a) / s2;

  auto expect = [&](const FockVector& v) { return inner(st.psi_z, v); };
  const FockVector q1 = Q * st.phi_z, p1 = P * st.phi_z;
  const cplx var_q = expect(Q * q1) - std::pow(expect(q1), 2);
  const cplx var_p = expect(P * p1) - std::pow(expect(p1), 2);

  UncertaintyResult out;
  out.delta_q = std::sqrt(var_q);
  out.delta_p = std::sqrt(var_p);
  out.product = out.delta_q * out.delta_p;
  out.predicted = 0.5 * (std::norm(z) * (family.q().value() - 1.0) + 1.0);
  return out;
}

std::string to_string(GrowthKind kind) {
  switch (kind) {
    case GrowthKind::Constant: return "constant";
    case GrowthKind::Geometric: return "geometric";
    case GrowthKind::QFactorial: return "q_factorial";
  }
  return "?";
}

FitPolicy FitPolicy::bounded(double s_norm, double s_inv_norm) {
  FitPolicy p;
  p.kind = Kind::BoundedSimilarity;
  p.s_norm = s_norm;
  p.s_inv_norm = s_inv_norm;
  return p;
}

FitPolicy FitPolicy::position(double gamma) {
  FitPolicy p;
  p.kind = Kind::PositionAnalytic;
  p.gamma = gamma;
  return p;
}

FitPolicy FitPolicy::generic() { return FitPolicy{}; }

namespace {

double side_rho(const QParam& q, double M_limit, double r) {
  const double base = 1.0 / std::sqrt(1.0 - q.value());
  return std::min(base, M_limit / r * base);
}

// Least-squares line through (k, y_k) for k in [first, y.size()).
std::pair<double, double> fit_line(const std::vector<double>& y, std::size_t first) {
  const double n = static_cast<double>(y.size() - first);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = first; k < y.size(); ++k) {
    const double x = static_cast<double>(k);
    sx += x;
    sy += y[k];
    sxx += x * x;
    sxy += x * y[k];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {slope, (sy - slope * sx) / n};
}

// log ||phi_n|| <= log A + n log r + log M_n, for each admissible M_n.
SideRadius generic_side(const std::vector<double>& norms, const QParam& q) {
  const std::size_t n = norms.size();
  SideRadius best;
  double best_err = std::numeric_limits<double>::infinity();
  for (GrowthKind kind : {GrowthKind::Constant, GrowthKind::QFactorial}) {
    std::vector<double> y(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double log_m = kind == GrowthKind::QFactorial ? std::log(q_factorial(q, static_cast<int>(k))) : 0.0;
      y[k] = std::log(norms[k]) - log_m;
    }
    const auto [slope, icpt] = fit_line(y, 0);
    double shift = 0.0, err = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double d = y[k] - (icpt + slope * static_cast<double>(k));
      shift = std::max(shift, d);
      err += d * d;
    }
    if (err < best_err) {
      best_err = err;
      best.growth = kind;
      best.r = std::exp(slope);
      best.A = std::exp(icpt + shift);
      // M_n = beta_n! has M_n / M_{n+1} -> sqrt(1-q).
      best.M_limit = kind == GrowthKind::QFactorial ? std::sqrt(1.0 - q.value()) : 1.0;
    }
  }
  // A geometric M_n = M^n is absorbed into r; report it as such when r != 1.
  if (best.growth == GrowthKind::Constant && std::abs(best.r - 1.0) > 1e-3) {
    best.growth = GrowthKind::Geometric;
    best.M_limit = 1.0 / best.r;
    best.r = 1.0;
  }
  return best;
}

}  // namespace

double empirical_radius(const std::vector<double>& norms, const QParam& q) {
  if (norms.size() < 16) fail(ErrorCode::InvalidArgument, "empirical_radius needs >= 16 samples");
  std::vector<double> y(norms.size());
  double log_fact = 0.0;  // log beta_{k-1}!
  for (std::size_t k = 0; k < norms.size(); ++k) {
    if (k >= 2) log_fact += std::log(beta(q, static_cast<int>(k) - 1));
    y[k] = std::log(norms[k]) - log_fact;
  }
  const auto [slope, icpt] = fit_line(y, norms.size() / 2);
  (void)icpt;
  return std::exp(-slope);
}

RadiusReport radius_report(const std::vector<double>& phi_norms,
                           const std::vector<double>& psi_norms, const QParam& q,
                           const FitPolicy& policy) {
  q.require_open_unit("radius_report");
  if (phi_norms.size() < 16 || psi_norms.size() < 16)
    fail(ErrorCode::InvalidArgument, "radius_report needs at least 16 norm samples");
  for (const auto* v : {&phi_norms, &psi_norms})
    for (double x : *v)
      if (!(x > 0.0)) fail(ErrorCode::InvalidArgument, "radius_report: norms must be positive");

  RadiusReport rep;
  switch (policy.kind) {
    case FitPolicy::Kind::BoundedSimilarity:
      rep.phi = SideRadius{policy.s_norm, 1.0, 1.0, GrowthKind::Constant, 0, 0};
      rep.psi = SideRadius{policy.s_inv_norm, 1.0, 1.0, GrowthKind::Constant, 0, 0};
      break;
    case FitPolicy::Kind::PositionAnalytic: {
      // A = e^{gamma^2/2}, r = 1/sqrt(1-q), M_n = (n+1) sqrt([n]!), M = sqrt(1-q).
      const SideRadius side{std::exp(0.5 * policy.gamma * policy.gamma),
                            1.0 / std::sqrt(1.0 - q.value()), std::sqrt(1.0 - q.value()),
                            GrowthKind::QFactorial, 0, 0};
      rep.phi = side;
      rep.psi = side;
      break;
    }
    case FitPolicy::Kind::Generic:
      rep.phi = generic_side(phi_norms, q);
      rep.psi = generic_side(psi_norms, q);
      break;
  }
  rep.phi.rho = side_rho(q, rep.phi.M_limit, rep.phi.r);
  rep.psi.rho = side_rho(q, rep.psi.M_limit, rep.psi.r);
  rep.rho = std::min(rep.phi.rho, rep.psi.rho);
  rep.phi.empirical_rho = empirical_radius(phi_norms, q);
  rep.psi.empirical_rho = empirical_radius(psi_norms, q);
  rep.empirical_rho = std::min(rep.phi.empirical_rho, rep.psi.empirical_rho);
  return rep;
}

}  // namespace quon
