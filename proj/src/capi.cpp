#include "quon/quon.h"

#include <cstring>
#include <memory>
#include <optional>
#include <string>

#include "quon/acceptance.hpp"
#include "quon/bicoherent.hpp"
#include "quon/error.hpp"
#include "quon/positionrep.hpp"
#include "quon/resolution.hpp"
#include "quon/runner.hpp"

struct quon_family {
  quon::BiorthogonalFamily family;
};

struct quon_quadrature {
  quon::RadialQuadrature quad;
};

struct quon_position {
  quon::PositionParams params;
  quon::Grid grid;
  quon::PositionFamily family;
};

namespace {

thread_local std::string last_error;

quon::cplx to_cplx(quon_complex z) { return {z.re, z.im}; }
quon_complex from_cplx(quon::cplx z) { return {z.real(), z.imag()}; }

template <class F>
quon_status guarded(F&& f) {
  last_error.clear();
  try {
    f();
    return QUON_OK;
  } catch (const quon::Error& e) {
    last_error = e.what();
    return static_cast<quon_status>(static_cast<int>(e.code()));
  } catch (const nlohmann::json::exception& e) {
    last_error = std::string("config: ") + e.what();
    return QUON_CONFIG;
  } catch (const std::exception& e) {
    last_error = e.what();
    return QUON_INTERNAL;
  }
}

void require_ptr(const void* p, const char* what) {
  if (!p) quon::fail(quon::ErrorCode::InvalidArgument, std::string(what) + " is NULL");
}

quon::FockVector to_vector(const quon_complex* x, int len) {
  quon::FockVector v(len);
  for (int i = 0; i < len; ++i) v(i) = to_cplx(x[i]);
  return v;
}

std::vector<std::pair<int, quon::cplx>> to_subset(const int* idx, const quon_complex* w, int n) {
  if (n > 0) {
    require_ptr(idx, "subset indices");
    require_ptr(w, "subset weights");
  }
  std::vector<std::pair<int, quon::cplx>> out;
  for (int i = 0; i < n; ++i) out.emplace_back(idx[i], to_cplx(w[i]));
  return out;
}

quon_status make_family(const quon::SimilarityOperator& s, double q, int K, quon_family** out) {
  return guarded([&] {
    require_ptr(out, "out");
    *out = new quon_family{quon::build_family(s, quon::QParam(q), K)};
  });
}

}  // namespace

extern "C" {

const char* quon_last_error(void) { return last_error.c_str(); }
const char* quon_version(void) { return "1.0.0"; }
void quon_string_free(char* s) { delete[] s; }

quon_status quon_beta_sq(double q, int n, double* out) {
  return guarded([&] {
    require_ptr(out, "out");
    *out = quon::beta_sq(quon::QParam(q), n);
  });
}

quon_status quon_q_factorial(double q, int n, double* out) {
  return guarded([&] {
    require_ptr(out, "out");
    *out = quon::q_factorial(quon::QParam(q), n);
  });
}

quon_status quon_log_number_eigenvalue(double q, int n, double* out) {
  return guarded([&] {
    require_ptr(out, "out");
    *out = quon::log_number_eigenvalue(quon::QParam(q), n);
  });
}

quon_status quon_family_identity(double q, int K, quon_family** out) {
  return make_family(quon::SimilarityOperator::identity(), q, K, out);
}

quon_status quon_family_rank_one(double q, int K, const quon_complex* u, const quon_complex* v,
                                 int len, quon_complex alpha, quon_family** out) {
  std::optional<quon::SimilarityOperator> s;
  const auto st = guarded([&] {
    require_ptr(u, "u");
    require_ptr(v, "v");
    if (len < 1) quon::fail(quon::ErrorCode::InvalidArgument, "len must be positive");
    s = quon::SimilarityOperator::rank_one(
        quon::RankOneDeformation::from_alpha(to_vector(u, len), to_vector(v, len), to_cplx(alpha)));
  });
  return st != QUON_OK ? st : make_family(*s, q, K, out);
}

quon_status quon_family_subsets(double q, int K, const int* idx0, const quon_complex* w0, int n0,
                                const int* idx1, const quon_complex* w1, int n1, const int* idx2,
                                const quon_complex* w2, int n2, quon_complex alpha,
                                quon_family** out) {
  std::optional<quon::SimilarityOperator> s;
  const auto st = guarded([&] {
    const quon::SubsetConfiguration cfg{to_subset(idx0, w0, n0), to_subset(idx1, w1, n1),
                                        to_subset(idx2, w2, n2)};
    cfg.validate();
    if (cfg.support_max() >= K)
      quon::fail(quon::ErrorCode::DimensionMismatch, "subset index exceeds the truncation");
    s = quon::SimilarityOperator::rank_one(
        quon::RankOneDeformation::from_alpha(cfg.u(K), cfg.v(K), to_cplx(alpha)));
  });
  return st != QUON_OK ? st : make_family(*s, q, K, out);
}

void quon_family_free(quon_family* family) { delete family; }
int quon_family_dim(const quon_family* family) { return family ? family->family.dim() : 0; }
int quon_family_k_safe(const quon_family* family) { return family ? family->family.k_safe() : 0; }

quon_status quon_family_vector(const quon_family* family, int which, int n, quon_complex* out,
                               int len) {
  return guarded([&] {
    require_ptr(family, "family");
    require_ptr(out, "out");
    const auto& vecs = which == 0 ? family->family.phi() : family->family.psi();
    if (which != 0 && which != 1) quon::fail(quon::ErrorCode::InvalidArgument, "which must be 0 or 1");
    if (n < 0 || n >= static_cast<int>(vecs.size()))
      quon::fail(quon::ErrorCode::InvalidArgument, "index outside the family");
    if (len < vecs[n].size()) quon::fail(quon::ErrorCode::DimensionMismatch, "output too short");
    for (int i = 0; i < vecs[n].size(); ++i) out[i] = from_cplx(vecs[n](i));
  });
}

quon_status quon_family_operator(const quon_family* family, int which, quon_complex* out, int len) {
  return guarded([&] {
    require_ptr(family, "family");
    require_ptr(out, "out");
    if (which != 0 && which != 1) quon::fail(quon::ErrorCode::InvalidArgument, "which must be 0 or 1");
    const auto& m = (which == 0 ? family->family.pair().a : family->family.pair().b).matrix();
    if (len < m.size()) quon::fail(quon::ErrorCode::DimensionMismatch, "output too short");
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j) out[i * m.cols() + j] = from_cplx(m(i, j));
  });
}

quon_status quon_family_check(const quon_family* family, quon_family_report* out) {
  return guarded([&] {
    require_ptr(family, "family");
    require_ptr(out, "out");
    const auto& f = family->family;
    const auto number = quon::number_eigencheck(f);
    const auto theta = quon::build_theta(f);
    const auto tr = quon::check_theta(f, theta);
    const auto conj = quon::check_theta_conjugate(f, theta.theta);
    out->qmutator = quon::qmutator_residual(f.pair().a, f.pair().b, f.q(), f.k_safe());
    out->biorthogonality = quon::biorthogonality_defect(f);
    out->ladder = quon::check_ladder(f).max();
    out->number = std::max(number.phi_residual, number.psi_residual);
    out->spectra = std::max(number.spectrum_mismatch, number.spectrum_vs_beta);
    out->theta_closed_form = tr.closed_form;
    out->theta_conjugacy = std::max(conj.conjugacy, conj.psi_equals_theta_phi);
    out->theta_inverse = tr.inverse_identity;
    out->theta_min_eigenvalue = tr.min_eigenvalue;
  });
}

quon_status quon_bicoherent(const quon_family* family, quon_complex z, quon_bicoherent_report* out) {
  return guarded([&] {
    require_ptr(family, "family");
    require_ptr(out, "out");
    const auto st = quon::bicoherent_states(family->family, to_cplx(z));
    const auto [ea, eb] = quon::eigen_check(st, family->family);
    const auto u = quon::uncertainty_product(family->family, to_cplx(z));
    out->norm_const = st.norm_const;
    out->eigen_a = ea;
    out->eigen_b_dagger = eb;
    out->pairing = from_cplx(quon::pairing(st));
    out->uncertainty_product = from_cplx(u.product);
    out->predicted_uncertainty = u.predicted;
    out->rho = quon::fock_family_radius(family->family);
  });
}

quon_status quon_quadrature_solve(double q, double rho, int k_mom, quon_quadrature** out) {
  return guarded([&] {
    require_ptr(out, "out");
    *out = new quon_quadrature{quon::solve_moment_measure(quon::QParam(q), rho, k_mom)};
  });
}

void quon_quadrature_free(quon_quadrature* quad) { delete quad; }
int quon_quadrature_size(const quon_quadrature* quad) {
  return quad ? static_cast<int>(quad->quad.nodes.size()) : 0;
}
int quon_quadrature_feasible(const quon_quadrature* quad) { return quad && quad->quad.feasible; }
double quon_quadrature_max_residual(const quon_quadrature* quad) {
  return quad ? quad->quad.max_residual() : -1.0;
}

quon_status quon_quadrature_nodes(const quon_quadrature* quad, double* r, double* w, int len) {
  return guarded([&] {
    require_ptr(quad, "quadrature");
    const auto& qd = quad->quad;
    if (len < static_cast<int>(qd.nodes.size()))
      quon::fail(quon::ErrorCode::DimensionMismatch, "output too short");
    for (std::size_t j = 0; j < qd.nodes.size(); ++j) {
      if (r) r[j] = qd.nodes[j];
      if (w) w[j] = qd.weights[j];
    }
  });
}

quon_status quon_resolution_check(const quon_family* family, const quon_quadrature* quad,
                                  int n_theta, const quon_complex* f, const quon_complex* g,
                                  int len, quon_complex* out) {
  return guarded([&] {
    require_ptr(family, "family");
    require_ptr(quad, "quadrature");
    require_ptr(f, "f");
    require_ptr(g, "g");
    require_ptr(out, "out");
    const int K = family->family.dim();
    if (len > K) quon::fail(quon::ErrorCode::DimensionMismatch, "vectors longer than the truncation");
    quon::FockVector ff = quon::FockVector::Zero(K), gg = quon::FockVector::Zero(K);
    ff.head(len) = to_vector(f, len);
    gg.head(len) = to_vector(g, len);
    *out = from_cplx(quon::resolution_check(family->family, quad->quad, n_theta, ff, gg));
  });
}

quon_status quon_position_create(double q, double gamma, int n_max, quon_position** out) {
  return guarded([&] {
    require_ptr(out, "out");
    if (n_max < 0) quon::fail(quon::ErrorCode::InvalidArgument, "n_max must be nonnegative");
    const auto p = quon::PositionParams::make(q, gamma);
    *out = new quon_position{p, quon::Grid::for_gamma(gamma), quon::build_position_family(p, n_max)};
  });
}

void quon_position_free(quon_position* pos) { delete pos; }

quon_status quon_position_ladder(const quon_position* pos, double* out) {
  return guarded([&] {
    require_ptr(pos, "position");
    require_ptr(out, "out");
    *out = quon::position_ladder_check(pos->family, pos->grid).max();
  });
}

quon_status quon_position_norm_formula(const quon_position* pos, double* max_relative,
                                       int* bound_holds) {
  return guarded([&] {
    require_ptr(pos, "position");
    const int n_max = static_cast<int>(pos->family.phi.size()) - 1;
    const auto rep = quon::norm_formula_check(pos->params, n_max, pos->grid);
    if (max_relative) *max_relative = rep.max_relative;
    if (bound_holds) *bound_holds = rep.bound_holds ? 1 : 0;
  });
}

int quon_position_grid_size(const quon_position* pos) { return pos ? pos->grid.n_pts : 0; }

quon_status quon_position_sample(const quon_position* pos, int which, int n, double* x,
                                 quon_complex* values, int len) {
  return guarded([&] {
    require_ptr(pos, "position");
    if (which != 0 && which != 1) quon::fail(quon::ErrorCode::InvalidArgument, "which must be 0 or 1");
    const auto& fs = which == 0 ? pos->family.phi : pos->family.psi;
    if (n < 0 || n >= static_cast<int>(fs.size()))
      quon::fail(quon::ErrorCode::InvalidArgument, "index outside the family");
    if (len < pos->grid.n_pts) quon::fail(quon::ErrorCode::DimensionMismatch, "output too short");
    const auto s = fs[n].sample(pos->grid);
    for (int i = 0; i < pos->grid.n_pts; ++i) {
      if (x) x[i] = pos->grid.x(i);
      if (values) values[i] = from_cplx(s.values[i]);
    }
  });
}

quon_status quon_run_config(const char* config_json, const char* out_dir, int64_t seed,
                            double tolerance_scale, int* exit_code, char** summary_json) {
  return guarded([&] {
    require_ptr(config_json, "config");
    require_ptr(exit_code, "exit_code");
    if (!(tolerance_scale > 0.0))
      quon::fail(quon::ErrorCode::Config, "tolerance scale must be positive");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::parse_error& e) {
      quon::fail(quon::ErrorCode::Config, std::string("$: invalid JSON: ") + e.what());
    }
    const auto config = quon::parse_config(j);
    quon::RunOptions options;
    options.write_files = out_dir != nullptr;
    if (out_dir) options.out_dir = out_dir;
    if (seed >= 0) options.seed = static_cast<std::uint64_t>(seed);
    options.tolerance_scale = tolerance_scale;
    const auto outcome = quon::run_experiment(config, options);
    *exit_code = outcome.exit_code;
    if (summary_json) {
      const std::string s = outcome.summary.dump(2);
      *summary_json = new char[s.size() + 1];
      std::memcpy(*summary_json, s.c_str(), s.size() + 1);
    }
    if (outcome.exit_code != 0) {
      std::string msg = "tolerance failure:";
      for (const auto& f : outcome.failures) msg += " " + f;
      last_error = msg;
    }
  });
}

int quon_criterion_count(void) { return quon::kCriterionCount; }

int quon_selftest(int id, quon_criterion_callback callback, void* user) {
  if (id < 0 || id > quon::kCriterionCount) {
    last_error = "criterion id out of range";
    return -1;
  }
  int failed = 0;
  const int first = id == 0 ? 1 : id, last = id == 0 ? quon::kCriterionCount : id;
  for (int k = first; k <= last; ++k) {
    const auto r = quon::run_criterion(k);
    if (!r.passed) ++failed;
    if (callback) callback(r.id, r.name.c_str(), r.passed ? 1 : 0, r.detail.c_str(), user);
  }
  return failed;
}

}  // extern "C"
