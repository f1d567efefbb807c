#include "quon/runner.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <random>
#include <sstream>

#include "quon/bicoherent.hpp"
#include "quon/error.hpp"
#include "quon/positionrep.hpp"
#include "quon/resolution.hpp"

namespace quon {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& path, const std::string& what) {
  fail(ErrorCode::Config, path + ": " + what);
}

const json& require(const json& j, const char* key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) config_error(path + "." + key, "missing field");
  return j.at(key);
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) config_error(path, "expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) config_error(path, "must be finite");
  return x;
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) config_error(path, "expected an integer");
  return j.get<int>();
}

cplx as_complex(const json& j, const std::string& path) {
  if (j.is_number()) return {as_number(j, path), 0.0};
  if (!j.is_array() || j.size() != 2) config_error(path, "expected [re, im]");
  return {as_number(j[0], path + "[0]"), as_number(j[1], path + "[1]")};
}

std::vector<cplx> as_complex_list(const json& j, const std::string& path) {
  if (!j.is_array()) config_error(path, "expected an array of [re, im]");
  std::vector<cplx> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(as_complex(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

// [[index, re, im], ...]
std::vector<std::pair<int, cplx>> as_subset(const json& j, const std::string& path) {
  if (!j.is_array()) config_error(path, "expected an array of [index, re, im]");
  std::vector<std::pair<int, cplx>> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    if (!j[i].is_array() || j[i].size() != 3) config_error(p, "expected [index, re, im]");
    out.emplace_back(as_int(j[i][0], p + "[0]"),
                     cplx(as_number(j[i][1], p + "[1]"), as_number(j[i][2], p + "[2]")));
  }
  return out;
}

FamilySpec parse_family(const json& j, const std::string& path) {
  if (j.is_string()) {
    const auto kind = j.get<std::string>();
    if (kind == "identity") return IdentityFamilySpec{};
    config_error(path, "unknown family '" + kind + "' (only identity may be given as a string)");
  }
  const auto kind_json = require(j, "kind", path);
  if (!kind_json.is_string()) config_error(path + ".kind", "expected a string");
  const auto kind = kind_json.get<std::string>();
  if (kind == "identity") return IdentityFamilySpec{};
  if (kind == "position") {
    PositionFamilySpec spec;
    if (j.contains("gamma")) spec.gamma = as_number(j["gamma"], path + ".gamma");
    return spec;
  }
  if (kind == "rank_one") {
    RankOneFamilySpec spec;
    spec.alpha_def = as_complex(require(j, "alpha_def", path), path + ".alpha_def");
    if (j.contains("subsets")) {
      const auto& s = j["subsets"];
      const std::string sp = path + ".subsets";
      SubsetConfiguration cfg{as_subset(require(s, "set0", sp), sp + ".set0"),
                              as_subset(require(s, "set1", sp), sp + ".set1"),
                              as_subset(require(s, "set2", sp), sp + ".set2")};
      spec.subsets = cfg;
    } else {
      spec.u = as_complex_list(require(j, "u", path), path + ".u");
      spec.v = as_complex_list(require(j, "v", path), path + ".v");
    }
    return spec;
  }
  config_error(path + ".kind", "unknown family kind '" + kind + "'");
}

TaskKind parse_task_kind(const std::string& name, const std::string& path) {
  if (name == "mutator") return TaskKind::Mutator;
  if (name == "family") return TaskKind::Family;
  if (name == "theta") return TaskKind::Theta;
  if (name == "bicoherent") return TaskKind::Bicoherent;
  if (name == "resolution") return TaskKind::Resolution;
  if (name == "position") return TaskKind::Position;
  config_error(path, "unknown task '" + name + "'");
}

TaskSpec parse_task(const json& j, const std::string& path) {
  TaskSpec t;
  if (j.is_string()) {
    t.kind = parse_task_kind(j.get<std::string>(), path);
  } else {
    const auto& name = require(j, "task", path);
    if (!name.is_string()) config_error(path + ".task", "expected a string");
    t.kind = parse_task_kind(name.get<std::string>(), path + ".task");
  }
  t.z_grid.radius_fractions = {0.1, 0.3, 0.5, 0.7, 0.9};
  if (!j.is_object()) return t;
  if (j.contains("z_grid")) {
    const auto& g = j["z_grid"];
    const std::string gp = path + ".z_grid";
    if (g.contains("radius_fractions")) {
      const auto& rf = g["radius_fractions"];
      if (!rf.is_array()) config_error(gp + ".radius_fractions", "expected an array");
      t.z_grid.radius_fractions.clear();
      for (std::size_t i = 0; i < rf.size(); ++i)
        t.z_grid.radius_fractions.push_back(
            as_number(rf[i], gp + ".radius_fractions[" + std::to_string(i) + "]"));
    }
    if (g.contains("n_angles")) t.z_grid.n_angles = as_int(g["n_angles"], gp + ".n_angles");
    if (g.contains("points")) t.z_grid.points = as_complex_list(g["points"], gp + ".points");
  }
  if (j.contains("K_mom")) t.k_mom = as_int(j["K_mom"], path + ".K_mom");
  if (j.contains("n_theta")) t.n_theta = as_int(j["n_theta"], path + ".n_theta");
  if (j.contains("n_pairs")) t.n_pairs = as_int(j["n_pairs"], path + ".n_pairs");
  if (j.contains("n_max")) t.n_max = as_int(j["n_max"], path + ".n_max");
  return t;
}

const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> tol{
      {"mutator.qmutator", 1e-12},
      {"family.biorthogonality", 1e-11},
      {"family.iteration", 1e-11},
      {"family.ladder", 1e-11},
      {"family.number", 1e-11},
      {"family.spectra", 1e-9},
      {"theta.closed_form", 1e-11},
      {"theta.maps_phi_to_psi", 1e-10},
      {"theta.conjugacy", 1e-10},
      {"theta.inverse", 1e-11},
      {"theta.hermiticity", 1e-12},
      {"bicoherent.eigen", 1e-9},
      {"bicoherent.pairing", 1e-9},
      {"bicoherent.uncertainty", 1e-7},
      {"bicoherent.closed_form", 1e-10},
      {"resolution.moments", 1e-10},
      {"resolution.identity", 1e-8},
      {"position.ladder", 1e-10},
      {"position.qmutator", 1e-10},
      {"position.norm_formula", 1e-6},
      {"position.phi_psi_gap", 1e-6},
      {"position.theta_conjugacy", 1e-10},
  };
  return tol;
}

bool is_fock(const FamilySpec& f) { return !std::holds_alternative<PositionFamilySpec>(f); }

struct Metric {
  std::string name;
  double value;
  double tolerance;
  bool lower_bound = false;  // pass when value > tolerance instead of value < tolerance
  bool passed() const {
    if (std::isnan(value)) return false;
    return lower_bound ? value > tolerance : value < tolerance;
  }
};

struct Artifact {
  std::string file;
  std::string content;
};

struct TaskResult {
  std::string name;
  std::vector<Metric> metrics;
  std::vector<Artifact> artifacts;
  json extra = json::object();
  std::string error;
  double seconds = 0.0;
};

class Tolerances {
 public:
  Tolerances(const std::map<std::string, double>& overrides, double scale)
      : overrides_(overrides), scale_(scale) {}
  double operator()(const std::string& key) const {
    auto it = overrides_.find(key);
    const double base = it != overrides_.end() ? it->second : default_tolerances().at(key);
    return base * scale_;
  }

 private:
  const std::map<std::string, double>& overrides_;
  double scale_;
};

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

std::string matrix_csv(const TruncatedOperator& op) {
  std::ostringstream os;
  op.write_csv(os);
  return os.str();
}

SimilarityOperator make_similarity(const ExperimentConfig& c) {
  if (std::holds_alternative<IdentityFamilySpec>(c.family)) return SimilarityOperator::identity();
  const auto& spec = std::get<RankOneFamilySpec>(c.family);
  FockVector u, v;
  if (spec.subsets) {
    u = spec.subsets->u(c.K);
    v = spec.subsets->v(c.K);
  } else {
    u = Eigen::Map<const FockVector>(spec.u.data(), static_cast<Eigen::Index>(spec.u.size()));
    v = Eigen::Map<const FockVector>(spec.v.data(), static_cast<Eigen::Index>(spec.v.size()));
  }
  return SimilarityOperator::rank_one(RankOneDeformation::from_alpha(u, v, spec.alpha_def));
}

TaskResult run_mutator(const BiorthogonalFamily& fam, const Tolerances& tol) {
  TaskResult r{"mutator", {}, {}, json::object(), "", 0.0};
  const auto& p = fam.pair();
  r.metrics.push_back({"qmutator", qmutator_residual(p.a, p.b, fam.q(), p.k_safe),
                       tol("mutator.qmutator")});
  r.extra["k_safe"] = p.k_safe;
  r.artifacts.push_back({"mutator_a.csv", matrix_csv(p.a)});
  r.artifacts.push_back({"mutator_b.csv", matrix_csv(p.b)});
  return r;
}

TaskResult run_family(const BiorthogonalFamily& fam, const Tolerances& tol) {
  TaskResult r{"family", {}, {}, json::object(), "", 0.0};
  const auto ladder = check_ladder(fam);
  const auto number = number_eigencheck(fam);
  r.metrics.push_back({"biorthogonality", biorthogonality_defect(fam), tol("family.biorthogonality")});
  r.metrics.push_back({"iteration", fam.iteration_residual(), tol("family.iteration")});
  r.metrics.push_back({"ladder", ladder.max(), tol("family.ladder")});
  r.metrics.push_back({"number", std::max(number.phi_residual, number.psi_residual),
                       tol("family.number")});
  r.metrics.push_back({"spectra", std::max(number.spectrum_mismatch, number.spectrum_vs_beta),
                       tol("family.spectra")});
  r.artifacts.push_back({"family.json", export_family(fam).dump(1) + "\n"});
  return r;
}

TaskResult run_theta(const BiorthogonalFamily& fam, const Tolerances& tol) {
  TaskResult r{"theta", {}, {}, json::object(), "", 0.0};
  const auto theta = build_theta(fam);
  const auto rep = check_theta(fam, theta);
  const auto conj = check_theta_conjugate(fam, theta.theta);
  r.metrics.push_back({"closed_form", rep.closed_form, tol("theta.closed_form")});
  r.metrics.push_back({"maps_phi_to_psi", std::max(rep.maps_phi_to_psi, conj.psi_equals_theta_phi),
                       tol("theta.maps_phi_to_psi")});
  r.metrics.push_back({"conjugacy", conj.conjugacy, tol("theta.conjugacy")});
  r.metrics.push_back({"inverse", rep.inverse_identity, tol("theta.inverse")});
  r.metrics.push_back({"hermiticity", rep.hermiticity, tol("theta.hermiticity")});
  r.metrics.push_back({"min_eigenvalue", rep.min_eigenvalue, 0.0, true});
  r.extra["intertwining"] = rep.intertwining;
  r.artifacts.push_back({"theta.csv", matrix_csv(theta.theta)});
  return r;
}

TaskResult run_bicoherent(const ExperimentConfig& c, const TaskSpec& t,
                          const BiorthogonalFamily& fam, const Tolerances& tol) {
  TaskResult r{"bicoherent", {}, {}, json::object(), "", 0.0};
  const double rho = fock_family_radius(fam);
  std::vector<cplx> zs;
  const double two_pi = 2.0 * std::acos(-1.0);
  for (double f : t.z_grid.radius_fractions)
    for (int m = 0; m < t.z_grid.n_angles; ++m)
      zs.push_back(std::polar(f * rho, two_pi * m / t.z_grid.n_angles));
  zs.insert(zs.end(), t.z_grid.points.begin(), t.z_grid.points.end());

  const RankOneFamilySpec* subsets = nullptr;
  if (const auto* spec = std::get_if<RankOneFamilySpec>(&c.family); spec && spec->subsets)
    subsets = spec;

  double eig = 0.0, pair_err = 0.0, unc = 0.0, closed = 0.0;
  std::ostringstream csv;
  csv << "re_z,im_z,N,eigen_a,eigen_bdag,pairing_re,pairing_im,delta_q_re,delta_q_im,"
         "delta_p_re,delta_p_im,product_re,product_im,predicted,closed_form\n";
  for (const cplx z : zs) {
    const auto st = bicoherent_states(fam, z);
    const auto [ea, eb] = eigen_check(st, fam);
    const cplx pr = pairing(st);
    const auto u = uncertainty_product(fam, z);
    double cf = std::nan("");
    if (subsets) {
      const auto [phi_c, psi_c] = closed_form_riesz_states(*subsets->subsets, subsets->alpha_def,
                                                           fam.q(), z, st.terms, st.dim);
      cf = std::max((phi_c - st.phi_z).norm(), (psi_c - st.psi_z).norm());
      closed = std::max(closed, cf);
    }
    eig = std::max({eig, ea, eb});
    pair_err = std::max(pair_err, std::abs(pr - 1.0));
    unc = std::max(unc, std::abs(u.product - u.predicted));
    csv << fmt(z.real()) << ',' << fmt(z.imag()) << ',' << fmt(st.norm_const) << ',' << fmt(ea)
        << ',' << fmt(eb) << ',' << fmt(pr.real()) << ',' << fmt(pr.imag()) << ','
        << fmt(u.delta_q.real()) << ',' << fmt(u.delta_q.imag()) << ',' << fmt(u.delta_p.real())
        << ',' << fmt(u.delta_p.imag()) << ',' << fmt(u.product.real()) << ','
        << fmt(u.product.imag()) << ',' << fmt(u.predicted) << ',' << fmt(cf) << '\n';
  }
  r.metrics.push_back({"eigen", eig, tol("bicoherent.eigen")});
  r.metrics.push_back({"pairing", pair_err, tol("bicoherent.pairing")});
  r.metrics.push_back({"uncertainty", unc, tol("bicoherent.uncertainty")});
  if (subsets) r.metrics.push_back({"closed_form", closed, tol("bicoherent.closed_form")});
  r.extra["rho"] = rho;
  r.extra["points"] = zs.size();
  r.artifacts.push_back({"bicoherent.csv", csv.str()});
  return r;
}

TaskResult run_resolution(const TaskSpec& t, const BiorthogonalFamily& fam, std::uint64_t seed,
                          const Tolerances& tol) {
  TaskResult r{"resolution", {}, {}, json::object(), "", 0.0};
  const double rho = fock_family_radius(fam);
  const auto quad = solve_moment_measure(fam.q(), rho, t.k_mom);

  // Index k of the test vectors obeys 2k < K_mom.
  const int support = std::min((t.k_mom + 1) / 2, fam.k_safe());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_vector = [&] {
    FockVector x = FockVector::Zero(fam.dim());
    for (int k = 0; k < support; ++k) x(k) = cplx(normal(rng), normal(rng));
    return x;
  };
  double worst = 0.0;
  std::ostringstream pairs;
  pairs << "pair,exact_re,exact_im,quadrature_re,quadrature_im,error\n";
  for (int i = 0; i < t.n_pairs; ++i) {
    const FockVector f = random_vector();
    const FockVector g = random_vector();
    const cplx exact = inner(f, g);
    const cplx approx = resolution_check(fam, quad, t.n_theta, f, g);
    const double err = std::abs(approx - exact);
    worst = std::max(worst, err);
    pairs << i << ',' << fmt(exact.real()) << ',' << fmt(exact.imag()) << ','
          << fmt(approx.real()) << ',' << fmt(approx.imag()) << ',' << fmt(err) << '\n';
  }
  r.metrics.push_back({"moments", quad.max_residual(), tol("resolution.moments")});
  r.metrics.push_back({"identity", worst, tol("resolution.identity")});

  std::ostringstream nodes;
  nodes << "r,w\n";
  for (std::size_t j = 0; j < quad.nodes.size(); ++j)
    nodes << fmt(quad.nodes[j]) << ',' << fmt(quad.weights[j]) << '\n';
  json report{{"method", quad.method},
              {"feasible", quad.feasible},
              {"K_mom", quad.k_mom},
              {"rho", quad.rho},
              {"moment_residuals", quad.residuals},
              {"angular_exactness", angular_exactness(t.n_theta, support - 1)}};
  r.extra["method"] = quad.method;
  r.extra["feasible"] = quad.feasible;
  r.artifacts.push_back({"quadrature.csv", nodes.str()});
  r.artifacts.push_back({"quadrature.json", report.dump(1) + "\n"});
  r.artifacts.push_back({"resolution_pairs.csv", pairs.str()});
  return r;
}

std::string grid_csv(const GridFunction& f) {
  std::ostringstream os;
  os << "x,re,im\n";
  for (int i = 0; i < f.grid.n_pts; ++i)
    os << fmt(f.grid.x(i)) << ',' << fmt(f.values[i].real()) << ',' << fmt(f.values[i].imag())
       << '\n';
  return os.str();
}

TaskResult run_position(const ExperimentConfig& c, const TaskSpec& t, const Tolerances& tol) {
  TaskResult r{"position", {}, {}, json::object(), "", 0.0};
  const auto& spec = std::get<PositionFamilySpec>(c.family);
  const auto p = PositionParams::make(c.q, spec.gamma);
  const auto grid = Grid::for_gamma(spec.gamma);
  const auto fam = build_position_family(p, t.n_max);
  const auto ladder = position_ladder_check(fam, grid);
  const auto norms = norm_formula_check(p, t.n_max, grid);

  std::vector<AnalyticFunction> tests{vacuum_phi(p), vacuum_psi(p)};
  for (int n = 1; n <= t.n_max; ++n) tests.push_back(fam.phi[n]);
  r.metrics.push_back({"ladder", ladder.max(), tol("position.ladder")});
  r.metrics.push_back({"qmutator", qmutation_grid_check(p, tests, grid), tol("position.qmutator")});
  r.metrics.push_back({"norm_formula", norms.max_relative, tol("position.norm_formula")});
  r.metrics.push_back({"phi_psi_gap", norms.max_phi_psi_gap, tol("position.phi_psi_gap")});
  r.metrics.push_back({"theta_conjugacy", theta_conjugacy_grid_check(fam, grid),
                       tol("position.theta_conjugacy")});
  r.metrics.push_back({"l_bound", norms.bound_holds ? 1.0 : 0.0, 0.5, true});

  std::ostringstream table;
  table << "n,grid_norm_sq,formula,psi_norm_sq\n";
  for (std::size_t n = 0; n < norms.formula.size(); ++n)
    table << n << ',' << fmt(norms.grid_norm_sq[n]) << ',' << fmt(norms.formula[n]) << ','
          << fmt(norms.psi_norm_sq[n]) << '\n';
  r.artifacts.push_back({"position_norms.csv", table.str()});
  for (int n = 0; n <= t.n_max; ++n) {
    r.artifacts.push_back({"position_phi_" + std::to_string(n) + ".csv",
                           grid_csv(fam.phi[n].sample(grid))});
    r.artifacts.push_back({"position_psi_" + std::to_string(n) + ".csv",
                           grid_csv(fam.psi[n].sample(grid))});
  }
  r.extra["rho"] = p.scale();
  return r;
}

json family_summary(const ExperimentConfig& c) {
  return std::visit(
      [&](const auto& f) -> json {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, IdentityFamilySpec>) {
          return {{"kind", "identity"}};
        } else if constexpr (std::is_same_v<T, PositionFamilySpec>) {
          return {{"kind", "position"}, {"gamma", f.gamma}};
        } else {
          return {{"kind", "rank_one"},
                  {"alpha_def", {f.alpha_def.real(), f.alpha_def.imag()}},
                  {"subsets", f.subsets.has_value()}};
        }
      },
      c.family);
}

}  // namespace

std::string to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::Mutator: return "mutator";
    case TaskKind::Family: return "family";
    case TaskKind::Theta: return "theta";
    case TaskKind::Bicoherent: return "bicoherent";
    case TaskKind::Resolution: return "resolution";
    case TaskKind::Position: return "position";
  }
  return "unknown";
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) config_error("$", "config must be an object");
  ExperimentConfig c;
  c.q = as_number(require(j, "q", "$"), "$.q");
  if (j.contains("K")) c.K = as_int(j["K"], "$.K");
  c.family = parse_family(require(j, "family", "$"), "$.family");
  const auto& tasks = require(j, "tasks", "$");
  if (!tasks.is_array()) config_error("$.tasks", "expected an array");
  for (std::size_t i = 0; i < tasks.size(); ++i)
    c.tasks.push_back(parse_task(tasks[i], "$.tasks[" + std::to_string(i) + "]"));
  if (j.contains("tolerances")) {
    const auto& t = j["tolerances"];
    if (!t.is_object()) config_error("$.tolerances", "expected an object");
    for (const auto& [key, value] : t.items()) {
      if (!default_tolerances().count(key))
        config_error("$.tolerances." + key, "unknown tolerance key");
      const double x = as_number(value, "$.tolerances." + key);
      if (!(x > 0.0)) config_error("$.tolerances." + key, "must be positive");
      c.tolerances[key] = x;
    }
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) config_error("$.seed", "expected a nonnegative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  validate_config(c);
  return c;
}

void validate_config(const ExperimentConfig& c) {
  if (c.K < 4 || c.K > 2048) config_error("$.K", "truncation must lie in [4, 2048]");
  if (c.tasks.empty()) config_error("$.tasks", "no tasks given");
  const bool open_unit = c.q > 0.0 && c.q < 1.0;
  if (!is_fock(c.family) && !open_unit)
    config_error("$.q", "the position family needs 0 < q < 1");

  if (const auto* spec = std::get_if<RankOneFamilySpec>(&c.family)) {
    try {
      if (spec->subsets) spec->subsets->validate();
      if (std::abs(spec->alpha_def + 1.0) < 1e-14)
        config_error("$.family.alpha_def", "alpha = -1 makes S singular");
      (void)make_similarity(c);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Config) throw;
      config_error("$.family", e.what());
    }
    const int extent = spec->subsets ? spec->subsets->support_max() + 1
                                     : static_cast<int>(std::max(spec->u.size(), spec->v.size()));
    if (extent + 4 > c.K) config_error("$.K", "truncation too small for the deformation support");
  }

  for (std::size_t i = 0; i < c.tasks.size(); ++i) {
    const auto& t = c.tasks[i];
    const std::string path = "$.tasks[" + std::to_string(i) + "]";
    const bool position_task = t.kind == TaskKind::Position;
    if (position_task && is_fock(c.family))
      config_error(path, "position task requires the position family");
    if (!position_task && !is_fock(c.family))
      config_error(path, to_string(t.kind) + " task requires a Fock-space family");
    if ((t.kind == TaskKind::Bicoherent || t.kind == TaskKind::Resolution) && !open_unit)
      config_error("$.q", "radius undefined unless 0 < q < 1 (" + to_string(t.kind) + " task)");
    if (t.kind == TaskKind::Bicoherent) {
      if (t.z_grid.n_angles < 1) config_error(path + ".z_grid.n_angles", "must be positive");
      for (double f : t.z_grid.radius_fractions)
        if (!(f >= 0.0 && f < 1.0))
          config_error(path + ".z_grid.radius_fractions", "fractions must lie in [0, 1)");
      const double rho = 1.0 / std::sqrt(1.0 - c.q);
      for (const cplx z : t.z_grid.points)
        if (!(std::abs(z) < rho)) config_error(path + ".z_grid.points", "point outside the disc");
    }
    if (t.kind == TaskKind::Resolution) {
      if (t.k_mom < 2 || t.k_mom > kMaxMoments)
        config_error(path + ".K_mom", "must lie in [2, " + std::to_string(kMaxMoments) + "]");
      if (t.n_theta <= (t.k_mom + 1) / 2)
        config_error(path + ".n_theta", "must exceed the largest tested index");
      if (t.n_pairs < 1) config_error(path + ".n_pairs", "must be positive");
    }
    if (position_task && (t.n_max < 0 || t.n_max > 12))
      config_error(path + ".n_max", "must lie in [0, 12]");
  }
}

RunOutcome run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  using clock = std::chrono::steady_clock;
  const std::uint64_t seed = options.seed.value_or(config.seed);
  const Tolerances tol(config.tolerances, options.tolerance_scale);
  const auto t0 = clock::now();

  std::optional<BiorthogonalFamily> family;
  if (is_fock(config.family))
    family = build_family(make_similarity(config), QParam(config.q), config.K);
  const double family_seconds = std::chrono::duration<double>(clock::now() - t0).count();

  std::vector<std::future<TaskResult>> futures;
  for (std::size_t i = 0; i < config.tasks.size(); ++i) {
    const TaskSpec task = config.tasks[i];
    const std::uint64_t task_seed = seed + i;
    futures.push_back(std::async(std::launch::async, [&, task, task_seed] {
      const auto start = clock::now();
      TaskResult r;
      try {
        switch (task.kind) {
          case TaskKind::Mutator: r = run_mutator(*family, tol); break;
          case TaskKind::Family: r = run_family(*family, tol); break;
          case TaskKind::Theta: r = run_theta(*family, tol); break;
          case TaskKind::Bicoherent: r = run_bicoherent(config, task, *family, tol); break;
          case TaskKind::Resolution: r = run_resolution(task, *family, task_seed, tol); break;
          case TaskKind::Position: r = run_position(config, task, tol); break;
        }
      } catch (const std::exception& e) {
        r.name = to_string(task.kind);
        r.error = e.what();
      }
      r.seconds = std::chrono::duration<double>(clock::now() - start).count();
      return r;
    }));
  }

  RunOutcome out;
  out.summary = {{"q", config.q},
                 {"K", config.K},
                 {"seed", seed},
                 {"tolerance_scale", options.tolerance_scale},
                 {"family", family_summary(config)}};
  if (family) out.summary["k_safe"] = family->k_safe();
  out.timings = {{"family_seconds", family_seconds}, {"tasks", json::array()}};
  json tasks = json::array();
  std::ostringstream csv;
  csv << "task_index,task,metric,value,tolerance,bound,passed\n";
  std::vector<Artifact> files;
  for (std::size_t i = 0; i < futures.size(); ++i) {
    TaskResult r = futures[i].get();
    const std::string prefix = "task" + std::to_string(i) + "_";
    json entry{{"index", i}, {"task", r.name}, {"metrics", json::object()}, {"artifacts", json::array()}};
    json failed = json::array();
    if (!r.error.empty()) {
      entry["error"] = r.error;
      failed.push_back(r.name + ".error");
      out.failures.push_back(r.name + ".error");
    }
    for (const auto& m : r.metrics) {
      entry["metrics"][m.name] = {{"value", std::isnan(m.value) ? json(nullptr) : json(m.value)},
                                  {"tolerance", m.tolerance},
                                  {"bound", m.lower_bound ? "lower" : "upper"},
                                  {"passed", m.passed()}};
      csv << i << ',' << r.name << ',' << m.name << ',' << fmt(m.value) << ',' << fmt(m.tolerance)
          << ',' << (m.lower_bound ? "lower" : "upper") << ',' << (m.passed() ? 1 : 0) << '\n';
      if (!m.passed()) {
        failed.push_back(r.name + "." + m.name);
        out.failures.push_back(r.name + "." + m.name);
      }
    }
    for (const auto& [key, value] : r.extra.items())
      if (value.is_number())
        csv << i << ',' << r.name << ',' << key << ',' << fmt(value.get<double>()) << ",,info,1\n";
    entry["info"] = r.extra;
    entry["failed"] = failed;
    entry["passed"] = failed.empty();
    for (auto& a : r.artifacts) {
      entry["artifacts"].push_back(prefix + a.file);
      files.push_back({prefix + a.file, std::move(a.content)});
    }
    tasks.push_back(entry);
    out.timings["tasks"].push_back({{"index", i}, {"task", r.name}, {"seconds", r.seconds}});
  }
  out.summary["tasks"] = tasks;
  out.summary["passed"] = out.failures.empty();
  out.summary["failures"] = out.failures;
  out.exit_code = out.failures.empty() ? 0 : 1;

  if (options.write_files) {
    std::error_code ec;
    std::filesystem::create_directories(options.out_dir, ec);
    if (ec) fail(ErrorCode::Io, "cannot create " + options.out_dir.string() + ": " + ec.message());
    auto write = [&](const std::string& name, const std::string& content) {
      std::ofstream os(options.out_dir / name, std::ios::binary);
      if (!os) fail(ErrorCode::Io, "cannot write " + (options.out_dir / name).string());
      os << content;
    };
    write("summary.json", out.summary.dump(2) + "\n");
    write("timings.json", out.timings.dump(2) + "\n");
    write("summary.csv", csv.str());
    for (const auto& f : files) write(f.file, f.content);
  }
  return out;
}

}  // namespace quon
