#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "quon/quon.h"

using nlohmann::json;

namespace {

struct Common {
  std::string config_path;
  std::string out_dir = "out";
  std::int64_t seed = -1;
  double tolerance_scale = 1.0;
};

struct FamilyOptions {
  double q = 0.5;
  int K = 64;
  std::string family = "identity";
  std::vector<double> alpha{0.0, 1.0};
  double gamma = 0.0;
};

struct TaskOptions {
  std::vector<double> radius_fractions{0.1, 0.3, 0.5, 0.7, 0.9};
  int n_angles = 8;
  int k_mom = 12;
  int n_theta = 64;
  int n_pairs = 20;
  int n_max = 6;
};

int status_exit(quon_status st) {
  switch (st) {
    case QUON_OK: return 0;
    case QUON_CONFIG:
    case QUON_INVALID_ARGUMENT:
    case QUON_DOMAIN:
    case QUON_IO: return 2;
    default: return 1;
  }
}

json family_json(const FamilyOptions& f) {
  if (f.family == "identity") return "identity";
  if (f.family == "position") return {{"kind", "position"}, {"gamma", f.gamma}};
  // rank_one: three-subset configuration with supports below 6.
  return {{"kind", "rank_one"},
          {"alpha_def", f.alpha},
          {"subsets",
           {{"set0", {{0, 0.6, 0.0}, {2, 0.0, 0.8}}},
            {"set1", {{1, 0.5, 0.0}, {4, -0.3, 0.2}}},
            {"set2", {{3, 0.0, 0.4}, {5, 0.25, 0.0}}}}}};
}

json task_json(const std::string& name, const TaskOptions& t) {
  json j{{"task", name}};
  if (name == "bicoherent")
    j["z_grid"] = {{"radius_fractions", t.radius_fractions}, {"n_angles", t.n_angles}};
  if (name == "resolution") {
    j["K_mom"] = t.k_mom;
    j["n_theta"] = t.n_theta;
    j["n_pairs"] = t.n_pairs;
  }
  if (name == "position") j["n_max"] = t.n_max;
  return j;
}

bool read_file(const std::string& path, std::string& out) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return false;
  std::ostringstream ss;
  ss << is.rdbuf();
  out = ss.str();
  return true;
}

void print_summary(const json& summary) {
  for (const auto& task : summary["tasks"]) {
    std::cout << (task["passed"].get<bool>() ? "PASS " : "FAIL ") << task["task"].get<std::string>()
              << '\n';
    for (const auto& [name, m] : task["metrics"].items()) {
      std::cout << "  " << name << " = ";
      if (m["value"].is_null())
        std::cout << "nan";
      else
        std::cout << m["value"].get<double>();
      std::cout << (m["bound"] == "lower" ? " > " : " < ") << m["tolerance"].get<double>()
                << (m["passed"].get<bool>() ? "" : "  FAILED") << '\n';
    }
    if (task.contains("error")) std::cout << "  error: " << task["error"].get<std::string>() << '\n';
    for (const auto& a : task["artifacts"]) std::cout << "  wrote " << a.get<std::string>() << '\n';
  }
}

int run_json(const std::string& config, const Common& c) {
  int exit_code = 0;
  char* summary = nullptr;
  const quon_status st = quon_run_config(config.c_str(), c.out_dir.c_str(), c.seed,
                                         c.tolerance_scale, &exit_code, &summary);
  if (st != QUON_OK) {
    std::cerr << "error: " << quon_last_error() << '\n';
    return status_exit(st);
  }
  print_summary(json::parse(summary));
  quon_string_free(summary);
  if (exit_code != 0) std::cerr << quon_last_error() << '\n';
  return exit_code;
}

// A single-task run, either from --config (tasks replaced) or from flags.
int run_task(const std::string& name, const Common& c, const FamilyOptions& f, const TaskOptions& t) {
  json config;
  if (!c.config_path.empty()) {
    std::string text;
    if (!read_file(c.config_path, text)) {
      std::cerr << "error: cannot read " << c.config_path << '\n';
      return 2;
    }
    try {
      config = json::parse(text);
    } catch (const json::parse_error& e) {
      std::cerr << "error: $: invalid JSON: " << e.what() << '\n';
      return 2;
    }
    if (!config.is_object()) {
      std::cerr << "error: $: config must be an object\n";
      return 2;
    }
  } else {
    config = {{"q", f.q}, {"K", f.K}, {"family", family_json(f)}};
  }
  config["tasks"] = json::array({task_json(name, t)});
  return run_json(config.dump(), c);
}

int beta_table(double q, int n_max) {
  std::printf("%4s %24s %24s %24s\n", "n", "beta_n^2", "beta_n!", "log-number eigenvalue");
  for (int n = 0; n <= n_max; ++n) {
    double b2 = 0, fact = 0, lne = std::nan("");
    if (quon_beta_sq(q, n, &b2) != QUON_OK || quon_q_factorial(q, n, &fact) != QUON_OK) {
      std::cerr << "error: " << quon_last_error() << '\n';
      return 2;
    }
    if (q > 0.0 && q < 1.0) quon_log_number_eigenvalue(q, n, &lne);
    std::printf("%4d %24.17g %24.17g %24.17g\n", n, b2, fact, lne);
  }
  return 0;
}

void selftest_line(int id, const char* name, int passed, const char* detail, void*) {
  std::printf("[%s] criterion %2d %s: %s\n", passed ? "PASS" : "FAIL", id, name, detail);
  std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deformed quon algebras, biorthogonal families and bi-coherent states"};
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "JSON experiment config");
    sub->add_option("--out", common.out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", common.seed, "RNG seed (overrides the config seed)");
    sub->add_option("--tolerance-scale", common.tolerance_scale, "multiply every tolerance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  };

  FamilyOptions family;
  TaskOptions task;
  auto add_family = [&](CLI::App* sub) {
    sub->add_option("--q", family.q, "deformation parameter")->capture_default_str();
    sub->add_option("-K,--truncation", family.K, "Fock truncation")->capture_default_str();
    sub->add_option("--family", family.family, "identity | rank_one | position")
        ->check(CLI::IsMember({"identity", "rank_one", "position"}))
        ->capture_default_str();
    sub->add_option("--alpha", family.alpha, "rank-one alpha as re im")->expected(2);
    sub->add_option("--gamma", family.gamma, "position-family shift")->capture_default_str();
  };

  double beta_q = 0.5;
  int beta_n = 10;
  auto* beta = app.add_subcommand("beta", "tabulate beta_n^2, beta_n! and log-number eigenvalues");
  beta->add_option("--q", beta_q, "deformation parameter")->capture_default_str();
  beta->add_option("--n", beta_n, "largest index")->capture_default_str();

  std::vector<CLI::App*> task_cmds;
  for (const char* name : {"mutator", "family", "theta", "bicoherent", "resolution", "position"}) {
    auto* sub = app.add_subcommand(name, std::string("run the ") + name + " checks");
    add_common(sub);
    add_family(sub);
    task_cmds.push_back(sub);
  }
  task_cmds[3]->add_option("--radius-fractions", task.radius_fractions, "|z| / rho values");
  task_cmds[3]->add_option("--n-angles", task.n_angles, "angles per radius")->capture_default_str();
  task_cmds[4]->add_option("--k-mom", task.k_mom, "matched moments")->capture_default_str();
  task_cmds[4]->add_option("--n-theta", task.n_theta, "angular points")->capture_default_str();
  task_cmds[4]->add_option("--n-pairs", task.n_pairs, "random test pairs")->capture_default_str();
  task_cmds[5]->add_option("--n-max", task.n_max, "largest level")->capture_default_str();

  auto* run = app.add_subcommand("run", "run a full experiment config");
  add_common(run);

  int selftest_id = 0;
  auto* selftest = app.add_subcommand("selftest", "run the acceptance suite");
  selftest->add_option("--id", selftest_id, "single criterion (1-based), 0 for all")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (beta->parsed()) return beta_table(beta_q, beta_n);

  if (run->parsed()) {
    if (common.config_path.empty()) {
      std::cerr << "error: run needs --config\n";
      return 2;
    }
    std::string text;
    if (!read_file(common.config_path, text)) {
      std::cerr << "error: cannot read " << common.config_path << '\n';
      return 2;
    }
    return run_json(text, common);
  }

  if (selftest->parsed()) {
    const int failed = quon_selftest(selftest_id, selftest_line, nullptr);
    if (failed < 0) {
      std::cerr << "error: " << quon_last_error() << '\n';
      return 2;
    }
    std::printf("%d criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
  }

  for (auto* sub : task_cmds) {
    if (!sub->parsed()) continue;
    const std::string name = sub->get_name();
    if (name == "position" && sub->count("--family") == 0) family.family = "position";
    return run_task(name, common, family, task);
  }
  return 2;
}
