#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "quon/pseudoquon.hpp"

namespace quon {

struct IdentityFamilySpec {};

struct RankOneFamilySpec {
  cplx alpha_def;
  // Either explicit u, v or a three-subset configuration.
  std::vector<cplx> u;
  std::vector<cplx> v;
  std::optional<SubsetConfiguration> subsets;
};

struct PositionFamilySpec {
  double gamma = 0.0;
};

using FamilySpec = std::variant<IdentityFamilySpec, RankOneFamilySpec, PositionFamilySpec>;

enum class TaskKind { Mutator, Family, Theta, Bicoherent, Resolution, Position };

std::string to_string(TaskKind kind);

struct ZGrid {
  std::vector<double> radius_fractions;  // of rho
  int n_angles = 8;
  std::vector<cplx> points;              // explicit extra points
};

struct TaskSpec {
  TaskKind kind = TaskKind::Mutator;
  ZGrid z_grid;
  int k_mom = 12;
  int n_theta = 64;
  int n_pairs = 20;
  int n_max = 6;
};

struct ExperimentConfig {
  double q = 0.5;
  int K = 64;
  FamilySpec family;
  std::vector<TaskSpec> tasks;
  std::map<std::string, double> tolerances;  // "task.metric" overrides
  std::uint64_t seed = 0;
};

// Throws Error(Config) with a field path such as "tasks[2].K_mom".
ExperimentConfig parse_config(const nlohmann::json& j);
void validate_config(const ExperimentConfig& config);

struct RunOptions {
  std::filesystem::path out_dir = "out";
  std::optional<std::uint64_t> seed;
  double tolerance_scale = 1.0;
  bool write_files = true;
};

struct RunOutcome {
  int exit_code = 0;  // 0 all pass, 1 tolerance failure
  nlohmann::json summary;
  nlohmann::json timings;
  std::vector<std::string> failures;  // "task.metric"
};

// Builds the family, runs the tasks (independent ones concurrently) and writes
// summary.json, timings.json, summary.csv and per-task CSVs to out_dir.
RunOutcome run_experiment(const ExperimentConfig& config, const RunOptions& options);

}  // namespace quon
