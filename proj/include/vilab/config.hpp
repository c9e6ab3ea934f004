#pragma once

// Experiment configuration: a JSON document with problem, solver, experiment
// and output sections. Unknown keys are rejected by name.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "vilab/domains.hpp"
#include "vilab/gaps.hpp"
#include "vilab/problems.hpp"
#include "vilab/solvers.hpp"

namespace vilab {

enum class ProblemKind { op, game };

struct ProblemSpec {
  ProblemKind kind = ProblemKind::op;
  std::uint64_t seed = 1;
  std::size_t d = 0;                // operator problems: ambient dimension (from domain)
  std::vector<std::size_t> dims;    // games: per-player dimensions
  double mu_target = 0.5;
  double L_target = 1.0;            // operator problems
  double coupling_strength = 0.5;   // games
  std::optional<Domain> domain;
  NoiseModel noise;
};

struct SolverSpec {
  Method method = Method::gd;
  std::optional<double> eta;  // nullopt = "auto" (μ/L² for gd, admissible midpoint for eg)
  std::size_t T = 1000;
  bool projected = false;
  bool record_trajectory = false;
};

struct ExperimentSpec {
  std::size_t n = 256;
  std::vector<std::size_t> n_grid{16, 64, 256};
  std::size_t trials = 50;
  double delta = 0.1;
  std::vector<double> r_grid{0.5, 0.25, 0.125, 0.0625};
  std::size_t z_samples = 100;
  std::size_t mc_samples = 10000;
  std::vector<double> eta_grid;  // empty = default admissible grid
  std::size_t pairs = 1000;
  GapKind kind = GapKind::gap;
  std::string mode = "mean";  // sweep: "mean" or "hp"
  bool include_solution = true;
};

struct OutputSpec {
  std::string csv_path;
  std::string json_path;
  std::string svg_path;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  ProblemSpec problem;
  SolverSpec solver;
  ExperimentSpec experiment;
  OutputSpec output;
};

Domain domain_from_json(const nlohmann::json& j);
nlohmann::json domain_to_json(const Domain& domain);

/// Throws InvalidArgument naming the offending key or range.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::json config_to_json(const ExperimentConfig& config);

/// Builds the instance described by the problem section.
Problem build_problem(const ProblemSpec& spec);

/// Resolves "auto" and produces the solver configuration for a problem.
SolverConfig resolve_solver(const SolverSpec& spec, const ProblemConstants& constants);

}  // namespace vilab
