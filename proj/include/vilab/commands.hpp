#pragma once

// vi-lab command orchestration. Exit codes: 0 success, 2 config error,
// 3 numerical failure, 4 measured value beyond its closed-form bound.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vilab/config.hpp"

namespace vilab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitBound = 4;

inline constexpr const char* kVersion = "0.1.0";

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::size_t workers = 1;
  std::optional<std::uint64_t> seed;  // overrides the config's base seed
};

struct CommandOutcome {
  int exit_code = kExitOk;
  std::string csv;           // empty for solve
  nlohmann::json summary;    // the JSON document written to json_path
  std::string message;       // violation / failure description, if any
};

CommandOutcome cmd_solve(const ExperimentConfig& config, const RunOptions& options);
CommandOutcome cmd_contraction(const ExperimentConfig& config, const RunOptions& options);
CommandOutcome cmd_stability(const ExperimentConfig& config, const RunOptions& options);
CommandOutcome cmd_sweep(const ExperimentConfig& config, const RunOptions& options);
CommandOutcome cmd_bernstein(const ExperimentConfig& config, const RunOptions& options);

/// Entry point shared by the vi-lab binary and the tests. args excludes argv[0].
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vilab
