#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "lurerad/matrix.h"
#include "lurerad/problem.h"

namespace lurerad {

struct CommandOptions {
  std::optional<NormKind> norm;
  bool override_gates = false;
  std::optional<double> delta_crit;
  std::optional<std::filesystem::path> network;
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> dump_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<double> dt;
  std::optional<double> horizon;
};

inline constexpr std::uint64_t kDefaultSeed = 42;
inline constexpr int kDefaultTrials = 10;
inline constexpr std::size_t kSectorSamples = 1000;
inline constexpr double kSectorBoxHi = 10.0;

enum ExitCode : int { kExitOk = 0, kExitInputError = 1, kExitNegative = 2 };

struct Report {
  std::string command;
  std::string inputs_digest;
  nlohmann::json results = nlohmann::json::object();
  std::vector<std::string> warnings;
  std::vector<std::string> lines;  // human-readable body
  int exit_code = kExitOk;

  std::string ToJson() const;
  std::string ToText() const;
};

Report cmd_check(const ProblemFile& problem, const CommandOptions& opts);
Report cmd_radius(const ProblemFile& problem, const CommandOptions& opts);
/// problem may be null when opts.network is given.
Report cmd_nn_bound(const ProblemFile* problem, const CommandOptions& opts);
Report cmd_sweep(const ProblemFile& problem, const CommandOptions& opts);
Report cmd_refine(const ProblemFile& problem, const CommandOptions& opts);

/// Runs a command by name ("check", "radius", "nn-bound", "sweep", "refine"),
/// converting library errors into a report with the matching exit code.
Report RunCommand(const std::string& command, const ProblemFile* problem,
                  const CommandOptions& opts);

/// Loads the problem (if a path is given) and runs the command; load errors
/// become exit-1 reports.
Report RunCommandFromFile(const std::string& command,
                          const std::optional<std::filesystem::path>& problem_path,
                          const CommandOptions& opts);

}  // namespace lurerad
