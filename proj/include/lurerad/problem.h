#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lurerad/matrix.h"
#include "lurerad/robustness.h"

namespace lurerad {

struct SimulationOverrides {
  std::optional<double> dt;
  std::optional<double> horizon;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::optional<double> delta_max;
  std::optional<double> tol;
};

/// One analysis problem. At most one of sector / network / builtin is set;
/// none means a purely linear problem.
struct ProblemFile {
  std::string source;  // display name used in messages
  std::filesystem::path base_dir;
  std::string digest;  // SHA-256 of the file bytes, hex
  Mat A{1, 1};
  std::optional<Mat> B;
  std::optional<Mat> C;
  PerturbationStructure pert{Mat(1, 1), Mat(1, 1)};
  std::optional<SectorBound> sector;
  std::optional<std::filesystem::path> network;  // resolved against base_dir
  std::optional<std::string> builtin_nonlinearity;
  SimulationOverrides simulation;
  std::optional<std::vector<double>> sweep;
  std::optional<Mat> direction;

  bool has_loop() const { return B.has_value() && C.has_value(); }
  LtiSystem system() const;  // zero B/C stand in for a linear-only problem
};

ProblemFile LoadProblem(const std::filesystem::path& path);
ProblemFile ParseProblem(const std::string& text, const std::string& source,
                         const std::filesystem::path& base_dir);

std::string Sha256Hex(const std::string& bytes);

}  // namespace lurerad
