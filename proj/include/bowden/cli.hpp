#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "bowden/config.hpp"
#include "bowden/estimation.hpp"

namespace bowden::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kUsage = 1, kConfigError = 2, kScenarioError = 3, kDataError = 4 };

struct RunOptions {
  std::filesystem::path out_dir = "out";
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  bool quiet = false;
};

/// Hex SHA-256 of the canonical config dump and the seed.
std::string run_id(const ScenarioConfig& cfg);

/// Runs a scenario and writes series.csv, summary.json, plot.svg and
/// manifest.json into the output directory. Errors go to `err` as one JSON
/// object; the return value is the exit code.
int cmd_run(const std::filesystem::path& config, const RunOptions& options, std::ostream& out,
            std::ostream& err);

/// Parses and validates a config without running it.
int cmd_validate(const std::filesystem::path& config, bool quiet, std::ostream& out,
                 std::ostream& err);

/// Fits mu per sheath type from a friction-sample CSV; writes fit_report.csv
/// into `out_dir` (next to the input when empty).
int cmd_fit(const std::filesystem::path& csv, const std::filesystem::path& out_dir,
            FitSpace space, bool quiet, std::ostream& out, std::ostream& err);

int cmd_hand_describe(std::ostream& out);

/// Full command line entry point.
int main(int argc, char** argv);

}  // namespace bowden::cli
