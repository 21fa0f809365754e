#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "htcirc/io.hpp"

namespace htcirc::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kGuardError = 3,
  kInvariantError = 4,
};

/// Command-line values that take precedence over the config file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<double> tolerance;
  std::optional<std::uint64_t> guard;
};

struct CsvRow {
  std::string experiment;
  std::string partition;
  std::size_t draw_count = 0;
  std::string max_rank;
  std::string theoretical_bound;
  bool matched = false;
  std::uint64_t seed = 0;
  double tolerance = 0.0;
};

struct Report {
  Json payload;  // experiment, config, results
  std::vector<CsvRow> rows;
  std::string summary;
};

inline constexpr const char* kOutDirVariable = "HTCIRC_OUT_DIR";

const std::vector<std::string>& experiment_kinds();

/// One line per experiment kind: name and what it checks.
std::string list_experiments();

/// Fills defaults, loads referenced model files and applies overrides. The
/// result is what gets embedded in the report. Output settings are removed.
Json resolve_config(const Json& raw, const Overrides& overrides,
                    const std::filesystem::path& base_dir = {});

Report run_experiment(const Json& resolved);

/// JSON reports add a metadata object after the payload; CSV has no metadata.
std::string render(const Report& report, const std::string& format, const Json& metadata);

std::string render_csv(const std::vector<CsvRow>& rows);

/// Writes via a temporary file in the target directory and a rename.
void write_atomically(const std::filesystem::path& path, const std::string& contents);

/// Output path: override, then the config's "output", then $HTCIRC_OUT_DIR or
/// the working directory with "<experiment>-<seed>.<format>".
std::filesystem::path output_path(const Json& raw, const Json& resolved, const Overrides& o,
                                  const std::string& format);

/// Full `run` subcommand. Returns the process exit code.
int run(const std::filesystem::path& config_path, const Overrides& overrides, std::ostream& out,
        std::ostream& err);

}  // namespace htcirc::cli
