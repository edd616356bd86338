#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cbsel/cli/config.hpp"
#include "cbsel/parallel.hpp"

namespace cbsel::cli {

enum class Command {
  Beampattern,
  Select,
  SweepTrials,
  SweepInr,
  Ccdf,
  Case1,
  Case2,
  Case3,
  Case4,
  ValidateAppendix,
};

std::optional<Command> parse_command(const std::string& name);
std::string command_name(Command command);
std::vector<std::string> command_names();

namespace exit_code {
inline constexpr int kSuccess = 0;
inline constexpr int kFailure = 1;  // I/O and other runtime errors
inline constexpr int kConfig = 2;
inline constexpr int kNonConvergence = 3;
inline constexpr int kValidation = 4;
}  // namespace exit_code

struct CommandSpec {
  Command command = Command::Beampattern;
  std::optional<std::filesystem::path> config_path;
  std::optional<std::string> preset;  // name of a shipped preset
  std::filesystem::path output_dir = ".";
  std::vector<std::string> overrides;  // section.key=value
  std::optional<OutputFormat> format;  // overrides output.format
  Execution execution = Execution::Parallel;
};

/// Configuration a command runs with: the file (or preset; case1..case4
/// default to their own preset), then overrides, then the format flag.
RunConfig resolve_config(const CommandSpec& spec);

/// Runs one command, writing its artifacts plus manifest.ini/manifest.json
/// into spec.output_dir. Diagnostics go to `log`. Returns an exit code.
int run_command(const CommandSpec& spec, std::ostream& log);

}  // namespace cbsel::cli
