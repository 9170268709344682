#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "polsim/config.hpp"

namespace polsim {

enum class Command { kPredict, kSimulate, kDiscriminate, kVerify };

std::optional<Command> parse_command(std::string_view name);
std::string_view to_string(Command command);

namespace exit_code {
inline constexpr int kSuccess = 0;
inline constexpr int kVerifyFailed = 1;
inline constexpr int kUsage = 2;
inline constexpr int kIo = 3;
}  // namespace exit_code

/// Largest |Copenhagen − time-symmetric| difference `verify` accepts.
inline constexpr double kVerifyTolerance = 1e-12;

/// Rendered output of one command plus the exit status it implies.
struct Artifact {
  std::string text;
  int exit_code = exit_code::kSuccess;
  /// One-line human summary for stderr; empty when there is nothing to say.
  std::string summary;
};

/// Runs a command without touching the filesystem. Configuration problems
/// surface as ConfigError or std::invalid_argument / std::domain_error.
///
/// predict and simulate honor config.format; discriminate and verify always
/// render JSON.
Artifact execute(Command command, const RunConfig& config);

struct CommandOptions {
  bool force = false;
};

/// execute() plus output handling: writes to config.output_path when set
/// (refusing to overwrite unless forced), otherwise to `out`. Diagnostics go
/// to `err`. Returns the process exit code.
int run_command(Command command, const RunConfig& config, const CommandOptions& options,
                std::ostream& out, std::ostream& err);

/// Full precision rendering used for every number in CSV output.
std::string format_number(double value);

}  // namespace polsim
