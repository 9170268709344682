#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "polsim/measurement.hpp"
#include "polsim/models.hpp"
#include "polsim/state.hpp"

namespace polsim {

inline constexpr int kSchemaVersion = 1;

enum class Experiment { kBell, kGhz, kCustom };
enum class ModelChoice { kCopenhagen, kTimeSymmetric };
enum class OutputFormat { kCsv, kJson };

/// Inclusive sweep of one polarizer: `steps` evenly spaced angles from start
/// to stop. The other polarizers stay at the fixed `angles`.
struct Sweep {
  int axis = 0;  // photon index: 0 = theta_a, 1 = theta_b, 2 = theta_c
  double start = 0.0;
  double stop = 0.0;
  int steps = 1;

  friend bool operator==(const Sweep&, const Sweep&) = default;
};

/// Fully resolved run configuration. Angles are radians.
struct RunConfig {
  int schema_version = kSchemaVersion;
  Experiment experiment = Experiment::kGhz;
  /// Custom source amplitudes; empty for the presets.
  std::vector<Amplitude> amplitudes;
  ModelChoice model = ModelChoice::kCopenhagen;
  double k = kDefaultK;
  /// One fixed angle per photon; the base point when a sweep is present.
  std::vector<double> angles;
  std::optional<Sweep> sweep;
  std::uint64_t seed = 0;
  std::int64_t n_emitted = 1000;
  double efficiency = 1.0;
  double dark_rate = 0.0;
  std::optional<std::string> output_path;
  OutputFormat format = OutputFormat::kCsv;

  // discriminate
  int grid = 64;
  int refine_iterations = 50;
  double alpha = 0.01;
  double beta = 0.01;
  int resamples = 1000;
  bool fit_k = false;

  // verify
  int verify_grid = 181;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Rejected configuration. `key` is the offending key path (e.g.
/// "sweep.steps") and `line` its 1-based line, 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, int line, const std::string& message);

  const std::string& key() const { return key_; }
  int line() const { return line_; }
  /// The bare message, without key and line decoration.
  const std::string& message() const { return message_; }

 private:
  std::string key_;
  int line_;
  std::string message_;
};

/// Parses and validates a YAML run configuration, applying defaults.
/// Unknown keys are rejected.
RunConfig parse_config(std::string_view text);

/// YAML rendering that parse_config reads back to an equal RunConfig.
std::string serialize_config(const RunConfig& config);

/// Throws ConfigError if the config violates a cross-field constraint.
void validate_config(const RunConfig& config);

int photon_count(const RunConfig& config);
PureState source_state(const RunConfig& config);

/// The model named by `choice` for this experiment: Copenhagen on the source
/// state, or the time-symmetric law of matching arity.
RateModel make_model(const RunConfig& config, ModelChoice choice);

/// Fixed angles, or one settings tuple per sweep point.
std::vector<AngleSettings> expand_settings(const RunConfig& config);

std::string_view to_string(Experiment e);
std::string_view to_string(ModelChoice m);
std::string_view to_string(OutputFormat f);

}  // namespace polsim
