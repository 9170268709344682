#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "polsim/measurement.hpp"
#include "polsim/models.hpp"

namespace polsim {

/// Detector response shared by every arm.
struct DetectorModel {
  /// Per-arm detection probability, in (0, 1].
  double efficiency = 1.0;
  /// Additive accidental coincidence probability per emission, >= 0.
  double dark_coincidence_rate = 0.0;
};

struct SimulationConfig {
  RateModel model = TimeSymmetricTriphoton{};
  std::vector<AngleSettings> settings_list;
  /// Emitted multi-photon events per setting (R0 times the run length).
  std::int64_t n_emitted = 1;
  DetectorModel detector;
  std::uint64_t master_seed = 0;
};

/// Simulated outcome of counting at one setting.
struct CountRecord {
  AngleSettings settings;
  std::int64_t n_emitted = 0;
  std::int64_t n_coincidence = 0;
  /// Model prediction before detector effects.
  double model_rate = 0.0;
  /// Per-emission coincidence probability actually sampled.
  double effective_probability = 0.0;
  /// Set when detector effects pushed the probability above 1.
  std::optional<std::string> warning;

  friend bool operator==(const CountRecord&, const CountRecord&) = default;
};

/// Child seed for one setting's random stream: splitmix64(splitmix64(master)
/// + index * golden_gamma). Distinct indices under one master never collide
/// (the inner sum is injective in the index and the finalizer is a bijection).
std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t setting_index);

struct EffectiveProbability {
  double probability = 0.0;
  bool clamped = false;
};

/// rate·η^m + dark, clamped into [0, 1].
EffectiveProbability effective_probability(double rate, int photons, const DetectorModel& detector);

/// Throws std::invalid_argument on a config that cannot be simulated.
void validate_simulation_config(const SimulationConfig& config);

/// One binomial draw per setting, each on its own derived stream, so the
/// result does not depend on evaluation order.
std::vector<CountRecord> simulate_counts(const SimulationConfig& config);

/// Binomial(n, p) draw from a stream seeded with `seed`.
std::int64_t sample_binomial(std::uint64_t seed, std::int64_t n, double p);

}  // namespace polsim
