#pragma once

#include <optional>
#include <span>
#include <vector>

#include "polsim/state.hpp"

namespace polsim {

/// Ideal linear polarizer in front of one photon's detector.
struct PolarizerSetting {
  int photon_index = 0;
  Angle angle;

  friend bool operator==(const PolarizerSetting&, const PolarizerSetting&) = default;
};

/// One polarizer setting per measured photon, in temporal order.
using AngleSettings = std::vector<PolarizerSetting>;

/// Branch probabilities below this are treated as impossible.
inline constexpr double kImpossibleBranch = 1e-15;

/// Result of sending one photon through a polarizer, Copenhagen style.
struct MeasurementOutcome {
  double pass_probability = 0.0;
  double absorb_probability = 0.0;
  /// Collapsed, renormalized state given the photon passed.
  std::optional<PureState> post_pass_state;
  /// Collapsed, renormalized state given the photon was absorbed. An absorbed
  /// photon never reaches its detector, so this branch ends a coincidence.
  std::optional<PureState> post_absorb_state;
};

/// Projects photon `setting.photon_index` onto |θ⟩ and collapses.
/// Probabilities are taken relative to the input's squared norm.
MeasurementOutcome apply_polarizer(const PureState& state, const PolarizerSetting& setting);

/// Probability that every listed photon passes its polarizer, computed as
/// the squared norm of the state projected by all polarizers at once.
double joint_pass_probability(const PureState& state, std::span<const PolarizerSetting> settings);

/// Probability that every listed photon passes, measuring one photon at a
/// time in list order and following the pass branch of each collapse.
double sequential_chain(const PureState& state, std::span<const PolarizerSetting> ordered_settings);

/// Throws std::invalid_argument unless every index is in [0, num_photons) and
/// no photon is listed twice.
void validate_settings(int num_photons, std::span<const PolarizerSetting> settings);

}  // namespace polsim
