#include "polsim/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace polsim {

namespace {

// Splits the state into its component along |θ⟩ on one photon and the
// orthogonal remainder.
void project_photon(std::span<const Amplitude> in, int num_photons, const PolarizerSetting& setting,
                    std::vector<Amplitude>& along, std::vector<Amplitude>& across) {
  const std::size_t bit = std::size_t{1} << (num_photons - 1 - setting.photon_index);
  const double c = std::cos(setting.angle.radians());
  const double s = std::sin(setting.angle.radians());
  along.assign(in.size(), Amplitude{});
  across.assign(in.size(), Amplitude{});
  for (std::size_t i0 = 0; i0 < in.size(); ++i0) {
    if (i0 & bit) continue;
    const std::size_t i1 = i0 | bit;
    const Amplitude overlap = c * in[i0] + s * in[i1];
    along[i0] = overlap * c;
    along[i1] = overlap * s;
    across[i0] = in[i0] - along[i0];
    across[i1] = in[i1] - along[i1];
  }
}

double squared_norm(std::span<const Amplitude> v) {
  double sum = 0.0;
  for (const auto& a : v) sum += std::norm(a);
  return sum;
}

std::optional<PureState> renormalized_branch(std::vector<Amplitude> branch, double probability) {
  if (probability < kImpossibleBranch) return std::nullopt;
  return PureState::normalized(std::move(branch));
}

}  // namespace

void validate_settings(int num_photons, std::span<const PolarizerSetting> settings) {
  std::vector<bool> seen(static_cast<std::size_t>(num_photons), false);
  for (const auto& s : settings) {
    if (s.photon_index < 0 || s.photon_index >= num_photons) {
      throw std::invalid_argument("photon index " + std::to_string(s.photon_index) +
                                  " out of range for a " + std::to_string(num_photons) +
                                  "-photon state");
    }
    if (seen[s.photon_index]) {
      throw std::invalid_argument("photon index " + std::to_string(s.photon_index) +
                                  " appears more than once");
    }
    seen[s.photon_index] = true;
  }
}

MeasurementOutcome apply_polarizer(const PureState& state, const PolarizerSetting& setting) {
  validate_settings(state.num_photons(), std::span(&setting, 1));
  const double total = squared_norm(state.amplitudes());
  if (total == 0.0) throw std::invalid_argument("cannot measure the zero vector");

  std::vector<Amplitude> along, across;
  project_photon(state.amplitudes(), state.num_photons(), setting, along, across);

  MeasurementOutcome out;
  out.pass_probability = std::clamp(squared_norm(along) / total, 0.0, 1.0);
  out.absorb_probability = std::clamp(squared_norm(across) / total, 0.0, 1.0);
  out.post_pass_state = renormalized_branch(std::move(along), out.pass_probability);
  out.post_absorb_state = renormalized_branch(std::move(across), out.absorb_probability);
  return out;
}

double joint_pass_probability(const PureState& state, std::span<const PolarizerSetting> settings) {
  validate_settings(state.num_photons(), settings);
  const double total = squared_norm(state.amplitudes());
  if (total == 0.0) throw std::invalid_argument("cannot measure the zero vector");

  std::vector<Amplitude> current(state.amplitudes().begin(), state.amplitudes().end());
  std::vector<Amplitude> along, across;
  for (const auto& s : settings) {
    project_photon(current, state.num_photons(), s, along, across);
    current.swap(along);
  }
  return std::clamp(squared_norm(current) / total, 0.0, 1.0);
}

double sequential_chain(const PureState& state, std::span<const PolarizerSetting> ordered_settings) {
  validate_settings(state.num_photons(), ordered_settings);
  double probability = 1.0;
  std::optional<PureState> current = state;
  for (const auto& s : ordered_settings) {
    MeasurementOutcome outcome = apply_polarizer(*current, s);
    probability *= outcome.pass_probability;
    if (!outcome.post_pass_state) return 0.0;
    current = std::move(outcome.post_pass_state);
  }
  return probability;
}

}  // namespace polsim
