#include "polsim/models.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace polsim {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

RatePrediction clamped(double rate) { return {std::clamp(rate, 0.0, 1.0)}; }

// Angles indexed by photon for a closed-form law that needs all `arity`
// photons measured.
template <std::size_t N>
std::array<Angle, N> angles_by_photon(std::span<const PolarizerSetting> settings) {
  if (settings.size() != N) {
    throw std::invalid_argument("model expects " + std::to_string(N) + " polarizer settings, got " +
                                std::to_string(settings.size()));
  }
  validate_settings(static_cast<int>(N), settings);
  std::array<Angle, N> out{};
  for (const auto& s : settings) out[s.photon_index] = s.angle;
  return out;
}

void check_k(double k) {
  if (!(k > 0.0 && k <= 1.0)) throw std::invalid_argument("k out of range (0,1]");
}

}  // namespace

int model_arity(const RateModel& model) {
  return std::visit(overloaded{
                        [](const Copenhagen& m) { return m.source_state.num_photons(); },
                        [](const TimeSymmetricTriphoton&) { return 3; },
                        [](const TimeSymmetricBell&) { return 2; },
                    },
                    model);
}

std::string model_tag(const RateModel& model) {
  return std::holds_alternative<Copenhagen>(model) ? "copenhagen" : "timesym";
}

void validate_model(const RateModel& model) {
  std::visit(overloaded{
                 [](const Copenhagen& m) {
                   if (std::abs(norm(m.source_state) - 1.0) > 1e-9) {
                     throw std::invalid_argument("Copenhagen source state is not normalized");
                   }
                 },
                 [](const TimeSymmetricTriphoton& m) { check_k(m.k); },
                 [](const TimeSymmetricBell&) {},
             },
             model);
}

RatePrediction copenhagen_rate(const PureState& state, std::span<const PolarizerSetting> settings) {
  return clamped(joint_pass_probability(state, settings));
}

RatePrediction ghz_collapse_closed_form(Angle theta_a, Angle theta_b, Angle theta_c) {
  const double a = theta_a.radians(), b = theta_b.radians(), c = theta_c.radians();
  const double amp = std::cos(a) * std::cos(b) * std::sin(c) + std::sin(a) * std::sin(b) * std::cos(c);
  return clamped(0.5 * amp * amp);
}

RatePrediction time_symmetric_rate(Angle theta_a, Angle theta_b, Angle theta_c, double k) {
  check_k(k);
  const double cosine = std::cos(theta_c.radians() - theta_a.radians() - theta_b.radians());
  return clamped(k * cosine * cosine);
}

RatePrediction bell_rate(Angle theta_a, Angle theta_b) {
  const double cosine = std::cos(theta_a.radians() - theta_b.radians());
  return clamped(0.5 * cosine * cosine);
}

RatePrediction predict_rate(const RateModel& model, std::span<const PolarizerSetting> settings) {
  return std::visit(overloaded{
                        [&](const Copenhagen& m) { return copenhagen_rate(m.source_state, settings); },
                        [&](const TimeSymmetricTriphoton& m) {
                          const auto t = angles_by_photon<3>(settings);
                          return time_symmetric_rate(t[0], t[1], t[2], m.k);
                        },
                        [&](const TimeSymmetricBell&) {
                          const auto t = angles_by_photon<2>(settings);
                          return bell_rate(t[0], t[1]);
                        },
                    },
                    model);
}

std::int64_t decoherence_step_budget(double tau_op, double tau_coherence) {
  if (!(tau_op > 0.0) || !std::isfinite(tau_op)) {
    throw std::invalid_argument("tau_op must be positive and finite");
  }
  if (!(tau_coherence >= 0.0) || !std::isfinite(tau_coherence)) {
    throw std::invalid_argument("tau_coherence must be non-negative and finite");
  }
  const double ratio = tau_coherence / tau_op;
  if (ratio >= static_cast<double>(std::numeric_limits<std::int64_t>::max())) {
    throw std::invalid_argument("step budget overflows a 64-bit count");
  }
  // Decimal inputs such as 1e-7 / 1e-9 land a few ulps below the integer
  // they denote; snap those before flooring.
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) <= 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, ratio)) {
    return static_cast<std::int64_t>(nearest);
  }
  return static_cast<std::int64_t>(std::floor(ratio));
}

}  // namespace polsim
