#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>

#include "polsim/measurement.hpp"
#include "polsim/state.hpp"

namespace polsim {

/// Default time-symmetric normalization; matches the collapse model's peak
/// triphoton rate of 1/2.
inline constexpr double kDefaultK = 0.5;

/// Coincidences per emitted event, R_m / R_0. Always in [0, 1].
struct RatePrediction {
  double relative_rate = 0.0;
};

/// Projective collapse at each polarizer, Born rule on the source state.
struct Copenhagen {
  PureState source_state;
};

/// Time-symmetric triphoton law k·cos²(θc − θa − θb).
struct TimeSymmetricTriphoton {
  double k = kDefaultK;
};

/// Time-symmetric two-photon law; defined to coincide with the Born-rule
/// Bell law ½cos²(θa − θb).
struct TimeSymmetricBell {};

using RateModel = std::variant<Copenhagen, TimeSymmetricTriphoton, TimeSymmetricBell>;

/// Number of photons (polarizer settings) a model predicts coincidences for.
int model_arity(const RateModel& model);

/// Short tag used in reports: "copenhagen" or "timesym".
std::string model_tag(const RateModel& model);

/// Throws std::invalid_argument for k outside (0, 1] or a non-normalized
/// Copenhagen source.
void validate_model(const RateModel& model);

RatePrediction copenhagen_rate(const PureState& state, std::span<const PolarizerSetting> settings);

/// Closed-form collapse prediction for the triphoton source:
/// ½(cos a cos b sin c + sin a sin b cos c)².
RatePrediction ghz_collapse_closed_form(Angle theta_a, Angle theta_b, Angle theta_c);

/// k·cos²(θc − θa − θb). Throws std::invalid_argument unless 0 < k ≤ 1.
RatePrediction time_symmetric_rate(Angle theta_a, Angle theta_b, Angle theta_c, double k);

/// ½cos²(θa − θb), shared by both theories on two-photon experiments.
RatePrediction bell_rate(Angle theta_a, Angle theta_b);

/// Dispatches to the model's rate law. Closed-form models need exactly one
/// setting per photon of their experiment (any order); Copenhagen accepts
/// any subset of the source's photons.
RatePrediction predict_rate(const RateModel& model, std::span<const PolarizerSetting> settings);

/// Number of gate operations that fit inside the coherence time, the floor of
/// tau_coherence / tau_op. Throws std::invalid_argument when tau_op <= 0 or
/// tau_coherence < 0.
std::int64_t decoherence_step_budget(double tau_op, double tau_coherence);

}  // namespace polsim
