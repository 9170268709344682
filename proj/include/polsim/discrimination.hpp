#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "polsim/measurement.hpp"
#include "polsim/models.hpp"
#include "polsim/montecarlo.hpp"

namespace polsim {

/// The two models agree (to 1e-12 in Hellinger distance) at every setting.
class NoDiscriminatingSetting : public std::domain_error {
 public:
  NoDiscriminatingSetting() : std::domain_error("no discriminating setting") {}
};

/// The data carry no information about k (every setting has cos² factor ~ 0).
class Unidentifiable : public std::domain_error {
 public:
  Unidentifiable() : std::domain_error("k unidentifiable") {}
};

/// Quantile of the standard normal distribution. Acklam's rational
/// approximation followed by one Halley step against erfc; absolute error is
/// below 1e-12 on (1e-300, 1 - 1e-16).
double normal_quantile(double p);

/// Hellinger distance between Bernoulli(p) and Bernoulli(q), in [0, 1].
double bernoulli_hellinger(double p, double q);

struct DivergenceRow {
  AngleSettings settings;
  double rate_a = 0.0;
  double rate_b = 0.0;
  double abs_diff = 0.0;
};

/// Evaluates both models on every point of the grid {i·π/steps}^m, m being
/// the models' shared arity. Rows are sorted by descending |rate_a − rate_b|,
/// ties kept in grid order.
std::vector<DivergenceRow> divergence_map(const RateModel& model_a, const RateModel& model_b,
                                          int steps);

struct DiscriminationConfig {
  RateModel model_a;
  RateModel model_b;
  int angle_grid = 64;
  int refine_iterations = 50;
  double alpha = 0.01;
  double beta = 0.01;
  std::int64_t n_emitted_per_setting = 1000;
};

void validate_discrimination_config(const DiscriminationConfig& config);

struct OptimalSettings {
  AngleSettings settings;
  double rate_a = 0.0;
  double rate_b = 0.0;
  /// |rate_a − rate_b|
  double divergence = 0.0;
  /// Per-emission Hellinger distance, the quantity actually maximized.
  double hellinger = 0.0;
  /// Best Hellinger distance on the coarse grid; never above `hellinger`.
  double grid_hellinger = 0.0;
};

/// Grid search followed by coordinate-descent polishing from the three best
/// grid cells. Throws NoDiscriminatingSetting when the models coincide.
OptimalSettings optimal_settings(const DiscriminationConfig& config);

/// Emissions needed so a one-sided test of p_a against p_b has size alpha
/// and power 1 − beta, from the normal approximation. When either rate is
/// 0 or 1 a single "impossible" observation decides, and the exact bound
/// ⌈log(err) / log(1 − q)⌉ is used instead. Never below 1.
std::int64_t required_samples(double p_a, double p_b, double alpha, double beta);

enum class Decision { kModelA, kModelB, kInconclusive };

struct LikelihoodRatioOptions {
  DetectorModel detector;
  int resamples = 1000;
  std::uint64_t seed = 0;
  /// Replace any TimeSymmetricTriphoton's k with its maximum-likelihood fit
  /// (profile likelihood); refit on every bootstrap resample.
  bool fit_k = false;
};

struct LikelihoodRatioResult {
  Decision decision = Decision::kInconclusive;
  /// log L(model_a) − log L(model_b); ±infinity when one model gives an
  /// observed count probability zero.
  double log_likelihood_ratio = 0.0;
  /// Parametric-bootstrap p-value under the disfavored model.
  double p_value = 1.0;
  /// k actually used for each side when fit_k replaced it.
  std::optional<double> fitted_k_a;
  std::optional<double> fitted_k_b;
};

/// Binomial log-likelihood of the records under one model, without the
/// binomial coefficients (they cancel in any ratio).
double log_likelihood(std::span<const CountRecord> records, const RateModel& model,
                      const DetectorModel& detector = {});

LikelihoodRatioResult likelihood_ratio_test(std::span<const CountRecord> records,
                                            const RateModel& model_a, const RateModel& model_b,
                                            double alpha, const LikelihoodRatioOptions& options = {});

struct FitKOptions {
  DetectorModel detector;
  double tolerance = 1e-6;
  double lower_bound = 1e-9;
};

struct KFit {
  double k = 0.0;
  double log_likelihood = 0.0;
  /// From the expected Fisher information at the estimate.
  double standard_error = 0.0;
  std::optional<std::string> warning;
};

/// Maximum-likelihood k of the time-symmetric triphoton law by golden-section
/// search on [lower_bound, 1]. Throws Unidentifiable if no record carries
/// information about k.
KFit fit_k(std::span<const CountRecord> records, const FitKOptions& options = {});

}  // namespace polsim
