#include "polsim/discrimination.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <tuple>

namespace polsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNoDivergence = 1e-12;

AngleSettings settings_from_angles(std::span<const double> angles) {
  AngleSettings out;
  out.reserve(angles.size());
  for (std::size_t i = 0; i < angles.size(); ++i) {
    out.push_back({static_cast<int>(i), Angle(angles[i]).canonical()});
  }
  return out;
}

double hellinger_at(const RateModel& a, const RateModel& b, std::span<const double> angles) {
  const AngleSettings s = settings_from_angles(angles);
  return bernoulli_hellinger(predict_rate(a, s).relative_rate, predict_rate(b, s).relative_rate);
}

int shared_arity(const RateModel& a, const RateModel& b) {
  const int m = model_arity(a);
  if (m != model_arity(b)) {
    throw std::invalid_argument("models predict experiments of different arity (" +
                                std::to_string(m) + " vs " + std::to_string(model_arity(b)) + ")");
  }
  return m;
}

// x log p + (n − x) log(1 − p) with 0·log 0 = 0.
double binomial_log_likelihood(std::int64_t n, std::int64_t x, double p) {
  double ll = 0.0;
  if (x > 0) ll += p > 0.0 ? static_cast<double>(x) * std::log(p) : -kInf;
  if (n - x > 0) ll += p < 1.0 ? static_cast<double>(n - x) * std::log1p(-p) : -kInf;
  return ll;
}

bool is_triphoton_timesym(const RateModel& m) { return std::holds_alternative<TimeSymmetricTriphoton>(m); }

// Canonical record order so the test does not depend on how records arrive.
std::vector<CountRecord> sorted_records(std::span<const CountRecord> records) {
  std::vector<CountRecord> out(records.begin(), records.end());
  auto key = [](const CountRecord& r) {
    std::vector<std::pair<int, double>> k;
    for (const auto& s : r.settings) k.emplace_back(s.photon_index, s.angle.radians());
    return std::make_tuple(k, r.n_emitted, r.n_coincidence);
  };
  std::stable_sort(out.begin(), out.end(),
                   [&](const CountRecord& x, const CountRecord& y) { return key(x) < key(y); });
  return out;
}

// Replaces a time-symmetric triphoton model's k by its fit to `records`.
RateModel profiled(const RateModel& model, std::span<const CountRecord> records,
                   const DetectorModel& detector, std::optional<double>& fitted) {
  if (!is_triphoton_timesym(model)) return model;
  FitKOptions opts;
  opts.detector = detector;
  const double k = fit_k(records, opts).k;
  fitted = k;
  return TimeSymmetricTriphoton{k};
}

struct Evaluated {
  double log_lr = 0.0;
  std::optional<double> k_a, k_b;
};

Evaluated evaluate(std::span<const CountRecord> records, const RateModel& a, const RateModel& b,
                   const LikelihoodRatioOptions& options) {
  Evaluated out;
  RateModel model_a = a, model_b = b;
  if (options.fit_k) {
    model_a = profiled(a, records, options.detector, out.k_a);
    model_b = profiled(b, records, options.detector, out.k_b);
  }
  const double la = log_likelihood(records, model_a, options.detector);
  const double lb = log_likelihood(records, model_b, options.detector);
  if (std::isinf(la) && std::isinf(lb)) {
    out.log_lr = std::numeric_limits<double>::quiet_NaN();
  } else if (std::isinf(la)) {
    out.log_lr = -kInf;
  } else if (std::isinf(lb)) {
    out.log_lr = kInf;
  } else {
    out.log_lr = la - lb;
  }
  return out;
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal quantile needs p in (0,1)");
  static constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02,
                                           -2.759285104469687e+02, 1.383577518672690e+02,
                                           -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02,
                                           -1.556989798598866e+02, 6.680131188771972e+01,
                                           -1.328068155288572e+01};
  static constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01,
                                           -2.400758277161838e+00, -2.549671010190048e+00,
                                           4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01,
                                           2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  auto tail = [&](double q) {
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  };

  double x;
  if (p < p_low) {
    x = tail(std::sqrt(-2.0 * std::log(p)));
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    x = -tail(std::sqrt(-2.0 * std::log1p(-p)));
  }

  // Halley refinement
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

double bernoulli_hellinger(double p, double q) {
  // sum-of-squares form; 1 - (sqrt(pq) + sqrt((1-p)(1-q))) loses everything
  // to cancellation when p and q are close
  const double d0 = std::sqrt(p) - std::sqrt(q);
  const double d1 = std::sqrt(1.0 - p) - std::sqrt(1.0 - q);
  return std::sqrt(0.5 * (d0 * d0 + d1 * d1));
}

std::vector<DivergenceRow> divergence_map(const RateModel& model_a, const RateModel& model_b,
                                          int steps) {
  if (steps < 2) throw std::invalid_argument("angle grid needs at least 2 steps per axis");
  const int m = shared_arity(model_a, model_b);

  std::size_t total = 1;
  for (int i = 0; i < m; ++i) total *= static_cast<std::size_t>(steps);

  std::vector<DivergenceRow> rows;
  rows.reserve(total);
  std::vector<int> counter(static_cast<std::size_t>(m), 0);
  const double step = std::numbers::pi / steps;
  for (std::size_t cell = 0; cell < total; ++cell) {
    // photon a is the slowest-varying axis
    std::size_t rest = cell;
    for (int axis = m - 1; axis >= 0; --axis) {
      counter[axis] = static_cast<int>(rest % steps);
      rest /= steps;
    }
    DivergenceRow row;
    row.settings.reserve(m);
    for (int axis = 0; axis < m; ++axis) row.settings.push_back({axis, Angle(counter[axis] * step)});
    row.rate_a = predict_rate(model_a, row.settings).relative_rate;
    row.rate_b = predict_rate(model_b, row.settings).relative_rate;
    row.abs_diff = std::abs(row.rate_a - row.rate_b);
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const DivergenceRow& x, const DivergenceRow& y) { return x.abs_diff > y.abs_diff; });
  return rows;
}

void validate_discrimination_config(const DiscriminationConfig& config) {
  validate_model(config.model_a);
  validate_model(config.model_b);
  shared_arity(config.model_a, config.model_b);
  if (config.angle_grid < 2) throw std::invalid_argument("angle grid needs at least 2 steps per axis");
  if (config.refine_iterations < 0) throw std::invalid_argument("refine_iterations must be >= 0");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw std::invalid_argument("alpha out of range (0,1)");
  if (!(config.beta > 0.0 && config.beta < 1.0)) throw std::invalid_argument("beta out of range (0,1)");
  if (config.n_emitted_per_setting <= 0) throw std::invalid_argument("n_emitted_per_setting must be positive");
}

OptimalSettings optimal_settings(const DiscriminationConfig& config) {
  validate_discrimination_config(config);
  const auto rows = divergence_map(config.model_a, config.model_b, config.angle_grid);

  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    scored.emplace_back(bernoulli_hellinger(rows[i].rate_a, rows[i].rate_b), i);
  }
  const std::size_t starts = std::min<std::size_t>(3, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + starts, scored.end(),
                    [](const auto& x, const auto& y) {
                      return x.first > y.first || (x.first == y.first && x.second < y.second);
                    });
  const double grid_best = scored.front().first;

  std::vector<double> best_angles;
  double best = -1.0;
  for (std::size_t start = 0; start < starts; ++start) {
    std::vector<double> angles;
    for (const auto& s : rows[scored[start].second].settings) angles.push_back(s.angle.radians());
    double value = scored[start].first;
    double h = std::numbers::pi / config.angle_grid;
    for (int iter = 0; iter < config.refine_iterations; ++iter) {
      bool improved = false;
      for (std::size_t axis = 0; axis < angles.size(); ++axis) {
        for (double dir : {1.0, -1.0}) {
          std::vector<double> trial = angles;
          trial[axis] += dir * h;
          const double v = hellinger_at(config.model_a, config.model_b, trial);
          if (v > value) {
            value = v;
            angles = std::move(trial);
            improved = true;
            break;
          }
        }
      }
      if (!improved) h *= 0.5;
    }
    if (value > best) {
      best = value;
      best_angles = angles;
    }
  }
  if (best <= kNoDivergence) throw NoDiscriminatingSetting();

  OptimalSettings out;
  out.settings = settings_from_angles(best_angles);
  out.rate_a = predict_rate(config.model_a, out.settings).relative_rate;
  out.rate_b = predict_rate(config.model_b, out.settings).relative_rate;
  out.divergence = std::abs(out.rate_a - out.rate_b);
  out.hellinger = bernoulli_hellinger(out.rate_a, out.rate_b);
  out.grid_hellinger = grid_best;
  return out;
}

std::int64_t required_samples(double p_a, double p_b, double alpha, double beta) {
  for (double p : {p_a, p_b}) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("rates must lie in [0,1]");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha out of range (0,1)");
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta out of range (0,1)");
  if (p_a == p_b) throw std::invalid_argument("rates are equal; no sample size separates them");

  auto degenerate = [](double p) { return p == 0.0 || p == 1.0; };
  const bool deg_a = degenerate(p_a), deg_b = degenerate(p_b);
  if (deg_a && deg_b) return 1;
  if (deg_a || deg_b) {
    // One outcome is impossible under the degenerate model; the other model
    // produces it with probability q per emission.
    const double p_fixed = deg_a ? p_a : p_b;
    const double p_other = deg_a ? p_b : p_a;
    const double err = deg_a ? beta : alpha;
    const double q = p_fixed == 0.0 ? p_other : 1.0 - p_other;
    const double n = std::ceil(std::log(err) / std::log1p(-q));
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(n));
  }

  const double z_alpha = normal_quantile(1.0 - alpha);
  const double z_beta = normal_quantile(1.0 - beta);
  const double root = (z_alpha * std::sqrt(p_a * (1.0 - p_a)) + z_beta * std::sqrt(p_b * (1.0 - p_b))) /
                      (p_a - p_b);
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(root * root)));
}

double log_likelihood(std::span<const CountRecord> records, const RateModel& model,
                      const DetectorModel& detector) {
  double total = 0.0;
  for (const auto& r : records) {
    const double rate = predict_rate(model, r.settings).relative_rate;
    const double p = effective_probability(rate, static_cast<int>(r.settings.size()), detector).probability;
    total += binomial_log_likelihood(r.n_emitted, r.n_coincidence, p);
  }
  return total;
}

LikelihoodRatioResult likelihood_ratio_test(std::span<const CountRecord> input,
                                            const RateModel& model_a, const RateModel& model_b,
                                            double alpha, const LikelihoodRatioOptions& options) {
  if (input.empty()) throw std::invalid_argument("likelihood ratio test needs at least one record");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha out of range (0,1)");
  if (options.resamples < 1) throw std::invalid_argument("resamples must be >= 1");
  validate_model(model_a);
  validate_model(model_b);
  for (const auto& r : input) {
    if (r.n_coincidence < 0 || r.n_coincidence > r.n_emitted) {
      throw std::invalid_argument("record has coincidences outside [0, n_emitted]");
    }
  }

  const std::vector<CountRecord> records = sorted_records(input);
  const Evaluated observed = evaluate(records, model_a, model_b, options);

  LikelihoodRatioResult result;
  result.log_likelihood_ratio = observed.log_lr;
  result.fitted_k_a = observed.k_a;
  result.fitted_k_b = observed.k_b;

  if (std::isnan(observed.log_lr) || observed.log_lr == 0.0) {
    // both models impossible, or perfectly tied
    result.log_likelihood_ratio = std::isnan(observed.log_lr) ? observed.log_lr : 0.0;
    return result;
  }
  const bool favors_a = observed.log_lr > 0.0;
  const Decision favored = favors_a ? Decision::kModelA : Decision::kModelB;
  if (std::isinf(observed.log_lr)) {
    result.decision = favored;
    result.p_value = 0.0;
    return result;
  }

  // Parametric bootstrap of the favored-over-disfavored statistic under the
  // disfavored model (with its fitted k when profiling).
  RateModel null_model = favors_a ? model_b : model_a;
  if (options.fit_k && is_triphoton_timesym(null_model)) {
    null_model = TimeSymmetricTriphoton{*(favors_a ? observed.k_b : observed.k_a)};
  }
  const double statistic = std::abs(observed.log_lr);
  const double tie_slack = 1e-12 * std::max(1.0, statistic);

  std::vector<double> null_p;
  for (const auto& r : records) {
    const double rate = predict_rate(null_model, r.settings).relative_rate;
    null_p.push_back(effective_probability(rate, static_cast<int>(r.settings.size()), options.detector).probability);
  }

  std::int64_t at_least_as_extreme = 0;
  std::vector<CountRecord> resampled = records;
  for (int rep = 0; rep < options.resamples; ++rep) {
    const std::uint64_t rep_seed = derive_stream_seed(options.seed, static_cast<std::uint64_t>(rep));
    for (std::size_t j = 0; j < resampled.size(); ++j) {
      resampled[j].n_coincidence = sample_binomial(derive_stream_seed(rep_seed, j), resampled[j].n_emitted, null_p[j]);
    }
    const double lr = evaluate(resampled, model_a, model_b, options).log_lr;
    if (std::isnan(lr)) continue;
    const double t = favors_a ? lr : -lr;
    if (t >= statistic - tie_slack) ++at_least_as_extreme;
  }
  result.p_value = static_cast<double>(at_least_as_extreme + 1) / (options.resamples + 1);
  result.decision = result.p_value < alpha ? favored : Decision::kInconclusive;
  return result;
}

KFit fit_k(std::span<const CountRecord> records, const FitKOptions& options) {
  if (records.empty()) throw std::invalid_argument("fit_k needs at least one record");
  if (!(options.tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (!(options.lower_bound > 0.0 && options.lower_bound < 1.0)) {
    throw std::invalid_argument("lower bound must lie in (0,1)");
  }

  struct Term {
    std::int64_t n, x;
    double slope;  // dp/dk
  };
  std::vector<Term> informative;
  const double eta3 = std::pow(options.detector.efficiency, 3);
  for (const auto& r : records) {
    if (r.settings.size() != 3) throw std::invalid_argument("fit_k needs triphoton records");
    // validates photon coverage as a side effect
    const double c2 = predict_rate(TimeSymmetricTriphoton{1.0}, r.settings).relative_rate;
    if (c2 > 1e-12) informative.push_back({r.n_emitted, r.n_coincidence, c2 * eta3});
  }
  if (informative.empty()) throw Unidentifiable();

  const double dark = options.detector.dark_coincidence_rate;
  auto ll = [&](double k) {
    double total = 0.0;
    for (const auto& t : informative) {
      total += binomial_log_likelihood(t.n, t.x, std::min(1.0, k * t.slope + dark));
    }
    return total;
  };

  // golden-section search for the maximum of a concave function
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = options.lower_bound, hi = 1.0;
  double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
  double f1 = ll(x1), f2 = ll(x2);
  while (hi - lo > options.tolerance) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = ll(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = ll(x1);
    }
  }
  double k = 0.5 * (lo + hi);
  // the optimum may sit on a boundary the interior probes never reach
  for (double edge : {options.lower_bound, 1.0}) {
    if (ll(edge) > ll(k)) k = edge;
  }

  KFit fit;
  fit.k = k;
  double info = 0.0;
  for (const auto& t : informative) {
    const double p = std::min(1.0, k * t.slope + dark);
    if (p > 0.0 && p < 1.0) info += static_cast<double>(t.n) * t.slope * t.slope / (p * (1.0 - p));
  }
  fit.standard_error = info > 0.0 ? 1.0 / std::sqrt(info) : kInf;

  // the full likelihood includes uninformative settings, which may rule the law out
  double total = 0.0;
  for (const auto& r : records) {
    const double rate = predict_rate(TimeSymmetricTriphoton{k}, r.settings).relative_rate;
    total += binomial_log_likelihood(r.n_emitted, r.n_coincidence,
                                     effective_probability(rate, 3, options.detector).probability);
  }
  fit.log_likelihood = total;

  if (k - options.lower_bound <= 2.0 * options.tolerance) {
    fit.warning = "estimate at the lower search bound";
  } else if (1.0 - k <= 2.0 * options.tolerance) {
    fit.warning = "estimate at the upper bound k = 1";
  }
  return fit;
}

}  // namespace polsim
