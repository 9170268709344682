#include "polsim/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace polsim {

namespace {

constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix64_finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t setting_index) {
  return splitmix64_finalize(splitmix64_finalize(master_seed) + setting_index * kGoldenGamma);
}

EffectiveProbability effective_probability(double rate, int photons, const DetectorModel& detector) {
  const double p = rate * std::pow(detector.efficiency, photons) + detector.dark_coincidence_rate;
  if (p > 1.0) return {1.0, true};
  return {std::max(p, 0.0), false};
}

void validate_simulation_config(const SimulationConfig& config) {
  validate_model(config.model);
  if (config.settings_list.empty()) throw std::invalid_argument("no settings to simulate");
  if (config.n_emitted <= 0) throw std::invalid_argument("n_emitted must be positive");
  const double eta = config.detector.efficiency;
  if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("detector efficiency out of range (0,1]");
  const double dark = config.detector.dark_coincidence_rate;
  if (!(dark >= 0.0) || !std::isfinite(dark)) {
    throw std::invalid_argument("dark coincidence rate must be finite and >= 0");
  }
}

std::int64_t sample_binomial(std::uint64_t seed, std::int64_t n, double p) {
  if (p <= 0.0) return 0;
  if (p >= 1.0) return n;
  std::mt19937_64 engine(seed);
  std::binomial_distribution<std::int64_t> draw(n, p);
  return draw(engine);
}

std::vector<CountRecord> simulate_counts(const SimulationConfig& config) {
  validate_simulation_config(config);
  std::vector<CountRecord> records;
  records.reserve(config.settings_list.size());
  for (std::size_t i = 0; i < config.settings_list.size(); ++i) {
    const AngleSettings& settings = config.settings_list[i];
    CountRecord record;
    record.settings = settings;
    record.n_emitted = config.n_emitted;
    record.model_rate = predict_rate(config.model, settings).relative_rate;
    const auto eff = effective_probability(record.model_rate, static_cast<int>(settings.size()),
                                           config.detector);
    record.effective_probability = eff.probability;
    if (eff.clamped) record.warning = "coincidence probability exceeded 1 and was clamped";
    record.n_coincidence =
        sample_binomial(derive_stream_seed(config.master_seed, i), config.n_emitted, eff.probability);
    records.push_back(std::move(record));
  }
  return records;
}

}  // namespace polsim
