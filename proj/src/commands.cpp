#include "polsim/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "polsim/discrimination.hpp"
#include "polsim/montecarlo.hpp"

namespace polsim {

namespace {

using nlohmann::json;

// The embedded config records the run, not where its output was written.
std::string embedded_config(RunConfig config) {
  config.output_path.reset();
  return serialize_config(config);
}

std::string preamble(Command command, const RunConfig& config) {
  std::string out;
  out += fmt::format("# command: {}\n", to_string(command));
  out += fmt::format("# schema_version: {}\n", config.schema_version);
  out += fmt::format("# seed: {}\n", config.seed);
  out += "# config:\n";
  std::istringstream lines(embedded_config(config));
  for (std::string line; std::getline(lines, line);) out += "#   " + line + "\n";
  return out;
}

json header(Command command, const RunConfig& config) {
  return json{{"schema_version", config.schema_version},
              {"command", std::string(to_string(command))},
              {"seed", config.seed},
              {"config", embedded_config(config)}};
}

// theta_a, theta_b, theta_c with theta_c blank (CSV) or null (JSON) for
// two-photon runs.
std::array<std::optional<double>, 3> angle_columns(const AngleSettings& settings) {
  std::array<std::optional<double>, 3> out;
  for (const auto& s : settings) out[s.photon_index] = s.angle.radians();
  return out;
}

std::string csv_angles(const AngleSettings& settings) {
  std::string out;
  const auto cols = angle_columns(settings);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ',';
    if (cols[i]) out += format_number(*cols[i]);
  }
  return out;
}

json json_angles(const AngleSettings& settings) {
  static constexpr const char* names[] = {"theta_a", "theta_b", "theta_c"};
  json row = json::object();
  const auto cols = angle_columns(settings);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    row[names[i]] = cols[i] ? json(*cols[i]) : json(nullptr);
  }
  return row;
}

// JSON has no infinities; the log-likelihood ratio may legitimately be one.
json json_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "+inf" : "-inf";
  return value;
}

Artifact predict(const RunConfig& config) {
  const RateModel model = make_model(config, config.model);
  const auto settings_list = expand_settings(config);
  Artifact artifact;
  if (config.format == OutputFormat::kCsv) {
    std::string& out = artifact.text;
    out = preamble(Command::kPredict, config);
    out += "theta_a,theta_b,theta_c,rate\n";
    for (const auto& s : settings_list) {
      out += csv_angles(s) + ',' + format_number(predict_rate(model, s).relative_rate) + '\n';
    }
  } else {
    json doc = header(Command::kPredict, config);
    json rows = json::array();
    for (const auto& s : settings_list) {
      json row = json_angles(s);
      row["rate"] = predict_rate(model, s).relative_rate;
      rows.push_back(std::move(row));
    }
    doc["rows"] = std::move(rows);
    artifact.text = doc.dump(2) + "\n";
  }
  return artifact;
}

Artifact simulate(const RunConfig& config) {
  SimulationConfig sim;
  sim.model = make_model(config, config.model);
  sim.settings_list = expand_settings(config);
  sim.n_emitted = config.n_emitted;
  sim.detector = {config.efficiency, config.dark_rate};
  sim.master_seed = config.seed;
  const auto records = simulate_counts(sim);

  std::vector<std::string> warnings;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].warning) warnings.push_back(fmt::format("row {}: {}", i, *records[i].warning));
  }

  Artifact artifact;
  if (config.format == OutputFormat::kCsv) {
    std::string& out = artifact.text;
    out = preamble(Command::kSimulate, config);
    for (const auto& w : warnings) out += "# warning: " + w + "\n";
    out += "theta_a,theta_b,theta_c,rate,n_emitted,n_coincidence,seed\n";
    for (const auto& r : records) {
      out += fmt::format("{},{},{},{},{}\n", csv_angles(r.settings), format_number(r.model_rate), r.n_emitted,
                         r.n_coincidence, config.seed);
    }
  } else {
    json doc = header(Command::kSimulate, config);
    doc["warnings"] = warnings;
    json rows = json::array();
    for (const auto& r : records) {
      json row = json_angles(r.settings);
      row["rate"] = r.model_rate;
      row["n_emitted"] = r.n_emitted;
      row["n_coincidence"] = r.n_coincidence;
      row["seed"] = config.seed;
      rows.push_back(std::move(row));
    }
    doc["rows"] = std::move(rows);
    artifact.text = doc.dump(2) + "\n";
  }
  if (!warnings.empty()) artifact.summary = fmt::format("{} setting(s) had clamped probabilities", warnings.size());
  return artifact;
}

std::string decision_tag(Decision d, const RateModel& a, const RateModel& b) {
  switch (d) {
    case Decision::kModelA: return model_tag(a);
    case Decision::kModelB: return model_tag(b);
    case Decision::kInconclusive: break;
  }
  return "inconclusive";
}

Artifact discriminate(const RunConfig& config) {
  DiscriminationConfig dc{make_model(config, ModelChoice::kCopenhagen),
                          make_model(config, ModelChoice::kTimeSymmetric),
                          config.grid,
                          config.refine_iterations,
                          config.alpha,
                          config.beta,
                          config.n_emitted};
  const OptimalSettings best = optimal_settings(dc);
  const DetectorModel detector{config.efficiency, config.dark_rate};
  const int m = static_cast<int>(best.settings.size());
  const double p_a = effective_probability(best.rate_a, m, detector).probability;
  const double p_b = effective_probability(best.rate_b, m, detector).probability;
  const std::int64_t required_n = required_samples(p_a, p_b, config.alpha, config.beta);

  SimulationConfig sim;
  sim.model = make_model(config, config.model);
  sim.settings_list = {best.settings};
  sim.n_emitted = config.n_emitted;
  sim.detector = detector;
  sim.master_seed = config.seed;
  const auto records = simulate_counts(sim);

  LikelihoodRatioOptions lr_options;
  lr_options.detector = detector;
  lr_options.resamples = config.resamples;
  lr_options.seed = derive_stream_seed(config.seed, 1);
  lr_options.fit_k = config.fit_k;
  const auto test = likelihood_ratio_test(records, dc.model_a, dc.model_b, config.alpha, lr_options);

  json doc = header(Command::kDiscriminate, config);
  doc["model_a"] = model_tag(dc.model_a);
  doc["model_b"] = model_tag(dc.model_b);
  doc["best_settings"] = json_angles(best.settings);
  doc["rate_a"] = best.rate_a;
  doc["rate_b"] = best.rate_b;
  doc["divergence"] = best.divergence;
  doc["hellinger"] = best.hellinger;
  doc["grid_hellinger"] = best.grid_hellinger;
  doc["alpha"] = config.alpha;
  doc["beta"] = config.beta;
  doc["required_n"] = required_n;
  doc["generating_model"] = std::string(to_string(config.model));
  doc["n_emitted"] = records.front().n_emitted;
  doc["n_coincidence"] = records.front().n_coincidence;
  doc["decision"] = decision_tag(test.decision, dc.model_a, dc.model_b);
  doc["log_likelihood_ratio"] = json_real(test.log_likelihood_ratio);
  doc["p_value_estimate"] = test.p_value;
  if (test.fitted_k_b) doc["fitted_k"] = *test.fitted_k_b;

  Artifact artifact;
  artifact.text = doc.dump(2) + "\n";
  artifact.summary = fmt::format("decision: {} (required_n = {}, |delta| = {})", doc["decision"].get<std::string>(),
                                 required_n, format_number(best.divergence));
  return artifact;
}

Artifact verify(const RunConfig& config) {
  const RateModel copenhagen = make_model(config, ModelChoice::kCopenhagen);
  const RateModel timesym = make_model(config, ModelChoice::kTimeSymmetric);
  const int m = photon_count(config);
  const int points = config.verify_grid;

  std::size_t total = 1;
  for (int i = 0; i < m; ++i) total *= static_cast<std::size_t>(points);

  double worst = -1.0;
  AngleSettings worst_settings;
  AngleSettings s(static_cast<std::size_t>(m));
  for (std::size_t cell = 0; cell < total; ++cell) {
    std::size_t rest = cell;
    for (int axis = m - 1; axis >= 0; --axis) {
      const auto i = static_cast<int>(rest % points);
      rest /= points;
      s[axis] = {axis, Angle(std::numbers::pi * i / (points - 1))};
    }
    const double diff = std::abs(predict_rate(copenhagen, s).relative_rate - predict_rate(timesym, s).relative_rate);
    if (diff > worst) {
      worst = diff;
      worst_settings = s;
    }
  }
  const bool pass = worst <= kVerifyTolerance;

  json doc = header(Command::kVerify, config);
  doc["grid_points"] = points;
  doc["settings_evaluated"] = total;
  doc["max_abs_diff"] = worst;
  doc["worst_settings"] = json_angles(worst_settings);
  doc["tolerance"] = kVerifyTolerance;
  doc["pass"] = pass;

  Artifact artifact;
  artifact.text = doc.dump(2) + "\n";
  artifact.exit_code = pass ? exit_code::kSuccess : exit_code::kVerifyFailed;
  artifact.summary = fmt::format("verify: max |delta| = {} over {} settings: {}", format_number(worst), total,
                                 pass ? "PASS" : "FAIL");
  return artifact;
}

}  // namespace

std::optional<Command> parse_command(std::string_view name) {
  if (name == "predict") return Command::kPredict;
  if (name == "simulate") return Command::kSimulate;
  if (name == "discriminate") return Command::kDiscriminate;
  if (name == "verify") return Command::kVerify;
  return std::nullopt;
}

std::string_view to_string(Command command) {
  switch (command) {
    case Command::kPredict: return "predict";
    case Command::kSimulate: return "simulate";
    case Command::kDiscriminate: return "discriminate";
    case Command::kVerify: return "verify";
  }
  return "?";
}

std::string format_number(double value) { return fmt::format("{:.17g}", value); }

Artifact execute(Command command, const RunConfig& config) {
  validate_config(config);
  switch (command) {
    case Command::kPredict: return predict(config);
    case Command::kSimulate: return simulate(config);
    case Command::kDiscriminate: return discriminate(config);
    case Command::kVerify: return verify(config);
  }
  throw std::invalid_argument("unknown command");
}

int run_command(Command command, const RunConfig& config, const CommandOptions& options, std::ostream& out,
                std::ostream& err) {
  namespace fs = std::filesystem;
  // Check the destination first so a long run is not wasted.
  if (config.output_path && !options.force && fs::exists(*config.output_path)) {
    err << "error: output file " << *config.output_path << " exists (use --force to overwrite)\n";
    return exit_code::kIo;
  }

  Artifact artifact;
  try {
    artifact = execute(command, config);
  } catch (const std::logic_error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kUsage;
  } catch (const std::runtime_error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kUsage;
  }

  if (config.output_path) {
    std::ofstream file(*config.output_path, std::ios::binary | std::ios::trunc);
    file << artifact.text;
    file.close();
    if (!file) {
      err << "error: cannot write " << *config.output_path << "\n";
      return exit_code::kIo;
    }
  } else {
    out << artifact.text;
  }
  if (!artifact.summary.empty()) err << artifact.summary << "\n";
  return artifact.exit_code;
}

}  // namespace polsim
