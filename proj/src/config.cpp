#include "polsim/config.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <utility>

#include <yaml-cpp/yaml.h>

namespace polsim {

namespace {

constexpr std::string_view kAxisNames[] = {"theta_a", "theta_b", "theta_c"};

std::string describe(const std::string& key, int line, const std::string& message) {
  std::string out = "config error";
  if (line > 0) out += " at line " + std::to_string(line);
  if (!key.empty()) out += " (key '" + key + "')";
  return out + ": " + message;
}

int line_of(const YAML::Node& node) { return node.Mark().line + 1; }

// Walks one YAML map, handing out typed values and remembering key lines.
class MapReader {
 public:
  MapReader(const YAML::Node& node, std::string prefix, std::map<std::string, int>& lines)
      : node_(node), prefix_(std::move(prefix)), lines_(lines) {
    if (!node_.IsMap()) throw ConfigError(prefix_.empty() ? "" : prefix_, line_of(node_), "expected a mapping");
  }

  // Rejects keys outside `allowed`.
  void check_keys(std::initializer_list<std::string_view> allowed) const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      const std::string key = it->first.as<std::string>();
      bool ok = false;
      for (auto a : allowed) ok = ok || key == a;
      if (!ok) throw ConfigError(path(key), line_of(it->first), "unknown key");
    }
  }

  bool has(const std::string& key) const { return static_cast<bool>(std::as_const(node_)[key]); }

  YAML::Node get(const std::string& key) const {
    YAML::Node n = std::as_const(node_)[key];
    lines_[path(key)] = line_of(n);
    return n;
  }

  std::string path(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

  double number(const std::string& key) const { return to_number(get(key), path(key)); }

  std::string text(const std::string& key) const {
    const YAML::Node n = get(key);
    if (!n.IsScalar()) throw ConfigError(path(key), line_of(n), "expected a string");
    return n.Scalar();
  }

  template <class Int>
  Int integer(const std::string& key) const {
    const YAML::Node n = get(key);
    if (!n.IsScalar()) throw ConfigError(path(key), line_of(n), "expected an integer");
    const std::string& s = n.Scalar();
    Int value{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
      throw ConfigError(path(key), line_of(n), "expected an integer, got '" + s + "'");
    }
    return value;
  }

  bool boolean(const std::string& key) const {
    const YAML::Node n = get(key);
    try {
      return n.as<bool>();
    } catch (const YAML::Exception&) {
      throw ConfigError(path(key), line_of(n), "expected true or false");
    }
  }

  static double to_number(const YAML::Node& n, const std::string& key) {
    if (!n.IsScalar()) throw ConfigError(key, line_of(n), "expected a number");
    double value = 0.0;
    try {
      value = n.as<double>();
    } catch (const YAML::Exception&) {
      throw ConfigError(key, line_of(n), "expected a number in radians or plain units, got '" + n.Scalar() + "'");
    }
    if (!std::isfinite(value)) throw ConfigError(key, line_of(n), "value must be finite");
    return value;
  }

 private:
  YAML::Node node_;
  std::string prefix_;
  std::map<std::string, int>& lines_;
};

template <class Enum, std::size_t N>
Enum pick(const std::string& value, const std::string& key, int line,
          const std::pair<std::string_view, Enum> (&choices)[N]) {
  std::string options;
  for (const auto& [name, e] : choices) {
    if (value == name) return e;
    options += (options.empty() ? "" : ", ") + std::string(name);
  }
  throw ConfigError(key, line, "unknown value '" + value + "' (expected one of: " + options + ")");
}

Amplitude parse_amplitude(const YAML::Node& n, const std::string& key) {
  if (n.IsScalar()) return {MapReader::to_number(n, key), 0.0};
  if (n.IsSequence() && n.size() == 2) {
    return {MapReader::to_number(n[0], key), MapReader::to_number(n[1], key)};
  }
  throw ConfigError(key, line_of(n), "amplitude must be a number or a [re, im] pair");
}

RunConfig parse_document(const YAML::Node& root, std::map<std::string, int>& lines) {
  RunConfig c;
  MapReader top(root, "", lines);
  top.check_keys({"schema_version", "experiment", "amplitudes", "model", "k", "angles", "sweep", "seed",
                  "n_emitted", "efficiency", "dark_rate", "output", "discriminate", "verify"});

  if (top.has("schema_version")) {
    c.schema_version = top.integer<int>("schema_version");
    if (c.schema_version != kSchemaVersion) {
      throw ConfigError("schema_version", lines["schema_version"],
                        "unsupported schema_version " + std::to_string(c.schema_version));
    }
  }

  if (!top.has("experiment")) throw ConfigError("experiment", line_of(root), "missing required key");
  c.experiment = pick<Experiment>(top.text("experiment"), "experiment", lines["experiment"],
                                  {{"bell", Experiment::kBell}, {"ghz", Experiment::kGhz}, {"custom", Experiment::kCustom}});

  if (top.has("amplitudes")) {
    const YAML::Node list = top.get("amplitudes");
    if (!list.IsSequence()) throw ConfigError("amplitudes", line_of(list), "expected a list");
    for (const auto& a : list) c.amplitudes.push_back(parse_amplitude(a, "amplitudes"));
  }

  if (!top.has("model")) throw ConfigError("model", line_of(root), "missing required key");
  c.model = pick<ModelChoice>(top.text("model"), "model", lines["model"],
                              {{"copenhagen", ModelChoice::kCopenhagen}, {"timesym", ModelChoice::kTimeSymmetric}});

  if (top.has("k")) c.k = top.number("k");

  if (top.has("angles")) {
    const YAML::Node list = top.get("angles");
    if (!list.IsSequence()) throw ConfigError("angles", line_of(list), "expected a list of radians");
    for (const auto& a : list) c.angles.push_back(MapReader::to_number(a, "angles"));
  }

  if (top.has("sweep")) {
    const YAML::Node node = top.get("sweep");
    MapReader sweep(node, "sweep", lines);
    sweep.check_keys({"axis", "start", "stop", "steps"});
    Sweep s;
    for (const char* required : {"axis", "start", "stop", "steps"}) {
      if (!sweep.has(required)) throw ConfigError(sweep.path(required), line_of(node), "missing required key");
    }
    s.axis = pick<int>(sweep.text("axis"), "sweep.axis", lines["sweep.axis"],
                       {{"theta_a", 0}, {"theta_b", 1}, {"theta_c", 2}});
    s.start = sweep.number("start");
    s.stop = sweep.number("stop");
    s.steps = sweep.integer<int>("steps");
    c.sweep = s;
  }

  if (top.has("seed")) c.seed = top.integer<std::uint64_t>("seed");
  if (top.has("n_emitted")) c.n_emitted = top.integer<std::int64_t>("n_emitted");
  if (top.has("efficiency")) c.efficiency = top.number("efficiency");
  if (top.has("dark_rate")) c.dark_rate = top.number("dark_rate");

  if (top.has("output")) {
    MapReader out(top.get("output"), "output", lines);
    out.check_keys({"path", "format"});
    if (out.has("path")) c.output_path = out.text("path");
    if (out.has("format")) {
      c.format = pick<OutputFormat>(out.text("format"), "output.format", lines["output.format"],
                                    {{"csv", OutputFormat::kCsv}, {"json", OutputFormat::kJson}});
    }
  }

  if (top.has("discriminate")) {
    MapReader d(top.get("discriminate"), "discriminate", lines);
    d.check_keys({"grid", "refine_iterations", "alpha", "beta", "resamples", "fit_k"});
    if (d.has("grid")) c.grid = d.integer<int>("grid");
    if (d.has("refine_iterations")) c.refine_iterations = d.integer<int>("refine_iterations");
    if (d.has("alpha")) c.alpha = d.number("alpha");
    if (d.has("beta")) c.beta = d.number("beta");
    if (d.has("resamples")) c.resamples = d.integer<int>("resamples");
    if (d.has("fit_k")) c.fit_k = d.boolean("fit_k");
  }

  if (top.has("verify")) {
    MapReader v(top.get("verify"), "verify", lines);
    v.check_keys({"grid"});
    if (v.has("grid")) c.verify_grid = v.integer<int>("grid");
  }
  return c;
}

void emit_number(YAML::Emitter& out, double value) { out << value; }

}  // namespace

ConfigError::ConfigError(std::string key, int line, const std::string& message)
    : std::runtime_error(describe(key, line, message)),
      key_(std::move(key)),
      line_(line),
      message_(message) {}

std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::kBell: return "bell";
    case Experiment::kGhz: return "ghz";
    case Experiment::kCustom: return "custom";
  }
  return "?";
}

std::string_view to_string(ModelChoice m) {
  return m == ModelChoice::kCopenhagen ? "copenhagen" : "timesym";
}

std::string_view to_string(OutputFormat f) { return f == OutputFormat::kCsv ? "csv" : "json"; }

int photon_count(const RunConfig& config) {
  switch (config.experiment) {
    case Experiment::kBell: return 2;
    case Experiment::kGhz: return 3;
    case Experiment::kCustom: break;
  }
  const std::size_t d = config.amplitudes.size();
  return d == 4 ? 2 : d == 8 ? 3 : 0;
}

void validate_config(const RunConfig& c) {
  auto fail = [](const char* key, const std::string& msg) { throw ConfigError(key, 0, msg); };

  if (c.schema_version != kSchemaVersion) fail("schema_version", "unsupported schema_version");
  if (c.experiment == Experiment::kCustom) {
    if (c.amplitudes.size() != 4 && c.amplitudes.size() != 8) {
      fail("amplitudes", "custom state needs 4 (two photons) or 8 (three photons) amplitudes");
    }
    double sq = 0.0;
    for (const auto& a : c.amplitudes) sq += std::norm(a);
    if (std::abs(std::sqrt(sq) - 1.0) > 1e-9) fail("amplitudes", "custom amplitudes must have unit norm within 1e-9");
  } else if (!c.amplitudes.empty()) {
    fail("amplitudes", "amplitudes are only allowed with experiment: custom");
  }

  const int m = photon_count(c);
  if (c.angles.empty() && !c.sweep) fail("angles", "either angles or sweep is required");
  if (!c.angles.empty() && static_cast<int>(c.angles.size()) != m) {
    fail("angles", "expected " + std::to_string(m) + " angles for this experiment, got " +
                       std::to_string(c.angles.size()));
  }
  for (double a : c.angles) {
    if (!std::isfinite(a)) fail("angles", "angles must be finite");
  }
  if (c.sweep) {
    if (c.sweep->axis < 0 || c.sweep->axis >= m) fail("sweep.axis", "sweep axis does not exist in this experiment");
    if (c.sweep->steps < 1) fail("sweep.steps", "sweep steps must be >= 1");
    if (!std::isfinite(c.sweep->start)) fail("sweep.start", "must be finite");
    if (!std::isfinite(c.sweep->stop)) fail("sweep.stop", "must be finite");
  }
  if (!(c.k > 0.0 && c.k <= 1.0)) fail("k", "k out of range (0,1]");
  if (c.n_emitted <= 0) fail("n_emitted", "n_emitted must be positive");
  if (!(c.efficiency > 0.0 && c.efficiency <= 1.0)) fail("efficiency", "efficiency out of range (0,1]");
  if (!(c.dark_rate >= 0.0 && c.dark_rate <= 1.0)) fail("dark_rate", "dark_rate out of range [0,1]");
  if (c.grid < 2) fail("discriminate.grid", "grid needs at least 2 steps per axis");
  if (c.refine_iterations < 0) fail("discriminate.refine_iterations", "must be >= 0");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) fail("discriminate.alpha", "alpha out of range (0,1)");
  if (!(c.beta > 0.0 && c.beta < 1.0)) fail("discriminate.beta", "beta out of range (0,1)");
  if (c.resamples < 1) fail("discriminate.resamples", "resamples must be >= 1");
  if (c.verify_grid < 2) fail("verify.grid", "verify grid needs at least 2 points per axis");
}

RunConfig parse_config(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError("", e.mark.line + 1, "malformed document: " + e.msg);
  }
  if (!root.IsDefined() || root.IsNull()) throw ConfigError("", 0, "empty document");

  std::map<std::string, int> lines;
  RunConfig config = parse_document(root, lines);
  try {
    validate_config(config);
  } catch (const ConfigError& e) {
    const auto it = lines.find(e.key());
    throw ConfigError(e.key(), it == lines.end() ? 0 : it->second, e.message());
  }
  return config;
}

std::string serialize_config(const RunConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "schema_version" << YAML::Value << c.schema_version;
  out << YAML::Key << "experiment" << YAML::Value << std::string(to_string(c.experiment));
  if (!c.amplitudes.empty()) {
    out << YAML::Key << "amplitudes" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (const auto& a : c.amplitudes) {
      out << YAML::Flow << YAML::BeginSeq;
      emit_number(out, a.real());
      emit_number(out, a.imag());
      out << YAML::EndSeq;
    }
    out << YAML::EndSeq;
  }
  out << YAML::Key << "model" << YAML::Value << std::string(to_string(c.model));
  out << YAML::Key << "k" << YAML::Value;
  emit_number(out, c.k);
  if (!c.angles.empty()) {
    out << YAML::Key << "angles" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (double a : c.angles) emit_number(out, a);
    out << YAML::EndSeq;
  }
  if (c.sweep) {
    out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "axis" << YAML::Value << std::string(kAxisNames[c.sweep->axis]);
    out << YAML::Key << "start" << YAML::Value;
    emit_number(out, c.sweep->start);
    out << YAML::Key << "stop" << YAML::Value;
    emit_number(out, c.sweep->stop);
    out << YAML::Key << "steps" << YAML::Value << c.sweep->steps;
    out << YAML::EndMap;
  }
  out << YAML::Key << "seed" << YAML::Value << c.seed;
  out << YAML::Key << "n_emitted" << YAML::Value << c.n_emitted;
  out << YAML::Key << "efficiency" << YAML::Value;
  emit_number(out, c.efficiency);
  out << YAML::Key << "dark_rate" << YAML::Value;
  emit_number(out, c.dark_rate);
  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  if (c.output_path) out << YAML::Key << "path" << YAML::Value << YAML::DoubleQuoted << *c.output_path;
  out << YAML::Key << "format" << YAML::Value << std::string(to_string(c.format));
  out << YAML::EndMap;
  out << YAML::Key << "discriminate" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "grid" << YAML::Value << c.grid;
  out << YAML::Key << "refine_iterations" << YAML::Value << c.refine_iterations;
  out << YAML::Key << "alpha" << YAML::Value;
  emit_number(out, c.alpha);
  out << YAML::Key << "beta" << YAML::Value;
  emit_number(out, c.beta);
  out << YAML::Key << "resamples" << YAML::Value << c.resamples;
  out << YAML::Key << "fit_k" << YAML::Value << c.fit_k;
  out << YAML::EndMap;
  out << YAML::Key << "verify" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "grid" << YAML::Value << c.verify_grid;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

PureState source_state(const RunConfig& config) {
  switch (config.experiment) {
    case Experiment::kBell: return bell_state();
    case Experiment::kGhz: return ghz_state();
    case Experiment::kCustom: break;
  }
  return PureState::normalized(config.amplitudes);
}

RateModel make_model(const RunConfig& config, ModelChoice choice) {
  if (choice == ModelChoice::kCopenhagen) return Copenhagen{source_state(config)};
  if (photon_count(config) == 2) return TimeSymmetricBell{};
  return TimeSymmetricTriphoton{config.k};
}

std::vector<AngleSettings> expand_settings(const RunConfig& config) {
  const int m = photon_count(config);
  std::vector<double> base = config.angles;
  base.resize(static_cast<std::size_t>(m), 0.0);

  auto make = [&](const std::vector<double>& angles) {
    AngleSettings s;
    for (int i = 0; i < m; ++i) s.push_back({i, Angle(angles[i])});
    return s;
  };

  if (!config.sweep) return {make(base)};
  const Sweep& sw = *config.sweep;
  std::vector<AngleSettings> out;
  out.reserve(static_cast<std::size_t>(sw.steps));
  for (int i = 0; i < sw.steps; ++i) {
    std::vector<double> angles = base;
    angles[sw.axis] = sw.steps == 1 ? sw.start : sw.start + (sw.stop - sw.start) * i / (sw.steps - 1);
    out.push_back(make(angles));
  }
  return out;
}

}  // namespace polsim
