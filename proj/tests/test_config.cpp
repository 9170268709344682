#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include <doctest.h>

#include "polsim/config.hpp"

using namespace polsim;

namespace {

ConfigError capture(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("expected ConfigError for:\n" << text);
  return ConfigError("", 0, "");
}

}  // namespace

TEST_CASE("minimal config takes defaults") {
  const RunConfig c = parse_config("experiment: ghz\nmodel: copenhagen\nangles: [0, 0, 1.5]\n");
  CHECK(c.schema_version == kSchemaVersion);
  CHECK(c.experiment == Experiment::kGhz);
  CHECK(c.model == ModelChoice::kCopenhagen);
  CHECK(c.k == 0.5);
  CHECK(c.seed == 0);
  CHECK(c.n_emitted == 1000);
  CHECK(c.efficiency == 1.0);
  CHECK(c.dark_rate == 0.0);
  CHECK(c.format == OutputFormat::kCsv);
  CHECK_FALSE(c.output_path);
  CHECK_FALSE(c.sweep);
  CHECK(c.grid == 64);
  CHECK(c.resamples == 1000);
  CHECK(c.verify_grid == 181);
  REQUIRE(expand_settings(c).size() == 1);
  CHECK(expand_settings(c)[0][2].angle.radians() == 1.5);
}

TEST_CASE("sweep expands to an inclusive grid") {
  const RunConfig c = parse_config(
      "experiment: ghz\nmodel: timesym\nangles: [0.1, 0.2, 0]\n"
      "sweep: {axis: theta_c, start: 0, stop: 3.141592653589793, steps: 181}\n");
  const auto settings = expand_settings(c);
  REQUIRE(settings.size() == 181);
  CHECK(settings.front()[2].angle.radians() == 0.0);
  CHECK(settings.back()[2].angle.radians() == doctest::Approx(std::numbers::pi).epsilon(1e-15));
  CHECK(settings[90][2].angle.radians() == doctest::Approx(std::numbers::pi / 2).epsilon(1e-15));
  for (const auto& s : settings) {
    CHECK(s[0].angle.radians() == 0.1);
    CHECK(s[1].angle.radians() == 0.2);
  }
}

TEST_CASE("sweep without fixed angles holds the others at zero") {
  const RunConfig c =
      parse_config("experiment: bell\nmodel: timesym\nsweep: {axis: theta_b, start: 0, stop: 1, steps: 3}\n");
  const auto settings = expand_settings(c);
  REQUIRE(settings.size() == 3);
  CHECK(settings[2][0].angle.radians() == 0.0);
  CHECK(settings[2][1].angle.radians() == 1.0);
}

TEST_CASE("out-of-range k names key, line and range") {
  const ConfigError e = capture("schema_version: 1\nexperiment: ghz\nmodel: timesym\nk: 1.5\nangles: [0, 0, 0]\n");
  CHECK(e.key() == "k");
  CHECK(e.line() == 4);
  CHECK(e.message() == "k out of range (0,1]");
  CHECK(std::string(e.what()).find("line 4") != std::string::npos);
}

TEST_CASE("invalid values are rejected with their key") {
  const std::string base = "experiment: ghz\nmodel: timesym\n";
  CHECK(capture(base + "angles: [0, 0]\n").key() == "angles");
  CHECK(capture(base).key() == "angles");
  CHECK(capture(base + "angles: [0, 0, 0]\nk: 0\n").key() == "k");
  CHECK(capture(base + "angles: [0, 0, 0]\nefficiency: 0\n").key() == "efficiency");
  CHECK(capture(base + "angles: [0, 0, 0]\ndark_rate: 1.5\n").key() == "dark_rate");
  CHECK(capture(base + "angles: [0, 0, 0]\nn_emitted: 0\n").key() == "n_emitted");
  CHECK(capture(base + "angles: [0, 0, 0]\nn_emitted: 1.5\n").key() == "n_emitted");
  CHECK(capture(base + "angles: [0, 0, 0]\ndiscriminate: {alpha: 1}\n").key() == "discriminate.alpha");
  CHECK(capture(base + "angles: [0, 0, 0]\ndiscriminate: {grid: 1}\n").key() == "discriminate.grid");
  CHECK(capture(base + "angles: [0, 0, 0]\nverify: {grid: 1}\n").key() == "verify.grid");
  CHECK(capture(base + "angles: [0, 0, 0]\nschema_version: 2\n").key() == "schema_version");
  CHECK(capture(base + "angles: [0, 0, 0]\noutput: {format: xml}\n").key() == "output.format");
  CHECK(capture("experiment: ghz\nmodel: maybe\nangles: [0, 0, 0]\n").key() == "model");
  CHECK(capture("experiment: quad\nmodel: timesym\nangles: [0, 0, 0]\n").key() == "experiment");
  CHECK(capture("model: timesym\nangles: [0, 0, 0]\n").key() == "experiment");
  CHECK(capture("experiment: bell\nmodel: timesym\nsweep: {axis: theta_c, start: 0, stop: 1, steps: 3}\n").key() ==
        "sweep.axis");
  CHECK(capture("experiment: bell\nmodel: timesym\nsweep: {axis: theta_a, start: 0, stop: 1}\n").key() ==
        "sweep.steps");
}

TEST_CASE("angles must be plain radians") {
  const ConfigError e = capture("experiment: ghz\nmodel: timesym\nangles: [0, deg:90, 0]\n");
  CHECK(e.key() == "angles");
  CHECK(e.line() == 3);
  CHECK(capture("experiment: ghz\nmodel: timesym\nangles: [0, .nan, 0]\n").key() == "angles");
}

TEST_CASE("unknown keys are rejected with their line") {
  const ConfigError top = capture("experiment: ghz\nmodel: timesym\nangles: [0, 0, 0]\ncolour: blue\n");
  CHECK(top.key() == "colour");
  CHECK(top.line() == 4);
  const ConfigError nested = capture("experiment: ghz\nmodel: timesym\nangles: [0, 0, 0]\noutput:\n  fmt: csv\n");
  CHECK(nested.key() == "output.fmt");
  CHECK(nested.line() == 5);
}

TEST_CASE("malformed YAML reports its line") {
  const ConfigError e = capture("experiment: ghz\nmodel: timesym\nangles: [0, 0, 0\n");
  CHECK(e.line() >= 3);
  CHECK(capture("").line() == 0);
  CHECK(capture("- 1\n- 2\n").message() == "expected a mapping");
}

TEST_CASE("custom states") {
  const RunConfig c = parse_config(
      "experiment: custom\nmodel: copenhagen\nangles: [0, 0]\n"
      "amplitudes: [0.7071067811865476, 0, 0, [0, 0.7071067811865476]]\n");
  CHECK(photon_count(c) == 2);
  CHECK(c.amplitudes[3] == Amplitude(0.0, 0.7071067811865476));
  CHECK(std::holds_alternative<TimeSymmetricBell>(make_model(c, ModelChoice::kTimeSymmetric)));

  CHECK(capture("experiment: custom\nmodel: copenhagen\nangles: [0, 0]\namplitudes: [1, 1, 0, 0]\n").key() ==
        "amplitudes");
  CHECK(capture("experiment: custom\nmodel: copenhagen\nangles: [0, 0]\namplitudes: [1, 0]\n").key() ==
        "amplitudes");
  CHECK(capture("experiment: ghz\nmodel: copenhagen\nangles: [0, 0, 0]\namplitudes: [1, 0]\n").key() ==
        "amplitudes");
}

TEST_CASE("make_model follows the experiment") {
  RunConfig c = parse_config("experiment: ghz\nmodel: timesym\nk: 0.25\nangles: [0, 0, 0]\n");
  const RateModel ts = make_model(c, ModelChoice::kTimeSymmetric);
  REQUIRE(std::holds_alternative<TimeSymmetricTriphoton>(ts));
  CHECK(std::get<TimeSymmetricTriphoton>(ts).k == 0.25);
  CHECK(std::holds_alternative<Copenhagen>(make_model(c, ModelChoice::kCopenhagen)));
}

TEST_CASE("serialize then parse is the identity") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    RunConfig c;
    const int kind = static_cast<int>(rng() % 3);
    c.experiment = static_cast<Experiment>(kind);
    if (c.experiment == Experiment::kCustom) {
      const std::size_t dim = rng() % 2 ? 4 : 8;
      double sq = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        c.amplitudes.emplace_back(u(rng) - 0.5, rng() % 2 ? u(rng) - 0.5 : 0.0);
        sq += std::norm(c.amplitudes.back());
      }
      for (auto& a : c.amplitudes) a /= std::sqrt(sq);
    }
    const int m = photon_count(c);
    c.model = rng() % 2 ? ModelChoice::kCopenhagen : ModelChoice::kTimeSymmetric;
    c.k = 1.0 - u(rng);
    if (rng() % 3 != 0) {
      for (int i = 0; i < m; ++i) c.angles.push_back((u(rng) - 0.5) * 20.0);
    }
    if (c.angles.empty() || rng() % 2) {
      c.sweep = Sweep{static_cast<int>(rng() % m), u(rng) * 7.0, -u(rng) * 3e-7, 1 + static_cast<int>(rng() % 200)};
    }
    c.seed = rng();
    c.n_emitted = 1 + static_cast<std::int64_t>(rng() % 10'000'000'000ULL);
    c.efficiency = 1.0 - u(rng);
    c.dark_rate = u(rng) * 1e-3;
    if (rng() % 2) c.output_path = "out dir/run #" + std::to_string(trial) + ": x.csv";
    c.format = rng() % 2 ? OutputFormat::kCsv : OutputFormat::kJson;
    c.grid = 2 + static_cast<int>(rng() % 100);
    c.refine_iterations = static_cast<int>(rng() % 100);
    c.alpha = 0.5 * (1.0 - u(rng));
    c.beta = 0.5 * (1.0 - u(rng));
    c.resamples = 1 + static_cast<int>(rng() % 5000);
    c.fit_k = rng() % 2;
    c.verify_grid = 2 + static_cast<int>(rng() % 300);

    const std::string text = serialize_config(c);
    INFO(text);
    const RunConfig back = parse_config(text);
    CHECK(back == c);
    CHECK(serialize_config(back) == text);
  }
}
