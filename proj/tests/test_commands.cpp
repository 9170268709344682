#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "polsim/commands.hpp"
#include "polsim/config.hpp"

using namespace polsim;
using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RunConfig golden_config(const std::string& name) {
  return parse_config(read_file(std::filesystem::path(POLSIM_GOLDEN_DIR) / name));
}

// CSV body rows, skipping the comment preamble and the header.
std::vector<std::string> csv_rows(const std::string& text) {
  std::vector<std::string> rows;
  std::istringstream in(text);
  bool header_seen = false;
  for (std::string line; std::getline(in, line);) {
    if (line.starts_with('#')) continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    rows.push_back(line);
  }
  return rows;
}

std::string csv_header(const std::string& text) {
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.starts_with('#')) return line;
  }
  return {};
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("polsim_test_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("predict GHZ at (0, 0, pi/2) is one half") {
  RunConfig c = parse_config("experiment: ghz\nmodel: copenhagen\nangles: [0, 0, 1.5707963267948966]\n");
  const Artifact a = execute(Command::kPredict, c);
  CHECK(a.exit_code == 0);
  CHECK(csv_header(a.text) == "theta_a,theta_b,theta_c,rate");
  const auto rows = csv_rows(a.text);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0] == "0,0,1.5707963267948966,0.5");

  c.format = OutputFormat::kJson;
  const json doc = json::parse(execute(Command::kPredict, c).text);
  CHECK(doc["schema_version"] == 1);
  CHECK(doc["command"] == "predict");
  CHECK(doc["rows"][0]["rate"].get<double>() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(parse_config(doc["config"].get<std::string>()) == c);
}

TEST_CASE("CSV numbers round-trip at full precision") {
  const RunConfig c = parse_config("experiment: ghz\nmodel: timesym\nk: 0.3\nangles: [0.1, 0.7, 2.9]\n");
  const auto rows = csv_rows(execute(Command::kPredict, c).text);
  REQUIRE(rows.size() == 1);
  const double rate = std::stod(rows[0].substr(rows[0].rfind(',') + 1));
  CHECK(rate == 0.3 * std::pow(std::cos(2.9 - 0.1 - 0.7), 2));
}

TEST_CASE("simulate timesym at the origin is near k and reproducible") {
  const RunConfig c =
      parse_config("experiment: ghz\nmodel: timesym\nangles: [0, 0, 0]\nn_emitted: 10000\nseed: 99\n");
  const Artifact first = execute(Command::kSimulate, c);
  CHECK(csv_header(first.text) == "theta_a,theta_b,theta_c,rate,n_emitted,n_coincidence,seed");
  const auto rows = csv_rows(first.text);
  REQUIRE(rows.size() == 1);
  std::vector<std::string> cells;
  std::istringstream row(rows[0]);
  for (std::string cell; std::getline(row, cell, ',');) cells.push_back(cell);
  REQUIRE(cells.size() == 7);
  CHECK(cells[3] == "0.5");
  CHECK(cells[4] == "10000");
  CHECK(cells[6] == "99");
  const double n = std::stod(cells[5]);
  CHECK(std::abs(n - 5000.0) <= 5.0 * std::sqrt(10000 * 0.25));
  CHECK(execute(Command::kSimulate, c).text == first.text);
}

TEST_CASE("bell rows leave theta_c empty") {
  RunConfig c = parse_config("experiment: bell\nmodel: timesym\nangles: [0, 0.5]\n");
  CHECK(csv_rows(execute(Command::kPredict, c).text)[0].starts_with("0,0.5,,"));
  c.format = OutputFormat::kJson;
  CHECK(json::parse(execute(Command::kPredict, c).text)["rows"][0]["theta_c"].is_null());
}

TEST_CASE("simulate reports clamped probabilities") {
  const RunConfig c = parse_config("experiment: ghz\nmodel: timesym\nk: 1\nangles: [0, 0, 0]\ndark_rate: 0.5\n");
  const Artifact a = execute(Command::kSimulate, c);
  CHECK(a.text.find("# warning: row 0:") != std::string::npos);
  CHECK_FALSE(a.summary.empty());
}

TEST_CASE("verify passes for Bell and fails for GHZ") {
  const Artifact bell = execute(Command::kVerify, golden_config("verify_bell.yaml"));
  CHECK(bell.exit_code == exit_code::kSuccess);
  const json b = json::parse(bell.text);
  CHECK(b["pass"] == true);
  CHECK(b["settings_evaluated"] == 181 * 181);
  CHECK(b["max_abs_diff"].get<double>() <= 1e-12);

  const Artifact ghz = execute(Command::kVerify, golden_config("verify_ghz.yaml"));
  CHECK(ghz.exit_code == exit_code::kVerifyFailed);
  const json g = json::parse(ghz.text);
  CHECK(g["pass"] == false);
  CHECK(g["max_abs_diff"].get<double>() == doctest::Approx(0.5));
}

TEST_CASE("golden outputs are reproduced byte for byte") {
  const std::filesystem::path dir(POLSIM_GOLDEN_DIR);
  CHECK(execute(Command::kPredict, golden_config("predict_ghz.yaml")).text == read_file(dir / "predict_ghz.csv"));
  CHECK(execute(Command::kSimulate, golden_config("simulate_ghz.yaml")).text == read_file(dir / "simulate_ghz.csv"));
  CHECK(execute(Command::kPredict, golden_config("predict_bell.yaml")).text == read_file(dir / "predict_bell.json"));
}

TEST_CASE("discriminate reports a decision") {
  RunConfig c = parse_config(
      "experiment: ghz\nmodel: timesym\nangles: [0, 0, 0]\nn_emitted: 2000\nseed: 5\n"
      "discriminate: {grid: 24, resamples: 200}\n");
  const Artifact a = execute(Command::kDiscriminate, c);
  const json doc = json::parse(a.text);
  for (const char* key : {"best_settings", "rate_a", "rate_b", "divergence", "hellinger", "required_n", "decision",
                          "log_likelihood_ratio", "p_value_estimate", "n_coincidence"}) {
    CHECK_MESSAGE(doc.contains(key), key);
  }
  CHECK(doc["model_a"] == "copenhagen");
  CHECK(doc["model_b"] == "timesym");
  CHECK(doc["decision"] == "timesym");
  CHECK(doc["required_n"].get<std::int64_t>() >= 1);
  CHECK(doc["divergence"].get<double>() >= 0.49);
  CHECK(execute(Command::kDiscriminate, c).text == a.text);

  c.model = ModelChoice::kCopenhagen;
  CHECK(json::parse(execute(Command::kDiscriminate, c).text)["decision"] == "copenhagen");

  c.fit_k = true;
  c.model = ModelChoice::kTimeSymmetric;
  CHECK(json::parse(execute(Command::kDiscriminate, c).text).contains("fitted_k"));
}

TEST_CASE("discriminate on Bell has no discriminating setting") {
  const RunConfig c = parse_config("experiment: bell\nmodel: timesym\nangles: [0, 0]\ndiscriminate: {grid: 8}\n");
  std::ostringstream out, err;
  CHECK(run_command(Command::kDiscriminate, c, {}, out, err) == exit_code::kUsage);
  CHECK(out.str().empty());
  CHECK_FALSE(err.str().empty());
}

TEST_CASE("run_command refuses to overwrite unless forced") {
  TempDir tmp;
  RunConfig c = parse_config("experiment: ghz\nmodel: copenhagen\nangles: [0, 0, 0]\n");
  c.output_path = (tmp.path / "out.csv").string();
  {
    std::ofstream(*c.output_path) << "keep me";
  }
  std::ostringstream out, err;
  CHECK(run_command(Command::kPredict, c, {}, out, err) == exit_code::kIo);
  CHECK(read_file(*c.output_path) == "keep me");

  CHECK(run_command(Command::kPredict, c, {.force = true}, out, err) == exit_code::kSuccess);
  CHECK(read_file(*c.output_path) == execute(Command::kPredict, c).text);
  CHECK(out.str().empty());

  c.output_path = (tmp.path / "missing_dir" / "out.csv").string();
  CHECK(run_command(Command::kPredict, c, {}, out, err) == exit_code::kIo);
}

TEST_CASE("invalid configs map to the usage exit code") {
  RunConfig c = parse_config("experiment: ghz\nmodel: timesym\nangles: [0, 0, 0]\n");
  c.k = 2.0;
  std::ostringstream out, err;
  CHECK(run_command(Command::kPredict, c, {}, out, err) == exit_code::kUsage);
  CHECK(err.str().find("k out of range (0,1]") != std::string::npos);
}

TEST_CASE("command names") {
  for (Command cmd : {Command::kPredict, Command::kSimulate, Command::kDiscriminate, Command::kVerify}) {
    CHECK(parse_command(to_string(cmd)) == cmd);
  }
  CHECK_FALSE(parse_command("fit"));
  CHECK(format_number(0.1) == "0.10000000000000001");
}
