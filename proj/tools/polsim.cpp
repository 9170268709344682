// polsim: predict, simulate and discriminate polarizer coincidence
// experiments under the collapse and time-symmetric rate laws.
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "polsim/commands.hpp"
#include "polsim/config.hpp"

int main(int argc, char** argv) {
  using namespace polsim;

  CLI::App app{"Polarizer coincidence simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string format;
  bool force = false;
  std::uint64_t seed = 0;

  const char* descriptions[][2] = {
      {"predict", "Tabulate predicted relative coincidence rates"},
      {"simulate", "Simulate finite-statistics coincidence counts"},
      {"discriminate", "Find the most discriminating setting and test simulated data"},
      {"verify", "Check two-model agreement over an angle grid"},
  };
  std::vector<CLI::App*> subcommands;
  std::vector<CLI::Option*> seed_options;
  for (const auto& [name, help] : descriptions) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "YAML run configuration")->required();
    sub->add_option("--out", out_path, "Output file (default: config output.path, else stdout)");
    sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_flag("--force", force, "Overwrite an existing output file");
    seed_options.push_back(sub->add_option("--seed", seed, "Override the configured seed"));
    subcommands.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_code::kSuccess : exit_code::kUsage;
  }

  std::size_t chosen = 0;
  while (!subcommands[chosen]->parsed()) ++chosen;
  const Command command = *parse_command(subcommands[chosen]->get_name());

  std::ifstream file(config_path, std::ios::binary);
  if (!file) {
    std::cerr << "error: cannot read config " << config_path << "\n";
    return exit_code::kIo;
  }
  std::ostringstream text;
  text << file.rdbuf();

  RunConfig config;
  try {
    config = parse_config(text.str());
  } catch (const ConfigError& e) {
    std::cerr << config_path << ": " << e.what() << "\n";
    return exit_code::kUsage;
  }
  if (seed_options[chosen]->count() > 0) config.seed = seed;
  if (!format.empty()) config.format = format == "csv" ? OutputFormat::kCsv : OutputFormat::kJson;
  if (!out_path.empty()) config.output_path = out_path;

  return run_command(command, config, CommandOptions{force}, std::cout, std::cerr);
}
