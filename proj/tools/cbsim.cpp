// cbsim: command-line front end for the node-selection simulator.
#include <iostream>

#include "CLI11.hpp"

#include "cbsel/cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace cbsel::cli;

  CLI::App app{"Collaborative beamforming with sidelobe-controlling node selection"};
  app.require_subcommand(1);

  std::string config;
  std::string preset;
  std::string out = ".";
  std::vector<std::string> overrides;
  std::string format;
  bool serial = false;

  for (const auto& name : command_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("-c,--config", config, "configuration file (INI)");
    sub->add_option("-p,--preset", preset, "shipped preset, e.g. fig6");
    sub->add_option("-o,--out", out, "output directory")->capture_default_str();
    sub->add_option("-s,--set", overrides, "override, section.key=value (repeatable)");
    sub->add_option("-f,--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_flag("--serial", serial, "run Monte Carlo loops on one thread");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code::kConfig;
  }

  CommandSpec spec;
  spec.command = *parse_command(app.get_subcommands().front()->get_name());
  if (!config.empty()) spec.config_path = config;
  if (!preset.empty()) spec.preset = preset;
  spec.output_dir = out;
  spec.overrides = overrides;
  if (format == "csv") spec.format = OutputFormat::Csv;
  if (format == "json") spec.format = OutputFormat::Json;
  spec.execution = serial ? cbsel::Execution::Serial : cbsel::Execution::Parallel;
  return run_command(spec, std::cerr);
}
