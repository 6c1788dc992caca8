#include "psgdlab/cli/commands.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

using namespace psgdlab::cli;

int main(int argc, char** argv) {
  CLI::App app{"psgdlab: generalization experiments for projected SGD"};
  app.require_subcommand(1, 1);

  std::string config_path;
  // flag name -> config key, value filled by CLI11 when given
  std::vector<std::pair<std::string, std::string>> flags{
      {"--seed", "seed"},           {"--trials", "trials"},     {"--out", "out"},
      {"--format", "format"},       {"--n", "n"},               {"--d", "d"},
      {"--t", "T"},                 {"--loss", "loss"},         {"--schedule", "schedule"},
      {"--sigma", "sigma"},         {"--constant-c", "constant_c"},
      {"--constant-C", "constant_C"}, {"--noise", "noise"},     {"--inject-fault", "inject_fault"},
  };
  std::vector<std::optional<std::string>> values(flags.size());

  for (const char* name : {"run", "scaling", "counterexample", "verify", "bounds"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "key = value file");
    for (std::size_t i = 0; i < flags.size(); ++i) {
      sub->add_option(flags[i].first, values[i], "overrides config key " + flags[i].second);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_usage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    ExperimentConfig config = config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(config_path);
    for (std::size_t i = 0; i < flags.size(); ++i) {
      if (values[i]) config.set(flags[i].second, *values[i]);
    }
    const CommandResult result = dispatch(command, config);
    emit(result, config, std::cout);
    return result.exit_code;
  } catch (const UsageError& e) {
    std::cerr << "psgdlab " << command << ": " << e.what() << '\n';
    return exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "psgdlab " << command << ": " << e.what() << '\n';
    return exit_usage;
  }
}
