#include <cstdlib>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "loewner/cli.hpp"

int main(int argc, char** argv) {
  using namespace loewner;
  CLI::App app{"Loewner chains, Becker extensions and Beltrami diagnostics"};
  app.set_help_flag("-h,--help", "print help");

  std::string command, example, config_path;
  app.add_option("command", command, "evolve | chain | extend | beltrami | classify | recover | range | schwarzian | demo")
      ->check(CLI::IsMember(subcommands()));
  app.add_option("example", example, "demo name (koebe)");

  std::map<std::string, std::string> flags;
  for (const auto& k : config_keys()) {
    if (k.key == "command" || k.key == "example") continue;
    if (k.key == "config") {
      app.add_option("--config", config_path, k.help);
      continue;
    }
    app.add_option("--" + k.key, flags[k.key], k.help);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  Config config;
  try {
    if (!config_path.empty()) config = Config::load(config_path);
    if (!command.empty()) config.set("command", command);
    if (!example.empty()) config.set("example", example);
    for (const auto& [key, value] : flags) {
      if (app.count("--" + key)) config.set(key, value);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  }
  return run_and_report(config, std::cout);
}
