#include <iostream>

#include <CLI11.hpp>

#include "htcirc/cli.hpp"

int main(int argc, char** argv) {
  namespace cli = htcirc::cli;
  CLI::App app{"Expressiveness experiments for convolutional arithmetic circuits"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run one experiment from a JSON config");
  std::string config;
  cli::Overrides o;
  run->add_option("--config", config, "experiment config (JSON)")->required();
  run->add_option("--seed", o.seed, "seed, overriding the config");
  run->add_option("--out", o.out, "report path");
  run->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  run->add_option("--tol", o.tolerance, "relative singular-value tolerance");
  run->add_option("--guard", o.guard, "largest grid tensor, in entries");

  auto* list = app.add_subcommand("list", "list experiment kinds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kConfigError;
  }

  if (list->parsed()) {
    std::cout << cli::list_experiments();
    return cli::kOk;
  }
  return cli::run(config, o, std::cout, std::cerr);
}
