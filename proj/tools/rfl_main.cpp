#include <CLI11.hpp>
#include <iostream>

#include "rfl/driver.hpp"

int main(int argc, char** argv) {
  CLI::App app{"rfl - refinement reflection proof checker"};
  app.require_subcommand(1);

  rfl::RunConfig config;
  CLI::App* check = app.add_subcommand("check", "check proof files");
  check->add_option("files", config.inputs, "input files")->required();
  check->add_option("--fuel", config.fuel, "evaluator step budget");
  check->add_option("--lambda-pool", config.lambdaPool,
                    "lambda binder pool size per sort");
  check->add_option("--instance-budget", config.instanceBudget,
                    "alpha/beta instance budget per VC");
  check->add_option("--branch-budget", config.branchBudget,
                    "solver branch budget per VC");
  check->add_option("--solver", config.solver, "builtin | external:<path>");
  check->add_option("--emit-smt", config.emitSmtDir,
                    "write one .smt2 file per obligation into this directory");
  check->add_flag("-v,--verbose", config.verbose, "show informational notes");

  CLI11_PARSE(app, argc, argv);

  rfl::RunReport report = rfl::run(config);
  std::cout << report.text;
  return report.exitCode;
}
