#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "psilab/experiments.hpp"
#include "psilab/linalg.hpp"
#include "psilab/parallel.hpp"

namespace {

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  psilab::configure_blas(argv);

  CLI::App app{"psilab: numerical checks of spectral asymptotics for pseudodifferential operators"};
  app.require_subcommand(1);
  int worker_count = 0;
  std::string out_dir;
  long seed = -1;
  app.add_option("--workers", worker_count, "Worker threads for parallel loops")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "Output directory (overrides the config)");
  app.add_option("--seed", seed, "Random seed (overrides the config)")->check(CLI::NonNegativeNumber);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("config", config_path, "Experiment config file")->required();

  std::string param, values;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run an experiment over a list of parameter values");
  sweep_cmd->add_option("config", config_path, "Experiment config file")->required();
  sweep_cmd->add_option("--param", param, "Parameter as section.key")->required();
  sweep_cmd->add_option("--values", values, "Comma separated values")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (worker_count > 0) psilab::set_workers(worker_count);
  std::vector<std::pair<std::string, std::string>> overrides;
  if (!out_dir.empty()) overrides.emplace_back("experiment.output", out_dir);
  if (seed >= 0) overrides.emplace_back("experiment.seed", std::to_string(seed));

  const psilab::ExitReport report = run->parsed()
                                        ? psilab::run_config_file(config_path, overrides)
                                        : psilab::sweep(config_path, param, split_csv(values), overrides);
  (report.status == 1 ? std::cerr : std::cout) << report.message << "\n";
  return report.status;
}
