#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "samsbo_cli/commands.hpp"
#include "samsbo_cli/config.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> algorithms;
  std::optional<int> jobs;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "Experiment config (key = value lines)");
  cmd->add_option("--seed", f.seed, "Base seed");
  cmd->add_option("--out", f.out, "Output directory (SAMSBO_OUT overrides)");
  cmd->add_option("--jobs", f.jobs, "Concurrent repetitions")->check(CLI::PositiveNumber);
}

samsbo::cli::ExperimentConfig load(const CommonFlags& f) {
  samsbo::cli::ExperimentConfig c =
      f.config.empty() ? samsbo::cli::parse_config_text("") : samsbo::cli::parse_config(f.config);
  if (f.seed) c.seed = *f.seed;
  if (f.jobs) c.jobs = *f.jobs;
  if (!f.algorithms.empty()) {
    c.algorithms.clear();
    for (const std::string& list : f.algorithms) {
      std::stringstream ss(list);
      std::string name;
      while (std::getline(ss, name, ',')) c.algorithms.push_back(samsbo::parse_algorithm(name));
    }
    samsbo::cli::validate(c, "--algorithm");
  }
  if (!f.out.empty()) c.out = f.out;
  if (const char* env = std::getenv("SAMSBO_OUT"); env && *env) c.out = env;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Safe multi-task Bayesian optimization experiments"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "Run optimization repetitions and write CSV results");
  add_common(run, run_flags);
  run->add_option("--algorithm", run_flags.algorithms,
                  "Algorithm(s): samsbo, safe-ucb, ucb, multi-task-ucb");

  CommonFlags verify_flags;
  CLI::App* verify = app.add_subcommand("verify-bounds", "Monte Carlo coverage of the error bounds");
  add_common(verify, verify_flags);

  std::vector<std::string> inputs;
  std::string plot_out;
  CLI::App* plot = app.add_subcommand("plotdata", "Long-format quantile table from raw CSVs");
  plot->add_option("inputs", inputs, "Raw CSV files")->required();
  plot->add_option("--out", plot_out, "Output directory for plotdata.csv (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const auto config = load(run_flags);
      return samsbo::cli::cmd_run(config, config.out, std::cerr);
    }
    if (verify->parsed()) {
      const auto config = load(verify_flags);
      return samsbo::cli::cmd_verify_bounds(config, config.out, std::cout);
    }
    if (plot->parsed()) {
      std::vector<std::filesystem::path> paths(inputs.begin(), inputs.end());
      if (const char* env = std::getenv("SAMSBO_OUT"); env && *env) plot_out = env;
      if (plot_out.empty()) return samsbo::cli::cmd_plotdata(paths, std::cout);
      std::filesystem::create_directories(plot_out);
      std::ofstream out(std::filesystem::path(plot_out) / "plotdata.csv", std::ios::binary);
      if (!out) throw std::runtime_error(plot_out + ": cannot write plotdata.csv");
      return samsbo::cli::cmd_plotdata(paths, out);
    }
  } catch (const std::exception& e) {
    std::cerr << "samsbo: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
