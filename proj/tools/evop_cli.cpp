#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "evop/harness.hpp"

namespace {

struct Overrides {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seeds;
  std::optional<std::uint64_t> master_seed;
  std::optional<evop::Index> horizon;
  bool per_step = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--seeds", o.seeds, "Number of seeded runs");
  cmd->add_option("--master-seed", o.master_seed, "Master seed");
  cmd->add_option("--horizon", o.horizon, "Steps per run");
  cmd->add_flag("--per-step", o.per_step, "Write every step to run CSVs");
}

evop::harness::ExperimentConfig load(const Overrides& o) {
  auto c = evop::harness::load_config(o.config);
  if (!o.out.empty()) c.output = o.out;
  if (o.seeds) c.seed_count = *o.seeds;
  if (o.master_seed) c.master_seed = *o.master_seed;
  if (o.horizon) c.horizon = *o.horizon;
  if (o.per_step) c.per_step = true;
  evop::harness::validate(c);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online prediction with unbounded feedback delays: EvOp experiments"};
  app.require_subcommand(1);
  Overrides run_o, bound_o, verify_o;
  auto* run = app.add_subcommand("run", "Run a seeded experiment and write CSVs");
  add_common(run, run_o);
  auto* bound = app.add_subcommand("bound", "Evaluate the convergence-time bounds");
  add_common(bound, bound_o);
  auto* verify = app.add_subcommand("verify", "Monte Carlo check of the concentration bound");
  add_common(verify, verify_o);
  std::string dir_a, dir_b;
  auto* compare = app.add_subcommand("compare", "Byte-compare two output directories");
  compare->add_option("a", dir_a, "First directory")->required();
  compare->add_option("b", dir_b, "Second directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Usage errors share the config-error status.
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    evop::harness::CommandResult result;
    if (*run) {
      result = evop::harness::run(load(run_o));
    } else if (*bound) {
      const auto c = load(bound_o);
      result = evop::harness::bound(c);
      if (!bound_o.out.empty()) {
        std::filesystem::create_directories(c.output);
        std::ofstream(c.output / "bound.txt") << result.report;
      }
    } else if (*verify) {
      const auto c = load(verify_o);
      result = evop::harness::verify(c);
      if (!verify_o.out.empty()) {
        std::filesystem::create_directories(c.output);
        std::ofstream(c.output / "report.txt") << result.report;
      }
    } else {
      result = evop::harness::compare(dir_a, dir_b);
    }
    std::cout << result.report;
    return result.passed ? 0 : 1;
  } catch (const evop::harness::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
