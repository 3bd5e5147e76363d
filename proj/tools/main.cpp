#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "orbsim/commands.hpp"
#include "orbsim/errors.hpp"

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "orbsim: multi-robot debris retrieval simulator and chain dynamics "
      "toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<uint64_t> seed;
  std::string out_dir;
  std::string policy = "fifo";
  std::string policies_list;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Config file (JSON)");
    cmd->add_option("--seed", seed,
                    "Replace the configured seed list with this single seed");
    cmd->add_option("--out", out_dir, "Output directory override");
  };

  CLI::App* dyn = app.add_subcommand(
      "dynamics-check",
      "Run the dynamics invariant suite, write dynamics_report.csv");
  add_common(dyn);
  CLI::App* train = app.add_subcommand(
      "train", "Train the tabular policy, write qtable.csv and "
               "training_curve.csv");
  add_common(train);
  CLI::App* bench = app.add_subcommand(
      "bench",
      "Evaluate policies over the configured seeds, write bench.csv and "
      "bench_per_seed.csv");
  add_common(bench);
  bench->add_option("--policies", policies_list,
                    "Comma-separated subset of fifo,spt,rules,q (default all)");
  CLI::App* sim = app.add_subcommand(
      "simulate", "Run one episode, write events.csv and metrics.csv");
  add_common(sim);
  sim->add_option("--policy", policy, "Policy name: fifo, spt, rules or q");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    orbsim::Config config = config_path.empty()
                                ? orbsim::default_config()
                                : orbsim::parse_config(config_path);
    if (seed) config.seeds = {*seed};
    if (!out_dir.empty()) config.out_dir = out_dir;

    if (dyn->parsed()) return orbsim::cmd_dynamics_check(config);
    if (train->parsed()) return orbsim::cmd_train(config);
    if (bench->parsed())
      return orbsim::cmd_bench(config, split_list(policies_list));
    if (sim->parsed()) return orbsim::cmd_simulate(config, policy);
  } catch (const orbsim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
