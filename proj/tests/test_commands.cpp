#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "orbsim/commands.hpp"
#include "orbsim/config.hpp"
#include "orbsim/csv.hpp"
#include "orbsim/errors.hpp"
#include "orbsim/policies.hpp"

using namespace orbsim;

namespace {

/// Scratch output directory, removed on scope exit.
struct TempDir {
  explicit TempDir(const std::string& tag)
      : path(std::filesystem::temp_directory_path() /
             ("orbsim_cmd_" + tag)) {
    std::filesystem::remove_all(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string str() const { return path.string(); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
  std::filesystem::path path;
};

/// Small fast scenario: four gridded items, two agile robots, short horizon.
Config small_config(const std::string& out_dir) {
  Config c = parse_config_text(R"({
    "dt": 0.5,
    "horizon": 40,
    "region": {"min": [0, 0], "max": [6, 6]},
    "robots": [
      {"start": [1, 3], "max_speed": 1.5, "max_accel": 1000,
       "grasp_time": 0.5},
      {"id": 1, "start": [5, 3], "max_speed": 1.5, "max_accel": 1000,
       "grasp_time": 0.5}
    ],
    "field": {"kind": "grid", "nx": 2, "ny": 2, "jitter": 0.2},
    "allocation": {"episodes": 3, "n_mc": 2, "grid_n": 3},
    "seeds": [3, 4]
  })");
  c.out_dir = out_dir;
  return c;
}

}  // namespace

TEST_CASE("dynamics check passes, reports every probe, and reruns identically") {
  TempDir dir_a("dyn_a");
  TempDir dir_b("dyn_b");
  Config config = small_config(dir_a.str());

  CHECK(cmd_dynamics_check(config) == 0);
  const std::string report = read_file(dir_a.file("dynamics_report.csv"));
  const auto table = parse_csv(report);
  REQUIRE(table.size() == 12);
  CHECK(table[0] ==
        std::vector<std::string>{"check", "max_error", "threshold", "pass"});

  const std::set<std::string> expected = {
      "velocity_recursion_fd",     "acceleration_recursion_fd",
      "double_pendulum_closed_form", "power_balance_frictionless",
      "power_balance_coulomb",     "kinetic_energy_nonneg",
      "wrench_decompose_residual", "wrench_decompose_min_norm",
      "param_gradient_alpha_fd",   "param_gradient_beta_fd",
      "spatial_dual_pairing"};
  std::set<std::string> seen;
  for (size_t i = 1; i < table.size(); ++i) {
    const auto& row = table[i];
    REQUIRE(row.size() == 4);
    seen.insert(row[0]);
    CHECK(row[3] == "1");
    CHECK(std::stod(row[1]) <= std::stod(row[2]));
  }
  CHECK(seen == expected);

  config.out_dir = dir_b.str();
  CHECK(cmd_dynamics_check(config) == 0);
  CHECK(read_file(dir_b.file("dynamics_report.csv")) == report);
}

TEST_CASE("training emits one curve row per episode and is seed-stable") {
  TempDir dir_a("train_a");
  TempDir dir_b("train_b");
  Config config = small_config(dir_a.str());

  CHECK(cmd_train(config) == 0);
  const std::string qtable = read_file(dir_a.file("qtable.csv"));
  const std::string curve = read_file(dir_a.file("training_curve.csv"));

  const auto curve_table = parse_csv(curve);
  REQUIRE(curve_table.size() == 4);  // header + 3 episodes
  CHECK(curve_table[0] ==
        std::vector<std::string>{"episode", "reward_total", "transfer_rate",
                                 "epsilon"});
  CHECK(curve_table[1][0] == "0");
  CHECK(curve_table[2][0] == "1");
  CHECK(curve_table[3][0] == "2");
  CHECK(std::stod(curve_table[1][3]) == 1.0);  // eps_start
  CHECK(std::stod(curve_table[3][3]) ==
        doctest::Approx(0.05).epsilon(1e-12));  // eps_end

  // The stored table reloads as a usable greedy policy with the same shape.
  const QPolicy policy = qtable_from_csv(qtable);
  CHECK(policy.robot_count == 2);
  CHECK(policy.grid_n == 3);
  CHECK(policy.epsilon == 0.0);

  config.out_dir = dir_b.str();
  CHECK(cmd_train(config) == 0);
  CHECK(read_file(dir_b.file("qtable.csv")) == qtable);
  CHECK(read_file(dir_b.file("training_curve.csv")) == curve);
}

TEST_CASE("bench over heuristics only lists them in canonical order") {
  TempDir dir("bench_h");
  Config config = small_config(dir.str());

  CHECK(cmd_bench(config, {"spt", "fifo"}) == 0);
  const auto summary = parse_csv(read_file(dir.file("bench.csv")));
  REQUIRE(summary.size() == 3);  // header + fifo + spt, no improvement
  CHECK(summary[0] ==
        std::vector<std::string>{"policy", "n", "mean_transfer",
                                 "std_transfer", "mean_reward", "std_reward",
                                 "mean_fuel", "std_fuel"});
  CHECK(summary[1][0] == "fifo");
  CHECK(summary[2][0] == "spt");
  CHECK(summary[1][1] == "2");  // one episode per configured seed

  const auto per_seed = parse_csv(read_file(dir.file("bench_per_seed.csv")));
  REQUIRE(per_seed.size() == 5);  // header + 2 policies x 2 seeds
  CHECK(per_seed[0] ==
        std::vector<std::string>{"policy", "seed", "transfer_rate",
                                 "reward_total", "total_fuel"});
  CHECK(per_seed[1][0] == "fifo");
  CHECK(per_seed[1][1] == "3");
  CHECK(per_seed[2][1] == "4");
  CHECK(per_seed[3][0] == "spt");
  for (size_t i = 1; i < per_seed.size(); ++i) {
    const double rate = std::stod(per_seed[i][2]);
    CHECK(rate >= 0.0);
    CHECK(rate <= 1.0);
  }

  // The per-policy summary means must match the per-seed rows they summarize.
  for (size_t p = 0; p < 2; ++p) {
    const double mean = (std::stod(per_seed[1 + 2 * p][2]) +
                         std::stod(per_seed[2 + 2 * p][2])) /
                        2.0;
    CHECK(std::stod(summary[1 + p][2]) == doctest::Approx(mean).epsilon(1e-15));
  }
}

TEST_CASE("bench with all three heuristics writes three rows, no improvement") {
  TempDir dir("bench_h3");
  Config config = small_config(dir.str());

  CHECK(cmd_bench(config, {"rules", "fifo", "spt"}) == 0);
  const auto summary = parse_csv(read_file(dir.file("bench.csv")));
  REQUIRE(summary.size() == 4);  // header + fifo + spt + rules
  CHECK(summary[1][0] == "fifo");
  CHECK(summary[2][0] == "spt");
  CHECK(summary[3][0] == "rules");
  for (size_t i = 1; i < summary.size(); ++i) CHECK(summary[i][0] != "improvement");
}

TEST_CASE("bench with the learned policy appends the improvement row") {
  TempDir dir("bench_q");
  Config config = small_config(dir.str());

  CHECK(cmd_bench(config, {"q", "fifo"}) == 0);
  const auto summary = parse_csv(read_file(dir.file("bench.csv")));
  REQUIRE(summary.size() == 4);  // header + fifo + q + improvement
  CHECK(summary[1][0] == "fifo");
  CHECK(summary[2][0] == "q");

  const auto& imp = summary[3];
  CHECK(imp[0] == "improvement");
  CHECK(imp[1] == "");
  CHECK(imp[3] == "");
  CHECK(imp[7] == "");

  const double fifo_mean = std::stod(summary[1][2]);
  const double q_mean = std::stod(summary[2][2]);
  REQUIRE(fifo_mean > 0.0);
  const double expected = (q_mean - fifo_mean) / fifo_mean;
  CHECK(std::stod(imp[2]) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("bench rejects unknown or unusable policy selections") {
  TempDir dir("bench_bad");
  Config config = small_config(dir.str());
  CHECK_THROWS_AS(cmd_bench(config, {"bogus"}), MissingPolicy);
  CHECK_THROWS_AS(cmd_bench(config, {"fifo", "nope"}), MissingPolicy);
}

TEST_CASE("simulate writes the event log and metrics row deterministically") {
  TempDir dir_a("sim_a");
  TempDir dir_b("sim_b");
  Config config = small_config(dir_a.str());

  CHECK(cmd_simulate(config, "fifo") == 0);
  const std::string events = read_file(dir_a.file("events.csv"));
  const std::string metrics = read_file(dir_a.file("metrics.csv"));

  const auto ev = parse_csv(events);
  REQUIRE(ev.size() >= 3);
  CHECK(ev[0] == std::vector<std::string>{"clock", "robot_id", "event",
                                          "debris_id"});
  CHECK(ev[1][2] == "episode_start");
  CHECK(ev.back()[2] == "episode_end");
  bool any_claim = false;
  for (size_t i = 1; i < ev.size(); ++i)
    any_claim |= ev[i][2] == "claimed";
  CHECK(any_claim);

  const auto mt = parse_csv(metrics);
  REQUIRE(mt.size() == 2);
  CHECK(mt[0] ==
        std::vector<std::string>{"retrieved_count", "total_debris",
                                 "transfer_rate", "elapsed", "total_fuel",
                                 "penalty", "reward_total"});
  const double retrieved = std::stod(mt[1][0]);
  const double total = std::stod(mt[1][1]);
  CHECK(total == 4.0);  // 2x2 grid field
  CHECK(retrieved <= total);
  CHECK(std::stod(mt[1][2]) ==
        doctest::Approx(retrieved / total).epsilon(1e-15));

  config.out_dir = dir_b.str();
  CHECK(cmd_simulate(config, "fifo") == 0);
  CHECK(read_file(dir_b.file("events.csv")) == events);
  CHECK(read_file(dir_b.file("metrics.csv")) == metrics);
}

TEST_CASE("simulate rejects unknown policy names") {
  TempDir dir("sim_bad");
  Config config = small_config(dir.str());
  CHECK_THROWS_AS(cmd_simulate(config, "zigzag"), UnknownPolicy);
  CHECK_THROWS_AS(cmd_simulate(config, ""), UnknownPolicy);
}
