#pragma once

#include <optional>
#include <vector>

#include "orbsim/policies.hpp"

namespace orbsim {

/// Everything needed to instantiate one episode: robot fleet, debris
/// distribution, geometry, timing.  When fixed_field is set the same field
/// is used for every episode regardless of its seed.
struct EnvSpec {
  std::vector<RobotSpec> robots;
  FieldSpec field_spec;
  Region region;
  Vec2 disposal = Vec2(7.5, 7.5);
  double dt = 0.1;
  double horizon = 300.0;
  double lambda_fuel = 0.01;
  double lambda_accel = 1.0;
  std::optional<DebrisField> fixed_field;
};

/// Fresh world for this spec; field_seed picks the debris layout unless the
/// spec pins a fixed field.
World make_env_world(const EnvSpec& env, uint64_t field_seed);

struct EvalReport {
  int n = 0;
  double mean_transfer = 0.0;
  double std_transfer = 0.0;
  double mean_reward = 0.0;
  double std_reward = 0.0;
  double mean_fuel = 0.0;
  double std_fuel = 0.0;
  std::vector<double> transfer_rates;  // per episode, in seed order
  std::vector<double> rewards;
  std::vector<double> fuels;
};

/// Runs n episodes on fields seeded seed, seed+1, ... and reduces to
/// mean/std (population convention, so n=1 gives 0).  Episodes fan out
/// across threads; the reduction order is fixed, so results are
/// deterministic.  The policy's decide() must be re-entrant.
EvalReport monte_carlo_eval(Policy& policy, const EnvSpec& env, int n,
                            uint64_t seed);

/// Coordinate ascent over per-robot rules, starting from all-FIFO: sweep
/// robots in id order, keep a rule change only when it strictly improves the
/// Monte-Carlo mean reward on the shared evaluation seeds, stop after a
/// no-change sweep (at most 10 sweeps).
RulePolicy greedy_rule_search(int robot_count, const EnvSpec& env,
                              const std::vector<Rule>& rules, int n_mc,
                              uint64_t seed);

struct QHyper {
  int episodes = 300;
  double lr = 0.2;
  double discount = 0.95;
  double eps_start = 1.0;
  double eps_end = 0.05;
  int grid_n = 4;
};

struct TrainEpisodeRow {
  int episode = 0;
  double reward_total = 0.0;
  double transfer_rate = 0.0;
  double epsilon = 0.0;
};

/// Epsilon-greedy tabular training over whole episodes.  Decisions are
/// semi-Markov: each robot's (state, action) stays open until that robot's
/// next decision, collecting +1 per own retrieval minus the fuel and penalty
/// accrued in between; open decisions flush as terminal at episode end.
/// Epsilon decays linearly from eps_start to eps_end across episodes.
/// Returns the greedy policy (epsilon 0); bit-reproducible given seed.
QPolicy train_q_policy(const EnvSpec& env, const QHyper& hyper, uint64_t seed,
                       std::vector<TrainEpisodeRow>* curve = nullptr);

struct BruteForceResult {
  /// Retrieval queue per robot id, the best complete plan found.
  std::map<int, std::vector<int>> queues;
  double value = 0.0;  // reward_total of that plan
};

/// Exhaustive search over complete plans: every split of the Pending items
/// between at most two robots in every retrieval order, each simulated with
/// a scripted policy.  First-found plan wins ties.  Bounded to <= 2 robots
/// and <= 6 Pending items.
BruteForceResult brute_force_optimal(const World& world, double horizon);

}  // namespace orbsim
