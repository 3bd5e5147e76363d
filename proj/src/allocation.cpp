#include "orbsim/allocation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "orbsim/errors.hpp"
#include "orbsim/rng.hpp"

namespace orbsim {

namespace {

double mean_of(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return v.empty() ? 0.0 : sum / static_cast<double>(v.size());
}

// Population convention: a single sample has zero spread.
double std_of(const std::vector<double>& v, double mean) {
  if (v.empty()) return 0.0;
  double sum = 0.0;
  for (double x : v) sum += (x - mean) * (x - mean);
  return std::sqrt(sum / static_cast<double>(v.size()));
}

bool robot_can_decide(const RobotState& r) {
  return r.phase == RobotPhase::Idle && !r.frozen;
}

}  // namespace

World make_env_world(const EnvSpec& env, uint64_t field_seed) {
  DebrisField field = env.fixed_field
                          ? *env.fixed_field
                          : make_field(env.field_spec, env.region, field_seed);
  World world = world_init(env.robots, field, env.disposal, env.dt);
  world.lambda_fuel = env.lambda_fuel;
  world.lambda_accel = env.lambda_accel;
  return world;
}

EvalReport monte_carlo_eval(Policy& policy, const EnvSpec& env, int n,
                            uint64_t seed) {
  if (n < 1) throw InvalidN("monte carlo evaluation needs n >= 1");

  EvalReport report;
  report.n = n;
  report.transfer_rates.resize(static_cast<size_t>(n));
  report.rewards.resize(static_cast<size_t>(n));
  report.fuels.resize(static_cast<size_t>(n));

  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        World world = make_env_world(env, seed + static_cast<uint64_t>(i));
        EpisodeMetrics m = run_episode(world, policy, env.horizon);
        report.transfer_rates[static_cast<size_t>(i)] = m.transfer_rate;
        report.rewards[static_cast<size_t>(i)] = m.reward_total;
        report.fuels[static_cast<size_t>(i)] = m.total_fuel;
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned n_threads = std::min<unsigned>(hw, static_cast<unsigned>(n));
  std::vector<std::thread> threads;
  for (unsigned t = 0; t + 1 < n_threads; ++t) threads.emplace_back(worker);
  worker();
  for (std::thread& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);

  report.mean_transfer = mean_of(report.transfer_rates);
  report.std_transfer = std_of(report.transfer_rates, report.mean_transfer);
  report.mean_reward = mean_of(report.rewards);
  report.std_reward = std_of(report.rewards, report.mean_reward);
  report.mean_fuel = mean_of(report.fuels);
  report.std_fuel = std_of(report.fuels, report.mean_fuel);
  return report;
}

RulePolicy greedy_rule_search(int robot_count, const EnvSpec& env,
                              const std::vector<Rule>& rules, int n_mc,
                              uint64_t seed) {
  if (robot_count < 1) throw EmptyRobots("rule search needs robots");
  if (rules.empty()) throw InvalidHyper("rule search needs a non-empty rule set");
  if (n_mc < 1) throw InvalidN("rule search needs n_mc >= 1");

  const bool has_fifo =
      std::find(rules.begin(), rules.end(), Rule::FIFO) != rules.end();
  std::vector<Rule> current(static_cast<size_t>(robot_count),
                            has_fifo ? Rule::FIFO : rules.front());

  auto score_of = [&](const std::vector<Rule>& candidate) {
    RulePolicy policy(candidate);
    return monte_carlo_eval(policy, env, n_mc, seed).mean_reward;
  };

  double current_score = score_of(current);
  for (int sweep = 0; sweep < 10; ++sweep) {
    bool changed = false;
    for (int i = 0; i < robot_count; ++i) {
      for (Rule candidate : rules) {
        if (candidate == current[static_cast<size_t>(i)]) continue;
        std::vector<Rule> trial = current;
        trial[static_cast<size_t>(i)] = candidate;
        const double trial_score = score_of(trial);
        if (trial_score > current_score) {
          current = trial;
          current_score = trial_score;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  return RulePolicy(current);
}

namespace {

// One not-yet-closed decision of the semi-Markov training loop.
struct OpenDecision {
  uint64_t key = 0;
  int action = 0;
  double fuel_at = 0.0;
  double penalty_at = 0.0;
  int retrieved_at = 0;
};

}  // namespace

QPolicy train_q_policy(const EnvSpec& env, const QHyper& hyper, uint64_t seed,
                       std::vector<TrainEpisodeRow>* curve) {
  if (hyper.episodes < 1) throw InvalidHyper("training needs episodes >= 1");
  if (!(hyper.eps_start >= 0.0 && hyper.eps_start <= 1.0) ||
      !(hyper.eps_end >= 0.0 && hyper.eps_end <= 1.0))
    throw InvalidHyper("epsilon schedule must lie in [0, 1]");
  if (env.robots.empty()) throw EmptyRobots("training needs robots");

  const int n_robots = static_cast<int>(env.robots.size());
  QPolicy policy(n_robots, hyper.grid_n, hyper.lr, hyper.discount, 0.0);
  Rng rng(derive_seed(seed, 1));

  for (int e = 0; e < hyper.episodes; ++e) {
    const double frac =
        hyper.episodes > 1
            ? static_cast<double>(e) / static_cast<double>(hyper.episodes - 1)
            : 1.0;
    const double epsilon =
        hyper.eps_start + (hyper.eps_end - hyper.eps_start) * frac;

    World world = make_env_world(env, seed + static_cast<uint64_t>(e));
    world.horizon = env.horizon;
    const int total = static_cast<int>(world.field.items.size());
    std::vector<std::optional<OpenDecision>> open(world.robots.size());
    std::vector<int> own_retrieved(world.robots.size(), 0);

    auto retrieved_count = [&world] {
      int count = 0;
      for (const DebrisItem& item : world.field.items)
        if (item.state == DebrisState::Retrieved) ++count;
      return count;
    };
    auto robot_index_of = [&world](int robot_id) {
      for (size_t i = 0; i < world.specs.size(); ++i)
        if (world.specs[i].id == robot_id) return i;
      return world.specs.size();
    };

    std::vector<Event> events;
    while (world.clock < env.horizon - 1e-9 && retrieved_count() < total) {
      bool any_idle = false;
      bool any_pending = false;
      for (const RobotState& r : world.robots) any_idle |= robot_can_decide(r);
      for (const DebrisItem& item : world.field.items)
        any_pending |= item.state == DebrisState::Pending;

      Assignments assignments;
      if (any_idle && any_pending) {
        const uint64_t key =
            make_state_key(world, hyper.grid_n).pack(hyper.grid_n);
        std::vector<int> taken;
        for (size_t i = 0; i < world.robots.size(); ++i) {
          if (!robot_can_decide(world.robots[i])) continue;
          if (open[i]) {
            const double reward =
                static_cast<double>(own_retrieved[i] - open[i]->retrieved_at) -
                world.lambda_fuel *
                    (world.robots[i].fuel_used - open[i]->fuel_at) -
                (world.penalty_accum - open[i]->penalty_at);
            q_update(policy, open[i]->key, open[i]->action, reward, key, false);
          }
          const int action =
              rng.uniform() < epsilon
                  ? static_cast<int>(rng.uniform_int(kQActionCount))
                  : policy.greedy_action(key);
          open[i] = OpenDecision{key, action, world.robots[i].fuel_used,
                                 world.penalty_accum, own_retrieved[i]};
          if (action < 3) {
            const std::vector<int> cands = action_candidates(world, i, taken);
            if (static_cast<size_t>(action) < cands.size()) {
              assignments[world.specs[i].id] =
                  cands[static_cast<size_t>(action)];
              taken.push_back(cands[static_cast<size_t>(action)]);
            }
          }
        }
      }

      events.clear();
      step(world, assignments, &events);
      for (const Event& event : events) {
        if (event.kind != EventKind::Retrieved) continue;
        const size_t i = robot_index_of(event.robot_id);
        if (i < own_retrieved.size()) ++own_retrieved[i];
      }
    }

    for (size_t i = 0; i < world.robots.size(); ++i) {
      if (!open[i]) continue;
      const double reward =
          static_cast<double>(own_retrieved[i] - open[i]->retrieved_at) -
          world.lambda_fuel * (world.robots[i].fuel_used - open[i]->fuel_at) -
          (world.penalty_accum - open[i]->penalty_at);
      q_update(policy, open[i]->key, open[i]->action, reward, 0, true);
    }

    if (curve) {
      double fuel = 0.0;
      for (const RobotState& r : world.robots) fuel += r.fuel_used;
      const int done = retrieved_count();
      TrainEpisodeRow row;
      row.episode = e;
      row.reward_total =
          done - world.lambda_fuel * fuel - world.penalty_accum;
      row.transfer_rate = static_cast<double>(done) / std::max(total, 1);
      row.epsilon = epsilon;
      curve->push_back(row);
    }
  }
  return policy;
}

BruteForceResult brute_force_optimal(const World& world, double horizon) {
  if (world.specs.size() > 2)
    throw InstanceTooLarge("exhaustive search is bounded to 2 robots");
  std::vector<int> pending;
  for (const DebrisItem& item : world.field.items)
    if (item.state == DebrisState::Pending) pending.push_back(item.id);
  std::sort(pending.begin(), pending.end());
  if (pending.size() > 6)
    throw InstanceTooLarge("exhaustive search is bounded to 6 pending items");

  BruteForceResult best;
  best.value = -std::numeric_limits<double>::infinity();
  auto consider = [&](std::map<int, std::vector<int>> queues) {
    ScriptedPolicy policy(queues);
    const EpisodeMetrics m = run_episode(world, policy, horizon);
    if (m.reward_total > best.value) {
      best.value = m.reward_total;
      best.queues = std::move(queues);
    }
  };

  std::vector<int> perm = pending;
  do {
    if (world.specs.size() == 1) {
      consider({{world.specs[0].id, perm}});
    } else {
      for (size_t k = 0; k <= perm.size(); ++k) {
        std::map<int, std::vector<int>> queues;
        queues[world.specs[0].id] =
            std::vector<int>(perm.begin(), perm.begin() + k);
        queues[world.specs[1].id] =
            std::vector<int>(perm.begin() + k, perm.end());
        consider(std::move(queues));
      }
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace orbsim
