#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "orbsim/world.hpp"

namespace orbsim {

/// Lowest-id reachable Pending debris per Idle robot, robots visited in
/// ascending id; no debris handed out twice within one decision.
Assignments fifo_assign(const World& world);

/// Globally greedy shortest-processing-time matching: candidate (robot,
/// debris) pairs ranked by estimated completion time, smallest first, ties
/// by debris id then robot id.
Assignments spt_assign(const World& world);

enum class Rule { FIFO, SPT };

std::string rule_name(Rule rule);

/// One rule per robot (parallel to the world's id-sorted robot list).
/// Uniform rule sets collapse to the corresponding global assigner; mixed
/// sets are resolved robot by robot in id order, each robot applying its own
/// rule to the debris still unassigned in this decision.
class RulePolicy : public Policy {
 public:
  explicit RulePolicy(std::vector<Rule> rules);

  Assignments decide(const World& world) override;
  std::string name() const override;

  const std::vector<Rule>& rules() const { return rules_; }

 private:
  std::vector<Rule> rules_;
};

/// Fixed per-robot retrieval queues; each Idle robot chases the first item
/// of its queue that is still Pending.  The exhaustive-search oracle uses
/// this to realize one candidate plan.
class ScriptedPolicy : public Policy {
 public:
  explicit ScriptedPolicy(std::map<int, std::vector<int>> queues);

  Assignments decide(const World& world) override;
  std::string name() const override;

 private:
  std::map<int, std::vector<int>> queues_;
};

/// Discretized world features for tabular learning: per-robot cell on an
/// n x n grid over the region, per-robot busy bit, Pending count bucketed
/// into {0, 1, 2-3, 4+}.
struct StateKey {
  std::vector<int> robot_cell;
  std::vector<bool> robot_busy;
  int pending_bucket = 0;

  /// Mixed-radix packing; robots contribute in id order.
  uint64_t pack(int grid_n) const;
};

StateKey make_state_key(const World& world, int grid_n);

int pending_bucket_of(int pending_count);

/// Candidate debris ids for the capped action set: the up-to-three nearest
/// Pending items by straight-line distance (ties by id), excluding ids in
/// taken.  Action 3 (and any action without a candidate) means None.
std::vector<int> action_candidates(const World& world, size_t robot_index,
                                   const std::vector<int>& taken);

inline constexpr int kQActionCount = 4;

/// Tabular Q-policy over StateKey with the capped candidate action set.
/// decide() is the greedy mode used for evaluation; exploration lives in the
/// trainer.
class QPolicy : public Policy {
 public:
  QPolicy(int robot_count, int grid_n, double learning_rate, double discount,
          double epsilon);

  Assignments decide(const World& world) override;
  std::string name() const override;

  /// Highest-value action, ties broken toward the lowest index.
  int greedy_action(uint64_t key) const;
  double max_q(uint64_t key) const;
  double q_value(uint64_t key, int action) const;

  std::map<uint64_t, std::array<double, kQActionCount>> table;
  int robot_count;
  int grid_n;
  double learning_rate;
  double discount;
  double epsilon;
};

/// Standard tabular update, in place:
/// Q(s,a) <- (1-lr) Q(s,a) + lr (r + discount * max_a' Q(s',a') [not terminal]).
void q_update(QPolicy& q, uint64_t s, int action, double reward, uint64_t s_next,
              bool terminal);

/// Full table dump, one row per (state, action), states in key order.  The
/// hyperparameters and shape ride along in every row so the file is
/// self-describing.
std::string qtable_to_csv(const QPolicy& policy);
QPolicy qtable_from_csv(const std::string& text);

}  // namespace orbsim
