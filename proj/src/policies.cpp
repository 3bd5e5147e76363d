#include "orbsim/policies.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "orbsim/csv.hpp"
#include "orbsim/errors.hpp"

namespace orbsim {

namespace {

double horizon_remaining(const World& world) {
  return world.horizon - world.clock;
}

bool can_decide(const RobotState& r) {
  return r.phase == RobotPhase::Idle && !r.frozen;
}

/// Pending items not yet handed out in this decision, ids ascending.
std::vector<const DebrisItem*> pending_items(const World& world,
                                             const std::set<int>& taken) {
  std::vector<const DebrisItem*> out;
  for (const DebrisItem& item : world.field.items)
    if (item.state == DebrisState::Pending && !taken.count(item.id))
      out.push_back(&item);
  std::sort(out.begin(), out.end(),
            [](const DebrisItem* a, const DebrisItem* b) {
              return a->id < b->id;
            });
  return out;
}

int fifo_pick(const World& world, size_t i, const std::set<int>& taken) {
  for (const DebrisItem* item : pending_items(world, taken)) {
    if (reachable(world.specs[i], world.robots[i], *item, world.disposal_point,
                  horizon_remaining(world)))
      return item->id;
  }
  return -1;
}

int spt_pick(const World& world, size_t i, const std::set<int>& taken) {
  double best_time = std::numeric_limits<double>::infinity();
  int best_id = -1;
  for (const DebrisItem* item : pending_items(world, taken)) {
    const double t =
        estimated_completion_time(world.specs[i], world.robots[i], *item,
                                  world.disposal_point, horizon_remaining(world));
    if (t < best_time) {
      best_time = t;
      best_id = item->id;
    }
  }
  return best_id;
}

}  // namespace

Assignments fifo_assign(const World& world) {
  Assignments out;
  std::set<int> taken;
  for (size_t i = 0; i < world.robots.size(); ++i) {
    if (!can_decide(world.robots[i])) continue;
    const int id = fifo_pick(world, i, taken);
    if (id >= 0) {
      out[world.specs[i].id] = id;
      taken.insert(id);
    }
  }
  return out;
}

Assignments spt_assign(const World& world) {
  struct Candidate {
    double time;
    int debris_id;
    int robot_id;
    size_t robot_index;
  };
  std::vector<Candidate> candidates;
  for (size_t i = 0; i < world.robots.size(); ++i) {
    if (!can_decide(world.robots[i])) continue;
    for (const DebrisItem* item : pending_items(world, {})) {
      const double t = estimated_completion_time(
          world.specs[i], world.robots[i], *item, world.disposal_point,
          horizon_remaining(world));
      if (std::isfinite(t))
        candidates.push_back({t, item->id, world.specs[i].id, i});
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.time != b.time) return a.time < b.time;
              if (a.debris_id != b.debris_id) return a.debris_id < b.debris_id;
              return a.robot_id < b.robot_id;
            });

  Assignments out;
  std::set<int> taken_debris;
  std::set<int> taken_robots;
  for (const Candidate& c : candidates) {
    if (taken_debris.count(c.debris_id) || taken_robots.count(c.robot_id))
      continue;
    out[c.robot_id] = c.debris_id;
    taken_debris.insert(c.debris_id);
    taken_robots.insert(c.robot_id);
  }
  return out;
}

std::string rule_name(Rule rule) {
  return rule == Rule::FIFO ? "fifo" : "spt";
}

RulePolicy::RulePolicy(std::vector<Rule> rules) : rules_(std::move(rules)) {
  if (rules_.empty()) throw EmptyRobots("rule policy needs at least one rule");
}

Assignments RulePolicy::decide(const World& world) {
  if (rules_.size() != world.robots.size())
    throw DimensionMismatch("rule count does not match robot count");
  const bool all_fifo =
      std::all_of(rules_.begin(), rules_.end(),
                  [](Rule r) { return r == Rule::FIFO; });
  const bool all_spt = std::all_of(rules_.begin(), rules_.end(),
                                   [](Rule r) { return r == Rule::SPT; });
  if (all_fifo) return fifo_assign(world);
  if (all_spt) return spt_assign(world);

  // Mixed rule sets fall back to per-robot sequential resolution.
  Assignments out;
  std::set<int> taken;
  for (size_t i = 0; i < world.robots.size(); ++i) {
    if (!can_decide(world.robots[i])) continue;
    const int id = rules_[i] == Rule::FIFO ? fifo_pick(world, i, taken)
                                           : spt_pick(world, i, taken);
    if (id >= 0) {
      out[world.specs[i].id] = id;
      taken.insert(id);
    }
  }
  return out;
}

std::string RulePolicy::name() const {
  std::string out = "rules:";
  for (size_t i = 0; i < rules_.size(); ++i) {
    if (i > 0) out += "+";
    out += rule_name(rules_[i]);
  }
  return out;
}

ScriptedPolicy::ScriptedPolicy(std::map<int, std::vector<int>> queues)
    : queues_(std::move(queues)) {}

Assignments ScriptedPolicy::decide(const World& world) {
  Assignments out;
  std::set<int> taken;
  for (size_t i = 0; i < world.robots.size(); ++i) {
    if (!can_decide(world.robots[i])) continue;
    auto it = queues_.find(world.specs[i].id);
    if (it == queues_.end()) continue;
    for (int id : it->second) {
      if (taken.count(id)) continue;
      bool pending = false;
      for (const DebrisItem& item : world.field.items)
        if (item.id == id && item.state == DebrisState::Pending) pending = true;
      if (pending) {
        out[world.specs[i].id] = id;
        taken.insert(id);
        break;
      }
    }
  }
  return out;
}

std::string ScriptedPolicy::name() const { return "scripted"; }

int pending_bucket_of(int pending_count) {
  if (pending_count <= 0) return 0;
  if (pending_count == 1) return 1;
  if (pending_count <= 3) return 2;
  return 3;
}

StateKey make_state_key(const World& world, int grid_n) {
  if (grid_n < 1) throw InvalidGrid("state grid needs n >= 1");
  StateKey key;
  const Region& region = world.field.region;
  for (const RobotState& r : world.robots) {
    const double fx = (r.position.x() - region.min.x()) / region.width();
    const double fy = (r.position.y() - region.min.y()) / region.height();
    const int ix = std::clamp(static_cast<int>(std::floor(fx * grid_n)), 0,
                              grid_n - 1);
    const int iy = std::clamp(static_cast<int>(std::floor(fy * grid_n)), 0,
                              grid_n - 1);
    key.robot_cell.push_back(iy * grid_n + ix);
    key.robot_busy.push_back(r.phase != RobotPhase::Idle);
  }
  int pending = 0;
  for (const DebrisItem& item : world.field.items)
    if (item.state == DebrisState::Pending) ++pending;
  key.pending_bucket = pending_bucket_of(pending);
  return key;
}

uint64_t StateKey::pack(int grid_n) const {
  const uint64_t cells = static_cast<uint64_t>(grid_n) * grid_n;
  uint64_t key = 0;
  for (size_t i = 0; i < robot_cell.size(); ++i) {
    key = key * cells + static_cast<uint64_t>(robot_cell[i]);
    key = key * 2 + (robot_busy[i] ? 1 : 0);
  }
  return key * 4 + static_cast<uint64_t>(pending_bucket);
}

std::vector<int> action_candidates(const World& world, size_t robot_index,
                                   const std::vector<int>& taken) {
  struct Entry {
    double dist;
    int id;
  };
  std::vector<Entry> entries;
  for (const DebrisItem& item : world.field.items) {
    if (item.state != DebrisState::Pending) continue;
    if (std::find(taken.begin(), taken.end(), item.id) != taken.end()) continue;
    entries.push_back(
        {(item.position - world.robots[robot_index].position).norm(), item.id});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    return a.id < b.id;
  });
  std::vector<int> out;
  for (size_t i = 0; i < entries.size() && i < 3; ++i)
    out.push_back(entries[i].id);
  return out;
}

QPolicy::QPolicy(int robot_count, int grid_n, double learning_rate,
                 double discount, double epsilon)
    : robot_count(robot_count),
      grid_n(grid_n),
      learning_rate(learning_rate),
      discount(discount),
      epsilon(epsilon) {
  if (robot_count < 1) throw EmptyRobots("q-policy needs at least one robot");
  if (grid_n < 1) throw InvalidGrid("state grid needs n >= 1");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0))
    throw InvalidHyper("learning rate must lie in (0, 1]");
  if (!(discount >= 0.0 && discount < 1.0))
    throw InvalidHyper("discount must lie in [0, 1)");
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw InvalidHyper("epsilon must lie in [0, 1]");
}

double QPolicy::q_value(uint64_t key, int action) const {
  auto it = table.find(key);
  return it == table.end() ? 0.0 : it->second[static_cast<size_t>(action)];
}

double QPolicy::max_q(uint64_t key) const {
  auto it = table.find(key);
  if (it == table.end()) return 0.0;
  return *std::max_element(it->second.begin(), it->second.end());
}

int QPolicy::greedy_action(uint64_t key) const {
  int best = 0;
  double best_value = q_value(key, 0);
  for (int a = 1; a < kQActionCount; ++a) {
    const double v = q_value(key, a);
    if (v > best_value) {
      best_value = v;
      best = a;
    }
  }
  return best;
}

Assignments QPolicy::decide(const World& world) {
  if (static_cast<int>(world.robots.size()) != robot_count)
    throw DimensionMismatch("q-policy robot count does not match world");
  const uint64_t key = make_state_key(world, grid_n).pack(grid_n);
  Assignments out;
  std::vector<int> taken;
  for (size_t i = 0; i < world.robots.size(); ++i) {
    if (!can_decide(world.robots[i])) continue;
    const int action = greedy_action(key);
    if (action >= 3) continue;  // None
    const std::vector<int> cands = action_candidates(world, i, taken);
    if (static_cast<size_t>(action) >= cands.size()) continue;
    out[world.specs[i].id] = cands[static_cast<size_t>(action)];
    taken.push_back(cands[static_cast<size_t>(action)]);
  }
  return out;
}

std::string QPolicy::name() const { return "qlearn"; }

void q_update(QPolicy& q, uint64_t s, int action, double reward,
              uint64_t s_next, bool terminal) {
  if (action < 0 || action >= kQActionCount)
    throw InvalidHyper("action index out of range");
  const double future = terminal ? 0.0 : q.discount * q.max_q(s_next);
  auto& row = q.table[s];
  const double lr = q.learning_rate;
  row[static_cast<size_t>(action)] =
      (1.0 - lr) * row[static_cast<size_t>(action)] + lr * (reward + future);
}

std::string qtable_to_csv(const QPolicy& policy) {
  std::vector<std::string> header = {"robot_count", "grid_n", "learning_rate",
                                     "discount", "epsilon"};
  for (int i = 1; i <= policy.robot_count; ++i)
    header.push_back("cell_" + std::to_string(i));
  for (int i = 1; i <= policy.robot_count; ++i)
    header.push_back("busy_" + std::to_string(i));
  header.push_back("pending_bucket");
  header.push_back("action");
  header.push_back("value");

  CsvTable table(header);
  const uint64_t cells =
      static_cast<uint64_t>(policy.grid_n) * policy.grid_n;
  for (const auto& [key, values] : policy.table) {
    // Mixed-radix unpack, inverse of StateKey::pack.
    uint64_t rest = key;
    const int bucket = static_cast<int>(rest % 4);
    rest /= 4;
    std::vector<int> cell(policy.robot_count);
    std::vector<int> busy(policy.robot_count);
    for (int i = policy.robot_count - 1; i >= 0; --i) {
      busy[i] = static_cast<int>(rest % 2);
      rest /= 2;
      cell[i] = static_cast<int>(rest % cells);
      rest /= cells;
    }
    for (int action = 0; action < kQActionCount; ++action) {
      std::vector<std::string> row = {
          std::to_string(policy.robot_count), std::to_string(policy.grid_n),
          format_double(policy.learning_rate), format_double(policy.discount),
          format_double(policy.epsilon)};
      for (int i = 0; i < policy.robot_count; ++i)
        row.push_back(std::to_string(cell[i]));
      for (int i = 0; i < policy.robot_count; ++i)
        row.push_back(std::to_string(busy[i]));
      row.push_back(std::to_string(bucket));
      row.push_back(std::to_string(action));
      row.push_back(format_double(values[static_cast<size_t>(action)]));
      table.add_row(std::move(row));
    }
  }
  return table.render();
}

QPolicy qtable_from_csv(const std::string& text) {
  auto rows = parse_csv(text);
  if (rows.size() < 2)
    throw ParseError("q-table CSV needs a header and at least one row");
  const auto& header = rows.front();
  if (header.size() < 8 || header[0] != "robot_count")
    throw ParseError("q-table CSV header mismatch");

  int robot_count = 0;
  try {
    robot_count = std::stoi(rows[1][0]);
  } catch (const std::exception&) {
    throw ParseError("q-table robot_count is not numeric");
  }
  const size_t expected_width = 5 + 2 * static_cast<size_t>(robot_count) + 3;
  if (robot_count < 1 || header.size() != expected_width)
    throw ParseError("q-table CSV width does not match robot_count");

  try {
    QPolicy policy(robot_count, std::stoi(rows[1][1]), std::stod(rows[1][2]),
                   std::stod(rows[1][3]), std::stod(rows[1][4]));
    for (size_t r = 1; r < rows.size(); ++r) {
      const auto& row = rows[r];
      if (row.size() != expected_width)
        throw ParseError("q-table row " + std::to_string(r) +
                         " has wrong width");
      StateKey key;
      for (int i = 0; i < robot_count; ++i)
        key.robot_cell.push_back(std::stoi(row[5 + static_cast<size_t>(i)]));
      for (int i = 0; i < robot_count; ++i)
        key.robot_busy.push_back(
            std::stoi(row[5 + static_cast<size_t>(robot_count + i)]) != 0);
      key.pending_bucket = std::stoi(row[expected_width - 3]);
      const int action = std::stoi(row[expected_width - 2]);
      if (action < 0 || action >= kQActionCount)
        throw ParseError("q-table action index out of range");
      policy.table[key.pack(policy.grid_n)][static_cast<size_t>(action)] =
          std::stod(row[expected_width - 1]);
    }
    return policy;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw ParseError("q-table CSV holds a non-numeric field");
  }
}

}  // namespace orbsim
