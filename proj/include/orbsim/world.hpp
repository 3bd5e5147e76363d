#pragma once

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "orbsim/debris.hpp"

namespace orbsim {

struct RobotSpec {
  int id = 0;
  Vec2 start_position = Vec2::Zero();
  double max_speed = 1.0;        // m/s
  double max_accel = 0.5;        // m/s^2
  double workspace_radius = 20.0;  // m, reach from the current position
  double grasp_time = 1.0;       // s
  double fuel_budget = 1e6;      // m/s of accumulated delta-v
};

enum class RobotPhase { Idle, Transit, Grasping, Transporting, Releasing };

struct RobotState {
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
  double fuel_used = 0.0;
  RobotPhase phase = RobotPhase::Idle;
  double grasp_timer = 0.0;  // meaningful while Grasping
  std::optional<int> assigned_debris;
  bool frozen = false;  // out of fuel; permanently immobile
};

enum class EventKind {
  Claimed,
  GraspStarted,
  Grasped,
  Retrieved,
  ClaimReverted,
  FuelExhausted,
  EpisodeStart,
  EpisodeEnd,
};

/// robot_id / debris_id are -1 where not applicable (meta events).
struct Event {
  double clock = 0.0;
  int robot_id = -1;
  EventKind kind = EventKind::EpisodeStart;
  int debris_id = -1;
};

struct World {
  std::vector<RobotSpec> specs;    // sorted by id
  std::vector<RobotState> robots;  // parallel to specs
  DebrisField field;
  Vec2 disposal_point = Vec2::Zero();
  double clock = 0.0;
  double dt = 0.1;
  /// Episode end time; run_episode stamps it so policies can reason about
  /// remaining time.  Infinite until then.
  double horizon = std::numeric_limits<double>::infinity();
  double penalty_accum = 0.0;
  double lambda_fuel = 0.01;   // reward weight on total fuel
  double lambda_accel = 1.0;   // penalty weight on acceleration excess
};

struct EpisodeMetrics {
  int retrieved_count = 0;
  int total_debris = 0;
  double transfer_rate = 0.0;  // retrieved / max(total, 1)
  double elapsed = 0.0;        // s
  double total_fuel = 0.0;
  double penalty_accum = 0.0;
  double reward_total = 0.0;
};

/// New debris assignments, robot id -> debris id.  Robots absent from the
/// map keep doing whatever they were doing.
using Assignments = std::map<int, int>;

/// Task-allocation strategy: queried whenever at least one robot is Idle and
/// Pending debris exist.
struct Policy {
  virtual ~Policy() = default;
  virtual Assignments decide(const World& world) = 0;
  virtual std::string name() const = 0;
};

/// Fresh world at clock 0: robots Idle at their start positions, debris
/// states reset to Pending.
World world_init(const std::vector<RobotSpec>& robots, const DebrisField& field,
                 const Vec2& disposal, double dt);

/// Advances one step of dt seconds.  New assignments claim debris; robots
/// run their phase logic in id order (transit with a trapezoidal velocity
/// profile, timed grasping, transport to the disposal point); unattached
/// debris drifts; fuel integrates commanded acceleration magnitude.  A robot
/// that cannot fund the commanded burn freezes for good, releasing a claim
/// it has not yet converted into a grasp.  Emitted events are appended to
/// events (when non-null) stamped with the pre-step clock.
void step(World& world, const Assignments& assignments,
          std::vector<Event>* events = nullptr);

/// Steps until the horizon (seconds) or until every item is Retrieved;
/// reward_total = retrieved - lambda_fuel * fuel - penalty.
EpisodeMetrics run_episode(World world, Policy& policy, double horizon,
                           std::vector<Event>* events = nullptr);

/// Round-trip feasibility: intercept the (linearly drifting) debris inside
/// the robot's workspace, then carry it to disposal, within the remaining
/// horizon and fuel.  Conservative on fuel, first-order on timing.
bool reachable(const RobotSpec& spec, const RobotState& state,
               const DebrisItem& debris, const Vec2& disposal,
               double horizon_remaining);

/// Time for the same round trip, +infinity when infeasible; the quantity
/// SPT-style policies rank by.
double estimated_completion_time(const RobotSpec& spec, const RobotState& state,
                                 const DebrisItem& debris, const Vec2& disposal,
                                 double horizon_remaining);

/// Penalty accrued per step for commanded acceleration beyond the limit;
/// zero for the built-in controller, which caps its commands.
double accel_penalty(double accel_norm, double max_accel, double lambda_accel);

std::string event_kind_name(EventKind kind);

/// Columns: clock,robot_id,event,debris_id.  Meta events leave the id cells
/// empty.
std::string events_to_csv(const std::vector<Event>& events);

}  // namespace orbsim
