#include "orbsim/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "orbsim/csv.hpp"
#include "orbsim/errors.hpp"

namespace orbsim {

namespace {

constexpr double kGraspSlack = 0.05;  // grasp range beyond the item radius, m
constexpr double kReleaseTol = 0.1;   // disposal arrival tolerance, m
constexpr double kInf = std::numeric_limits<double>::infinity();

DebrisItem& item_by_id(World& world, int id) {
  for (DebrisItem& item : world.field.items)
    if (item.id == id) return item;
  throw UnknownDebris("no debris with id " + std::to_string(id));
}

void emit(std::vector<Event>* events, double clock, int robot_id,
          EventKind kind, int debris_id) {
  if (events) events->push_back({clock, robot_id, kind, debris_id});
}

/// Trapezoidal pursuit: cruise at max_speed, stay under the braking envelope
/// sqrt(2 a d), and never overshoot the target within one step.
Vec2 pursuit_velocity(const Vec2& pos, const Vec2& target,
                      const RobotSpec& spec, double dt) {
  const Vec2 d = target - pos;
  const double dist = d.norm();
  if (dist < 1e-12) return Vec2::Zero();
  const double speed = std::min(
      {spec.max_speed, std::sqrt(2.0 * spec.max_accel * dist), dist / dt});
  return d * (speed / dist);
}

void freeze_robot(World& world, size_t i, std::vector<Event>* events) {
  const RobotSpec& spec = world.specs[i];
  RobotState& r = world.robots[i];
  emit(events, world.clock, spec.id, EventKind::FuelExhausted,
       r.assigned_debris.value_or(-1));
  if (r.assigned_debris &&
      (r.phase == RobotPhase::Transit || r.phase == RobotPhase::Grasping)) {
    DebrisItem& item = item_by_id(world, *r.assigned_debris);
    item.state = DebrisState::Pending;
    emit(events, world.clock, spec.id, EventKind::ClaimReverted, item.id);
    r.assigned_debris.reset();
  }
  // A grasped item stays attached to the stranded robot; it is never counted
  // as retrieved but cannot be claimed by anyone else either.
  r.phase = RobotPhase::Idle;
  r.velocity = Vec2::Zero();
  r.frozen = true;
}

void act_robot(World& world, size_t i, std::vector<Event>* events) {
  const RobotSpec& spec = world.specs[i];
  RobotState& r = world.robots[i];
  if (r.frozen) return;

  switch (r.phase) {
    case RobotPhase::Transit: {
      DebrisItem& item = item_by_id(world, *r.assigned_debris);
      const double tol = item.size + kGraspSlack;
      if ((item.position - r.position).norm() <= tol + 1e-12) {
        r.phase = RobotPhase::Grasping;
        r.grasp_timer = 0.0;
        emit(events, world.clock, spec.id, EventKind::GraspStarted, item.id);
      }
      break;
    }
    case RobotPhase::Grasping: {
      r.grasp_timer += world.dt;
      if (r.grasp_timer >= spec.grasp_time - 1e-12) {
        DebrisItem& item = item_by_id(world, *r.assigned_debris);
        item.state = DebrisState::Grasped;
        r.phase = RobotPhase::Transporting;
        emit(events, world.clock, spec.id, EventKind::Grasped, item.id);
      }
      break;
    }
    case RobotPhase::Transporting: {
      if ((world.disposal_point - r.position).norm() <= kReleaseTol + 1e-12) {
        DebrisItem& item = item_by_id(world, *r.assigned_debris);
        item.state = DebrisState::Retrieved;
        item.position = r.position;
        item.drift_velocity = Vec2::Zero();
        emit(events, world.clock, spec.id, EventKind::Retrieved, item.id);
        r.phase = RobotPhase::Idle;
        r.assigned_debris.reset();
      }
      break;
    }
    default:
      break;
  }

  Vec2 v_des = Vec2::Zero();
  if (r.phase == RobotPhase::Transit) {
    const DebrisItem& item = item_by_id(world, *r.assigned_debris);
    v_des = pursuit_velocity(r.position, item.position, spec, world.dt);
  } else if (r.phase == RobotPhase::Transporting) {
    v_des = pursuit_velocity(r.position, world.disposal_point, spec, world.dt);
  }

  Vec2 accel = (v_des - r.velocity) / world.dt;
  double a_norm = accel.norm();
  if (a_norm > spec.max_accel) {
    accel *= spec.max_accel / a_norm;
    a_norm = spec.max_accel;
  }
  world.penalty_accum +=
      accel_penalty(a_norm, spec.max_accel, world.lambda_accel);

  const double fuel_needed = a_norm * world.dt;
  if (r.fuel_used + fuel_needed > spec.fuel_budget + 1e-12) {
    freeze_robot(world, i, events);
    return;
  }
  r.fuel_used += fuel_needed;
  r.velocity += accel * world.dt;
  r.position += r.velocity * world.dt;
  if (r.phase == RobotPhase::Transporting)
    item_by_id(world, *r.assigned_debris).position = r.position;
}

}  // namespace

double accel_penalty(double accel_norm, double max_accel, double lambda_accel) {
  const double excess = std::max(0.0, accel_norm - max_accel);
  return lambda_accel * excess * excess;
}

World world_init(const std::vector<RobotSpec>& robots, const DebrisField& field,
                 const Vec2& disposal, double dt) {
  if (robots.empty()) throw EmptyRobots("world needs at least one robot");
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw InvalidDt("dt must be positive and finite");

  World world;
  world.specs = robots;
  std::sort(world.specs.begin(), world.specs.end(),
            [](const RobotSpec& a, const RobotSpec& b) { return a.id < b.id; });
  for (size_t i = 0; i + 1 < world.specs.size(); ++i) {
    if (world.specs[i].id == world.specs[i + 1].id)
      throw ValidationError("robots", "duplicate robot id " +
                                          std::to_string(world.specs[i].id));
  }
  for (const RobotSpec& spec : world.specs) {
    bool ok = spec.max_speed > 0.0 && spec.max_accel > 0.0 &&
              spec.workspace_radius > 0.0 && spec.grasp_time >= 0.0 &&
              spec.fuel_budget > 0.0 && spec.start_position.allFinite();
    if (!ok)
      throw ValidationError("robots", "robot " + std::to_string(spec.id) +
                                          " has a non-positive limit");
  }

  world.robots.resize(world.specs.size());
  for (size_t i = 0; i < world.specs.size(); ++i) {
    world.robots[i].position = world.specs[i].start_position;
  }
  world.field = field;
  {
    std::set<int> ids;
    for (DebrisItem& item : world.field.items) {
      if (!ids.insert(item.id).second)
        throw ValidationError("field", "duplicate debris id " +
                                           std::to_string(item.id));
      item.state = DebrisState::Pending;
    }
  }
  world.disposal_point = disposal;
  world.dt = dt;
  return world;
}

void step(World& world, const Assignments& assignments,
          std::vector<Event>* events) {
  if (!(world.dt > 0.0)) throw InvalidDt("dt must be positive");

  // Claims first, in robot-id order, so each step's mutations are a pure
  // function of (world, assignments).
  std::set<int> claimed_now;
  for (const auto& [robot_id, debris_id] : assignments) {
    auto spec_it = std::find_if(world.specs.begin(), world.specs.end(),
                                [robot_id = robot_id](const RobotSpec& s) {
                                  return s.id == robot_id;
                                });
    if (spec_it == world.specs.end())
      throw ValidationError("assignments",
                            "unknown robot id " + std::to_string(robot_id));
    RobotState& r = world.robots[spec_it - world.specs.begin()];
    DebrisItem& item = item_by_id(world, debris_id);
    if (r.frozen) continue;
    if (r.assigned_debris && *r.assigned_debris == debris_id) continue;
    if (!claimed_now.insert(debris_id).second)
      throw DoubleClaim("debris " + std::to_string(debris_id) +
                        " assigned twice in one step");
    if (item.state == DebrisState::Claimed || item.state == DebrisState::Grasped)
      throw DoubleClaim("debris " + std::to_string(debris_id) +
                        " is already held");
    if (item.state != DebrisState::Pending)
      throw ValidationError("assignments",
                            "debris " + std::to_string(debris_id) +
                                " is not pending");
    if (r.phase != RobotPhase::Idle)
      throw ValidationError("assignments",
                            "robot " + std::to_string(robot_id) + " is busy");
    item.state = DebrisState::Claimed;
    r.assigned_debris = debris_id;
    r.phase = RobotPhase::Transit;
    emit(events, world.clock, robot_id, EventKind::Claimed, debris_id);
  }

  for (size_t i = 0; i < world.robots.size(); ++i) act_robot(world, i, events);

  // Free-floating debris drifts; held items moved with their robot above.
  for (DebrisItem& item : world.field.items) {
    if (item.state == DebrisState::Pending || item.state == DebrisState::Claimed)
      item.position += item.drift_velocity * world.dt;
  }

  world.clock += world.dt;
}

EpisodeMetrics run_episode(World world, Policy& policy, double horizon,
                           std::vector<Event>* events) {
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw InvalidHorizon("horizon must be positive and finite");
  world.horizon = horizon;

  const int total = static_cast<int>(world.field.items.size());
  auto retrieved_count = [&world] {
    int n = 0;
    for (const DebrisItem& item : world.field.items)
      if (item.state == DebrisState::Retrieved) ++n;
    return n;
  };

  emit(events, world.clock, -1, EventKind::EpisodeStart, -1);
  while (world.clock < horizon - 1e-9) {
    if (retrieved_count() == total) break;
    bool any_idle = false;
    bool any_pending = false;
    for (size_t i = 0; i < world.robots.size(); ++i)
      any_idle |= world.robots[i].phase == RobotPhase::Idle &&
                  !world.robots[i].frozen;
    for (const DebrisItem& item : world.field.items)
      any_pending |= item.state == DebrisState::Pending;
    Assignments assignments;
    if (any_idle && any_pending) assignments = policy.decide(world);
    step(world, assignments, events);
  }
  emit(events, world.clock, -1, EventKind::EpisodeEnd, -1);

  EpisodeMetrics m;
  m.retrieved_count = retrieved_count();
  m.total_debris = total;
  m.transfer_rate = static_cast<double>(m.retrieved_count) / std::max(total, 1);
  m.elapsed = world.clock;
  for (const RobotState& r : world.robots) m.total_fuel += r.fuel_used;
  m.penalty_accum = world.penalty_accum;
  m.reward_total =
      m.retrieved_count - world.lambda_fuel * m.total_fuel - m.penalty_accum;
  return m;
}

double estimated_completion_time(const RobotSpec& spec, const RobotState& state,
                                 const DebrisItem& debris, const Vec2& disposal,
                                 double horizon_remaining) {
  if (state.frozen) return kInf;
  const double s = spec.max_speed;
  const Vec2 delta = debris.position - state.position;
  const Vec2 vd = debris.drift_velocity;

  // Smallest t >= 0 with ||delta + vd t|| = s t: straight pursuit at top
  // speed meets the linear drift.
  double t_int;
  const double dist = delta.norm();
  if (dist < 1e-12) {
    t_int = 0.0;
  } else {
    const double a = vd.squaredNorm() - s * s;
    const double b = 2.0 * delta.dot(vd);
    const double c = delta.squaredNorm();
    if (std::abs(a) < 1e-12) {
      if (b >= 0.0) return kInf;  // matched speed, receding
      t_int = -c / b;
    } else {
      const double disc = b * b - 4.0 * a * c;
      if (disc < 0.0) return kInf;
      const double sq = std::sqrt(disc);
      const double t1 = (-b - sq) / (2.0 * a);
      const double t2 = (-b + sq) / (2.0 * a);
      t_int = kInf;
      if (t1 > 0.0) t_int = std::min(t_int, t1);
      if (t2 > 0.0) t_int = std::min(t_int, t2);
      if (!std::isfinite(t_int)) return kInf;
    }
  }

  const Vec2 intercept = debris.position + vd * t_int;
  if ((intercept - state.position).norm() > spec.workspace_radius) return kInf;

  // Ramp-up/braking adds about max_speed / max_accel per leg on top of the
  // cruise time.
  const Vec2 pickup = intercept + vd * spec.grasp_time;
  const double t_out = t_int + s / spec.max_accel;
  const double t_back = (pickup - disposal).norm() / s + s / spec.max_accel;
  const double total = t_out + spec.grasp_time + t_back;
  if (total > horizon_remaining) return kInf;

  // Four full speed changes (start, match, restart, stop) plus drift
  // matching at grasp and release; conservative.
  const double fuel_est = state.velocity.norm() + 4.0 * s + 2.0 * vd.norm();
  if (state.fuel_used + fuel_est > spec.fuel_budget) return kInf;

  return total;
}

bool reachable(const RobotSpec& spec, const RobotState& state,
               const DebrisItem& debris, const Vec2& disposal,
               double horizon_remaining) {
  return std::isfinite(estimated_completion_time(spec, state, debris, disposal,
                                                 horizon_remaining));
}

std::string event_kind_name(EventKind kind) {
  switch (kind) {
    case EventKind::Claimed: return "claimed";
    case EventKind::GraspStarted: return "grasp_started";
    case EventKind::Grasped: return "grasped";
    case EventKind::Retrieved: return "retrieved";
    case EventKind::ClaimReverted: return "claim_reverted";
    case EventKind::FuelExhausted: return "fuel_exhausted";
    case EventKind::EpisodeStart: return "episode_start";
    case EventKind::EpisodeEnd: return "episode_end";
  }
  return "unknown";
}

std::string events_to_csv(const std::vector<Event>& events) {
  CsvTable table({"clock", "robot_id", "event", "debris_id"});
  for (const Event& e : events) {
    table.add_row({format_double(e.clock),
                   e.robot_id < 0 ? "" : std::to_string(e.robot_id),
                   event_kind_name(e.kind),
                   e.debris_id < 0 ? "" : std::to_string(e.debris_id)});
  }
  return table.render();
}

}  // namespace orbsim
