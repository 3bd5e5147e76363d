#include <cmath>
#include <set>

#include "doctest.h"
#include "orbsim/errors.hpp"
#include "orbsim/rng.hpp"
#include "orbsim/world.hpp"

using namespace orbsim;

namespace {

RobotSpec basic_robot(int id, const Vec2& start) {
  RobotSpec spec;
  spec.id = id;
  spec.start_position = start;
  spec.max_speed = 1.0;
  spec.max_accel = 1000.0;
  spec.workspace_radius = 100.0;
  spec.grasp_time = 1.0;
  spec.fuel_budget = 1e6;
  return spec;
}

DebrisField single_item_field(const Vec2& pos) {
  DebrisField field;
  field.region.min = Vec2(-20.0, -20.0);
  field.region.max = Vec2(20.0, 20.0);
  DebrisItem item;
  item.id = 0;
  item.position = pos;
  item.size = 0.2;
  field.items.push_back(item);
  return field;
}

struct ClaimOnce : Policy {
  Assignments decide(const World&) override {
    ++calls;
    if (done) return {};
    done = true;
    return {{0, 0}};
  }
  std::string name() const override { return "claim_once"; }
  int calls = 0;
  bool done = false;
};

struct NeverAssign : Policy {
  Assignments decide(const World&) override {
    ++calls;
    return {};
  }
  std::string name() const override { return "never"; }
  int calls = 0;
};

int count_events(const std::vector<Event>& events, EventKind kind) {
  int n = 0;
  for (const Event& e : events)
    if (e.kind == kind) ++n;
  return n;
}

const Event& find_event(const std::vector<Event>& events, EventKind kind) {
  for (const Event& e : events)
    if (e.kind == kind) return e;
  throw std::runtime_error("event not found");
}

}  // namespace

TEST_CASE("world_init resets states and sorts robots by id") {
  DebrisField field = single_item_field(Vec2(3.0, 0.0));
  field.items[0].state = DebrisState::Grasped;
  std::vector<RobotSpec> specs = {basic_robot(4, Vec2(1.0, 0.0)),
                                  basic_robot(2, Vec2(-1.0, 0.0))};
  World world = world_init(specs, field, Vec2::Zero(), 0.1);
  CHECK(world.specs[0].id == 2);
  CHECK(world.specs[1].id == 4);
  CHECK(world.robots[0].position == Vec2(-1.0, 0.0));
  CHECK(world.robots[1].position == Vec2(1.0, 0.0));
  for (const RobotState& r : world.robots) {
    CHECK(r.phase == RobotPhase::Idle);
    CHECK(r.fuel_used == 0.0);
    CHECK(!r.frozen);
  }
  CHECK(world.field.items[0].state == DebrisState::Pending);
  CHECK(world.clock == 0.0);
}

TEST_CASE("world_init validates robots and debris") {
  DebrisField field = single_item_field(Vec2(3.0, 0.0));
  CHECK_THROWS_AS(world_init({}, field, Vec2::Zero(), 0.1), EmptyRobots);
  auto r = basic_robot(0, Vec2::Zero());
  CHECK_THROWS_AS(world_init({r}, field, Vec2::Zero(), 0.0), InvalidDt);
  CHECK_THROWS_AS(world_init({r}, field, Vec2::Zero(),
                             std::numeric_limits<double>::infinity()),
                  InvalidDt);
  CHECK_THROWS_AS(world_init({r, basic_robot(0, Vec2(1, 1))}, field,
                             Vec2::Zero(), 0.1),
                  ValidationError);
  auto bad = basic_robot(1, Vec2::Zero());
  bad.max_speed = 0.0;
  CHECK_THROWS_AS(world_init({bad}, field, Vec2::Zero(), 0.1), ValidationError);
  DebrisField dupes = field;
  dupes.items.push_back(dupes.items[0]);
  CHECK_THROWS_AS(world_init({r}, dupes, Vec2::Zero(), 0.1), ValidationError);
}

TEST_CASE("a full fetch cycle fires events at the exact step clocks") {
  // dt = 1 with instant steering: out in 3 steps, stop, grasp for one
  // second, return in 3 steps, release.  Fuel is the summed speed changes:
  // accelerate, stop at the item, accelerate back, stop at disposal.
  World world = world_init({basic_robot(0, Vec2::Zero())},
                           single_item_field(Vec2(3.0, 0.0)), Vec2::Zero(), 1.0);
  std::vector<Event> events;
  step(world, {{0, 0}}, &events);
  for (int k = 0; k < 7; ++k) step(world, {}, &events);

  CHECK(find_event(events, EventKind::Claimed).clock == 0.0);
  CHECK(find_event(events, EventKind::GraspStarted).clock == 3.0);
  CHECK(find_event(events, EventKind::Grasped).clock == 4.0);
  CHECK(find_event(events, EventKind::Retrieved).clock == 7.0);
  CHECK(find_event(events, EventKind::Retrieved).robot_id == 0);
  CHECK(find_event(events, EventKind::Retrieved).debris_id == 0);
  CHECK(world.robots[0].fuel_used == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(world.robots[0].phase == RobotPhase::Idle);
  CHECK(world.field.items[0].state == DebrisState::Retrieved);
  CHECK(world.field.items[0].position == Vec2(0.0, 0.0));
  CHECK(world.clock == 8.0);
}

TEST_CASE("zero grasp_time still spends one step in the grasping phase") {
  auto spec = basic_robot(0, Vec2::Zero());
  spec.grasp_time = 0.0;
  World world = world_init({spec}, single_item_field(Vec2(3.0, 0.0)),
                           Vec2::Zero(), 1.0);
  std::vector<Event> events;
  step(world, {{0, 0}}, &events);
  for (int k = 0; k < 5; ++k) step(world, {}, &events);
  CHECK(find_event(events, EventKind::GraspStarted).clock == 3.0);
  CHECK(find_event(events, EventKind::Grasped).clock == 4.0);
}

TEST_CASE("unclaimed and claimed debris drift while held debris does not") {
  DebrisField field = single_item_field(Vec2(5.0, 0.0));
  field.items[0].drift_velocity = Vec2(0.25, -0.5);
  DebrisItem second;
  second.id = 1;
  second.position = Vec2(-5.0, 0.0);
  second.drift_velocity = Vec2(0.0, 1.0);
  field.items.push_back(second);
  World world = world_init({basic_robot(0, Vec2(30.0, 30.0))}, field,
                           Vec2::Zero(), 0.5);
  step(world, {{0, 1}});
  CHECK(world.field.items[0].position == Vec2(5.125, -0.25));
  CHECK(world.field.items[1].position == Vec2(-5.0, 0.5));
  CHECK(world.field.items[1].state == DebrisState::Claimed);

  // A retrieved item stays put.
  world.field.items[0].state = DebrisState::Retrieved;
  Vec2 before = world.field.items[0].position;
  step(world, {});
  CHECK(world.field.items[0].position == before);
}

TEST_CASE("conflicting or illegal claims are rejected") {
  DebrisField field = single_item_field(Vec2(3.0, 0.0));
  DebrisItem second;
  second.id = 7;
  second.position = Vec2(0.0, 3.0);
  field.items.push_back(second);
  std::vector<RobotSpec> specs = {basic_robot(0, Vec2::Zero()),
                                  basic_robot(1, Vec2(1.0, 0.0))};
  World world = world_init(specs, field, Vec2::Zero(), 0.1);

  World w = world;
  CHECK_THROWS_AS(step(w, {{0, 0}, {1, 0}}), DoubleClaim);
  w = world;
  CHECK_THROWS_AS(step(w, {{0, 99}}), UnknownDebris);
  w = world;
  CHECK_THROWS_AS(step(w, {{5, 0}}), ValidationError);

  w = world;
  step(w, {{0, 0}});
  World w2 = w;
  CHECK_THROWS_AS(step(w2, {{1, 0}}), DoubleClaim);  // already claimed
  w2 = w;
  CHECK_THROWS_AS(step(w2, {{0, 7}}), ValidationError);  // robot busy

  w2 = w;
  w2.field.items[0].state = DebrisState::Retrieved;
  w2.robots[0].phase = RobotPhase::Idle;
  w2.robots[0].assigned_debris.reset();
  CHECK_THROWS_AS(step(w2, {{0, 0}}), ValidationError);  // not pending
}

TEST_CASE("running dry freezes the robot and reverts its claim") {
  auto spec = basic_robot(0, Vec2::Zero());
  spec.fuel_budget = 1.5;
  World world = world_init({spec}, single_item_field(Vec2(3.0, 0.0)),
                           Vec2::Zero(), 1.0);
  std::vector<Event> events;
  step(world, {{0, 0}}, &events);  // burn 1: speed up
  CHECK(world.robots[0].fuel_used == doctest::Approx(1.0));
  step(world, {}, &events);  // cruise, no burn
  step(world, {}, &events);  // cruise onto the item
  step(world, {}, &events);  // stopping to grasp is a burn it cannot fund
  CHECK(world.robots[0].frozen);
  CHECK(world.robots[0].phase == RobotPhase::Idle);
  CHECK(world.robots[0].velocity == Vec2(0.0, 0.0));
  CHECK(world.robots[0].fuel_used == doctest::Approx(1.0));
  CHECK(world.field.items[0].state == DebrisState::Pending);
  CHECK(count_events(events, EventKind::FuelExhausted) == 1);
  CHECK(count_events(events, EventKind::ClaimReverted) == 1);

  // Frozen robots ignore later assignments and never move again.
  Vec2 pos = world.robots[0].position;
  step(world, {{0, 0}}, &events);
  CHECK(world.robots[0].position == pos);
  CHECK(world.field.items[0].state == DebrisState::Pending);
}

TEST_CASE("fuel equals the summed velocity changes") {
  World world = world_init({basic_robot(0, Vec2::Zero())},
                           single_item_field(Vec2(4.0, 2.0)), Vec2(1.0, -1.0),
                           0.25);
  double dv_sum = 0.0;
  Vec2 prev = world.robots[0].velocity;
  step(world, {{0, 0}});
  for (int k = 0; k < 200; ++k) {
    dv_sum += (world.robots[0].velocity - prev).norm();
    prev = world.robots[0].velocity;
    step(world, {});
  }
  dv_sum += (world.robots[0].velocity - prev).norm();
  CHECK(world.robots[0].fuel_used == doctest::Approx(dv_sum).epsilon(1e-12));
  CHECK(world.field.items[0].state == DebrisState::Retrieved);
}

TEST_CASE("random traffic preserves claims, speed limits, and item counts") {
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    DebrisField field;
    field.region.min = Vec2(-10.0, -10.0);
    field.region.max = Vec2(10.0, 10.0);
    for (int i = 0; i < 6; ++i) {
      DebrisItem item;
      item.id = i;
      item.position = Vec2(rng.uniform(-8.0, 8.0), rng.uniform(-8.0, 8.0));
      item.drift_velocity = Vec2(rng.uniform(-0.05, 0.05),
                                 rng.uniform(-0.05, 0.05));
      field.items.push_back(item);
    }
    auto r0 = basic_robot(0, Vec2(-5.0, 0.0));
    auto r1 = basic_robot(1, Vec2(5.0, 0.0));
    r0.max_accel = 0.5;
    r1.max_accel = 0.7;
    r1.max_speed = 1.3;
    World world = world_init({r0, r1}, field, Vec2::Zero(), 0.2);

    int prev_retrieved = 0;
    for (int k = 0; k < 150; ++k) {
      Assignments a;
      std::set<int> used;
      for (size_t i = 0; i < world.robots.size(); ++i) {
        if (world.robots[i].phase != RobotPhase::Idle || world.robots[i].frozen)
          continue;
        if (rng.uniform() < 0.5) continue;
        for (const DebrisItem& item : world.field.items) {
          if (item.state == DebrisState::Pending && !used.count(item.id)) {
            a[world.specs[i].id] = item.id;
            used.insert(item.id);
            break;
          }
        }
      }
      step(world, a);

      std::set<int> claimed;
      for (size_t i = 0; i < world.robots.size(); ++i) {
        const RobotState& r = world.robots[i];
        CHECK(r.velocity.norm() <= world.specs[i].max_speed + 1e-9);
        CHECK(r.fuel_used <= world.specs[i].fuel_budget + 1e-9);
        if (r.phase != RobotPhase::Idle) {
          REQUIRE(r.assigned_debris.has_value());
          CHECK(claimed.insert(*r.assigned_debris).second);
        }
      }
      int retrieved = 0;
      for (const DebrisItem& item : world.field.items)
        if (item.state == DebrisState::Retrieved) ++retrieved;
      CHECK(retrieved >= prev_retrieved);
      prev_retrieved = retrieved;
      CHECK(world.field.items.size() == 6);
    }
  }
}

TEST_CASE("stepping is deterministic") {
  auto run = [] {
    World world = world_init({basic_robot(0, Vec2::Zero())},
                             single_item_field(Vec2(3.0, 1.0)), Vec2::Zero(),
                             0.1);
    step(world, {{0, 0}});
    for (int k = 0; k < 100; ++k) step(world, {});
    return world;
  };
  World a = run();
  World b = run();
  CHECK(a.robots[0].position == b.robots[0].position);
  CHECK(a.robots[0].velocity == b.robots[0].velocity);
  CHECK(a.robots[0].fuel_used == b.robots[0].fuel_used);
  CHECK(a.field.items[0].position == b.field.items[0].position);
}

TEST_CASE("run_episode ends early when everything is retrieved") {
  World world = world_init({basic_robot(0, Vec2::Zero())},
                           single_item_field(Vec2(3.0, 0.0)), Vec2::Zero(), 1.0);
  ClaimOnce policy;
  std::vector<Event> events;
  EpisodeMetrics m = run_episode(world, policy, 50.0, &events);
  CHECK(m.retrieved_count == 1);
  CHECK(m.total_debris == 1);
  CHECK(m.transfer_rate == 1.0);
  CHECK(m.elapsed == 8.0);
  CHECK(m.total_fuel == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(m.penalty_accum == 0.0);
  CHECK(m.reward_total ==
        doctest::Approx(1.0 - 0.01 * m.total_fuel).epsilon(1e-12));
  CHECK(events.front().kind == EventKind::EpisodeStart);
  CHECK(events.back().kind == EventKind::EpisodeEnd);
  CHECK(events.back().clock == 8.0);
  // One query: after the claim there is never a pending item again.
  CHECK(policy.calls == 1);
}

TEST_CASE("run_episode without debris ends immediately") {
  DebrisField field;
  field.region.min = Vec2(-1.0, -1.0);
  field.region.max = Vec2(1.0, 1.0);
  World world = world_init({basic_robot(0, Vec2::Zero())}, field, Vec2::Zero(),
                           0.1);
  NeverAssign policy;
  EpisodeMetrics m = run_episode(world, policy, 10.0);
  CHECK(m.retrieved_count == 0);
  CHECK(m.total_debris == 0);
  CHECK(m.transfer_rate == 0.0);
  CHECK(m.elapsed == 0.0);
  CHECK(policy.calls == 0);
}

TEST_CASE("run_episode runs to the horizon when the policy does nothing") {
  World world = world_init({basic_robot(0, Vec2::Zero())},
                           single_item_field(Vec2(3.0, 0.0)), Vec2::Zero(), 0.5);
  NeverAssign policy;
  EpisodeMetrics m = run_episode(world, policy, 5.0);
  CHECK(m.retrieved_count == 0);
  CHECK(m.elapsed == doctest::Approx(5.0));
  CHECK(policy.calls == 10);
  CHECK(m.reward_total == doctest::Approx(0.0));
}

TEST_CASE("run_episode validates the horizon") {
  World world = world_init({basic_robot(0, Vec2::Zero())},
                           single_item_field(Vec2(3.0, 0.0)), Vec2::Zero(), 0.1);
  NeverAssign policy;
  CHECK_THROWS_AS(run_episode(world, policy, 0.0), InvalidHorizon);
  CHECK_THROWS_AS(run_episode(world, policy, -5.0), InvalidHorizon);
  CHECK_THROWS_AS(
      run_episode(world, policy, std::numeric_limits<double>::infinity()),
      InvalidHorizon);
}

TEST_CASE("completion time for a static item is the two-leg cruise plus ramps") {
  RobotSpec spec = basic_robot(0, Vec2::Zero());
  spec.max_speed = 2.0;
  spec.max_accel = 0.5;
  spec.grasp_time = 3.0;
  RobotState state;
  DebrisItem item;
  item.position = Vec2(8.0, 0.0);
  double t = estimated_completion_time(spec, state, item, Vec2::Zero(), 1e6);
  // Out 8 m at 2 m/s with a 4 s ramp, grasp 3 s, back the same way.
  CHECK(t == doctest::Approx(4.0 + 4.0 + 3.0 + 4.0 + 4.0).epsilon(1e-12));
}

TEST_CASE("drift intercept solves the pursuit equation at the earliest root") {
  RobotSpec spec = basic_robot(0, Vec2::Zero());
  spec.max_speed = 1.5;
  Rng rng(64);
  for (int trial = 0; trial < 50; ++trial) {
    RobotState state;
    state.position = Vec2(rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0));
    DebrisItem item;
    item.position = Vec2(rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0));
    item.drift_velocity =
        Vec2(rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8));
    if ((item.position - state.position).norm() < 0.1) continue;
    double t = estimated_completion_time(spec, state, item, Vec2::Zero(), 1e6);
    REQUIRE(std::isfinite(t));
    // Recover the intercept time from the total by stripping the fixed legs.
    Vec2 delta = item.position - state.position;
    double s = spec.max_speed;
    double a = item.drift_velocity.squaredNorm() - s * s;
    double b = 2.0 * delta.dot(item.drift_velocity);
    double c = delta.squaredNorm();
    double disc = b * b - 4.0 * a * c;
    REQUIRE(disc >= 0.0);
    double t_int = (-b - std::sqrt(disc)) / (2.0 * a);
    if (t_int <= 0.0) t_int = (-b + std::sqrt(disc)) / (2.0 * a);
    // The intercept point is where straight pursuit at top speed meets the
    // drifting item.
    CHECK(std::abs((delta + item.drift_velocity * t_int).norm() - s * t_int) <=
          1e-9 * std::max(1.0, s * t_int));
    // No earlier meeting exists.
    for (int k = 1; k < 40; ++k) {
      double tk = t_int * k / 40.0;
      CHECK((delta + item.drift_velocity * tk).norm() >= s * tk - 1e-9);
    }
  }
}

TEST_CASE("a receding item at matched speed is unreachable") {
  RobotSpec spec = basic_robot(0, Vec2::Zero());
  spec.max_speed = 1.0;
  RobotState state;
  DebrisItem item;
  item.position = Vec2(5.0, 0.0);
  item.drift_velocity = Vec2(1.0, 0.0);
  CHECK(estimated_completion_time(spec, state, item, Vec2::Zero(), 1e6) ==
        std::numeric_limits<double>::infinity());
  CHECK(!reachable(spec, state, item, Vec2::Zero(), 1e6));
  // Faster debris running away is just as hopeless.
  item.drift_velocity = Vec2(2.0, 0.0);
  CHECK(!reachable(spec, state, item, Vec2::Zero(), 1e6));
}

TEST_CASE("workspace, horizon, fuel, and freezing all gate reachability") {
  RobotSpec spec = basic_robot(0, Vec2::Zero());
  spec.max_speed = 1.0;
  spec.max_accel = 0.5;
  RobotState state;
  DebrisItem item;
  item.position = Vec2(8.0, 0.0);
  CHECK(reachable(spec, state, item, Vec2::Zero(), 1e6));

  RobotSpec tight = spec;
  tight.workspace_radius = 7.0;
  CHECK(!reachable(tight, state, item, Vec2::Zero(), 1e6));

  // Total is 8 + 2 + 1 + 8 + 2 = 21 seconds.
  CHECK(reachable(spec, state, item, Vec2::Zero(), 21.5));
  CHECK(!reachable(spec, state, item, Vec2::Zero(), 20.5));

  RobotSpec thirsty = spec;
  thirsty.fuel_budget = 3.9;  // estimate needs 4 * max_speed
  CHECK(!reachable(thirsty, state, item, Vec2::Zero(), 1e6));

  RobotState frozen = state;
  frozen.frozen = true;
  CHECK(!reachable(spec, frozen, item, Vec2::Zero(), 1e6));
}

TEST_CASE("accel_penalty is zero inside the limit and quadratic beyond") {
  CHECK(accel_penalty(0.3, 0.5, 1.0) == 0.0);
  CHECK(accel_penalty(0.5, 0.5, 1.0) == 0.0);
  CHECK(accel_penalty(3.0, 1.0, 2.0) == doctest::Approx(8.0));
}

TEST_CASE("events serialize with empty ids for meta rows") {
  std::vector<Event> events = {
      {0.0, -1, EventKind::EpisodeStart, -1},
      {1.5, 0, EventKind::Claimed, 3},
      {9.0, -1, EventKind::EpisodeEnd, -1},
  };
  CHECK(events_to_csv(events) ==
        "clock,robot_id,event,debris_id\n"
        "0,,episode_start,\n"
        "1.5,0,claimed,3\n"
        "9,,episode_end,\n");
}

TEST_CASE("run_episode stamps the horizon for policies to read") {
  struct HorizonProbe : Policy {
    Assignments decide(const World& world) override {
      seen = world.horizon;
      return {};
    }
    std::string name() const override { return "probe"; }
    double seen = -1.0;
  };
  World world = world_init({basic_robot(0, Vec2::Zero())},
                           single_item_field(Vec2(3.0, 0.0)), Vec2::Zero(), 1.0);
  CHECK(world.horizon == std::numeric_limits<double>::infinity());
  HorizonProbe policy;
  run_episode(world, policy, 7.5);
  CHECK(policy.seen == 7.5);
}
