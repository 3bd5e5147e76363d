#include "orbsim/config.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>

#include "json.hpp"
#include "orbsim/csv.hpp"
#include "orbsim/errors.hpp"

namespace orbsim {

using nlohmann::json;

namespace {

Mat3 rpy_to_rot(const Vec3& rpy) {
  // roll about x, pitch about y, yaw about z, composed Rz * Ry * Rx.
  return (Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()) *
          Eigen::AngleAxisd(rpy.y(), Vec3::UnitY()) *
          Eigen::AngleAxisd(rpy.x(), Vec3::UnitX()))
      .toRotationMatrix();
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) known |= it.key() == key;
    if (!known)
      throw ParseError("unknown field '" + (path.empty() ? "" : path + ".") +
                       it.key() + "'");
  }
}

double as_double(const json& j, const std::string& path) {
  if (!j.is_number()) throw ParseError("field '" + path + "' must be a number");
  return j.get<double>();
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer())
    throw ParseError("field '" + path + "' must be an integer");
  return j.get<int>();
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean())
    throw ParseError("field '" + path + "' must be a boolean");
  return j.get<bool>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ParseError("field '" + path + "' must be a string");
  return j.get<std::string>();
}

Vec2 as_vec2(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2)
    throw ParseError("field '" + path + "' must be an array of 2 numbers");
  return {as_double(j[0], path), as_double(j[1], path)};
}

Vec3 as_vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3)
    throw ParseError("field '" + path + "' must be an array of 3 numbers");
  return {as_double(j[0], path), as_double(j[1], path), as_double(j[2], path)};
}

Mat3 as_mat3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3)
    throw ParseError("field '" + path + "' must be a 3x3 array");
  Mat3 m;
  for (int r = 0; r < 3; ++r) {
    const json& row = j[static_cast<size_t>(r)];
    if (!row.is_array() || row.size() != 3)
      throw ParseError("field '" + path + "' must be a 3x3 array");
    for (int c = 0; c < 3; ++c)
      m(r, c) = as_double(row[static_cast<size_t>(c)], path);
  }
  return m;
}

FieldKind parse_kind(const std::string& name, const std::string& path) {
  if (name == "poisson_disk") return FieldKind::PoissonDisk;
  if (name == "grid") return FieldKind::Grid;
  if (name == "dense_cluster") return FieldKind::DenseCluster;
  if (name == "dispersed") return FieldKind::Dispersed;
  throw ValidationError(path, "unknown field kind '" + name + "'");
}

LinkParams parse_link(const json& j, const std::string& path) {
  check_keys(j, path,
             {"mass", "com", "inertia", "friction", "axis",
              "offset_translation", "offset_rotation_rpy"});
  LinkParams link;
  if (j.contains("mass")) link.mass = as_double(j["mass"], path + ".mass");
  if (j.contains("com")) link.com = as_vec3(j["com"], path + ".com");
  if (j.contains("inertia"))
    link.rot_inertia = as_mat3(j["inertia"], path + ".inertia");
  if (j.contains("friction"))
    link.friction_coeff = as_double(j["friction"], path + ".friction");
  if (j.contains("axis")) link.joint_axis = as_vec3(j["axis"], path + ".axis");
  if (j.contains("offset_translation"))
    link.joint_offset.trans =
        as_vec3(j["offset_translation"], path + ".offset_translation");
  if (j.contains("offset_rotation_rpy"))
    link.joint_offset.rot =
        rpy_to_rot(as_vec3(j["offset_rotation_rpy"], path + ".offset_rotation_rpy"));
  return link;
}

ChainModel parse_chain(const json& j, const std::string& path) {
  check_keys(j, path, {"gravity", "links"});
  ChainModel model;
  if (j.contains("gravity"))
    model.gravity = as_vec3(j["gravity"], path + ".gravity");
  if (j.contains("links")) {
    const json& links = j["links"];
    if (!links.is_array())
      throw ParseError("field '" + path + ".links' must be an array");
    for (size_t i = 0; i < links.size(); ++i)
      model.links.push_back(
          parse_link(links[i], path + ".links[" + std::to_string(i) + "]"));
  }
  return model;
}

void validate_config(const Config& c) {
  if (!(c.dt > 0.0) || !std::isfinite(c.dt))
    throw ValidationError("dt", "must be positive and finite");
  if (!(c.horizon > 0.0) || !std::isfinite(c.horizon))
    throw ValidationError("horizon", "must be positive and finite");
  if (!(c.region.min.x() < c.region.max.x() &&
        c.region.min.y() < c.region.max.y()))
    throw ValidationError("region", "min must be below max componentwise");
  if (!c.disposal.allFinite())
    throw ValidationError("disposal", "must be finite");
  if (c.robots.empty()) throw ValidationError("robots", "need at least one");
  for (const RobotSpec& r : c.robots) {
    const std::string who = "robots[" + std::to_string(r.id) + "]";
    if (!(r.max_speed > 0.0)) throw ValidationError(who, "max_speed <= 0");
    if (!(r.max_accel > 0.0)) throw ValidationError(who, "max_accel <= 0");
    if (!(r.workspace_radius > 0.0))
      throw ValidationError(who, "workspace_radius <= 0");
    if (r.grasp_time < 0.0) throw ValidationError(who, "grasp_time < 0");
    if (!(r.fuel_budget > 0.0)) throw ValidationError(who, "fuel_budget <= 0");
  }
  for (size_t i = 0; i < c.robots.size(); ++i)
    for (size_t k = i + 1; k < c.robots.size(); ++k)
      if (c.robots[i].id == c.robots[k].id)
        throw ValidationError("robots", "duplicate id " +
                                            std::to_string(c.robots[i].id));

  const FieldSpec& f = c.field_spec;
  if (f.count < 1) throw ValidationError("field.count", "must be >= 1");
  if (f.nx < 1 || f.ny < 1)
    throw ValidationError("field.nx", "grid dims must be >= 1");
  if (!(f.jitter >= 0.0) || f.jitter >= 0.5)
    throw ValidationError("field.jitter", "must lie in [0, 0.5)");
  if (!(f.r_min > 0.0)) throw ValidationError("field.r_min", "must be > 0");
  if (!(f.cluster_std > 0.0))
    throw ValidationError("field.cluster_std", "must be > 0");
  if (!(f.item_size > 0.0))
    throw ValidationError("field.item_size", "must be > 0");
  if (f.drift_speed_max < 0.0)
    throw ValidationError("field.drift_speed_max", "must be >= 0");
  if (f.tumble_rate_max < 0.0)
    throw ValidationError("field.tumble_rate_max", "must be >= 0");

  const AllocationConfig& a = c.allocation;
  if (a.episodes < 1) throw ValidationError("allocation.episodes", "must be >= 1");
  if (!(a.lr > 0.0 && a.lr <= 1.0))
    throw ValidationError("allocation.lr", "must lie in (0, 1]");
  if (!(a.discount >= 0.0 && a.discount < 1.0))
    throw ValidationError("allocation.discount", "must lie in [0, 1)");
  if (!(a.eps_start >= 0.0 && a.eps_start <= 1.0) ||
      !(a.eps_end >= 0.0 && a.eps_end <= 1.0))
    throw ValidationError("allocation.eps_start", "must lie in [0, 1]");
  if (a.n_mc < 1) throw ValidationError("allocation.n_mc", "must be >= 1");
  if (a.grid_n < 1) throw ValidationError("allocation.grid_n", "must be >= 1");

  if (c.seeds.empty()) throw ValidationError("seeds", "need at least one");
  if (c.out_dir.empty()) throw ValidationError("out_dir", "must not be empty");

  auto require_chain = [&](const std::string& name, size_t links) {
    auto it = c.chains.find(name);
    if (it == c.chains.end())
      throw ValidationError("chains", "missing chain '" + name + "'");
    if (it->second.dof() != links)
      throw ValidationError("chains." + name,
                            "must have " + std::to_string(links) + " links");
  };
  require_chain("planar2", 2);
  require_chain("serial3", 3);
  for (const auto& [name, model] : c.chains) {
    try {
      validate_chain(model);
    } catch (const Error& e) {
      throw ValidationError("chains." + name, e.what());
    }
  }
}

}  // namespace

ChainModel make_planar2_chain() {
  ChainModel model;
  LinkParams l1;
  l1.mass = 1.2;
  l1.com = Vec3(0.25, 0.0, 0.0);
  l1.rot_inertia = shift_inertia_to_origin(
      l1.mass, l1.com, Vec3(0.001, 0.018, 0.02).asDiagonal());
  l1.joint_axis = Vec3::UnitZ();

  LinkParams l2;
  l2.mass = 0.8;
  l2.com = Vec3(0.2, 0.0, 0.0);
  l2.rot_inertia = shift_inertia_to_origin(
      l2.mass, l2.com, Vec3(0.0008, 0.009, 0.01).asDiagonal());
  l2.joint_axis = Vec3::UnitZ();
  l2.joint_offset.trans = Vec3(0.5, 0.0, 0.0);

  model.links = {l1, l2};
  return model;
}

ChainModel make_serial3_chain() {
  ChainModel model;
  LinkParams l1;
  l1.mass = 1.5;
  l1.com = Vec3(0.2, 0.0, 0.05);
  l1.rot_inertia = shift_inertia_to_origin(
      l1.mass, l1.com, Vec3(0.02, 0.03, 0.025).asDiagonal());
  l1.friction_coeff = 0.1;
  l1.joint_axis = Vec3::UnitZ();

  LinkParams l2;
  l2.mass = 1.0;
  l2.com = Vec3(0.15, 0.05, 0.0);
  l2.rot_inertia = shift_inertia_to_origin(
      l2.mass, l2.com, Vec3(0.012, 0.015, 0.014).asDiagonal());
  l2.friction_coeff = 0.05;
  l2.joint_axis = Vec3::UnitY();
  l2.joint_offset.trans = Vec3(0.4, 0.0, 0.1);
  l2.joint_offset.rot = rpy_to_rot(Vec3(0.2, -0.1, 0.3));

  LinkParams l3;
  l3.mass = 0.7;
  l3.com = Vec3(0.1, 0.0, 0.02);
  l3.rot_inertia = shift_inertia_to_origin(
      l3.mass, l3.com, Vec3(0.006, 0.007, 0.0065).asDiagonal());
  l3.friction_coeff = 0.02;
  l3.joint_axis = Vec3::UnitX();
  l3.joint_offset.trans = Vec3(0.35, 0.05, 0.0);
  l3.joint_offset.rot = rpy_to_rot(Vec3(-0.3, 0.15, 0.1));

  model.links = {l1, l2, l3};
  return model;
}

Config default_config() {
  Config c;
  c.region.min = Vec2(0.0, 0.0);
  c.region.max = Vec2(15.0, 15.0);
  c.disposal = c.region.center();

  RobotSpec r0;
  r0.id = 0;
  r0.start_position = Vec2(3.0, 7.5);
  r0.max_speed = 1.0;
  r0.max_accel = 0.5;
  r0.workspace_radius = 20.0;
  r0.grasp_time = 1.0;
  r0.fuel_budget = 1000.0;
  RobotSpec r1 = r0;
  r1.id = 1;
  r1.start_position = Vec2(12.0, 7.5);
  c.robots = {r0, r1};

  c.field_spec = default_spec(FieldKind::PoissonDisk);
  for (uint64_t s = 1; s <= 10; ++s) c.seeds.push_back(s);
  c.chains["planar2"] = make_planar2_chain();
  c.chains["serial3"] = make_serial3_chain();
  return c;
}

Config parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());
  }
  if (!j.is_object()) throw ParseError("config root must be an object");

  Config c = default_config();
  check_keys(j, "",
             {"dt", "horizon", "region", "disposal", "robots", "field",
              "allocation", "seeds", "out_dir", "chains"});

  if (j.contains("dt")) c.dt = as_double(j["dt"], "dt");
  if (j.contains("horizon")) c.horizon = as_double(j["horizon"], "horizon");
  if (j.contains("region")) {
    const json& region = j["region"];
    check_keys(region, "region", {"min", "max"});
    if (region.contains("min"))
      c.region.min = as_vec2(region["min"], "region.min");
    if (region.contains("max"))
      c.region.max = as_vec2(region["max"], "region.max");
    c.disposal = c.region.center();
  }
  if (j.contains("disposal")) c.disposal = as_vec2(j["disposal"], "disposal");

  if (j.contains("robots")) {
    const json& robots = j["robots"];
    if (!robots.is_array()) throw ParseError("field 'robots' must be an array");
    c.robots.clear();
    for (size_t i = 0; i < robots.size(); ++i) {
      const std::string path = "robots[" + std::to_string(i) + "]";
      const json& rj = robots[i];
      check_keys(rj, path,
                 {"id", "start", "max_speed", "max_accel", "workspace_radius",
                  "grasp_time", "fuel_budget"});
      RobotSpec r;
      r.id = static_cast<int>(i);
      r.workspace_radius = 20.0;
      r.max_accel = 0.5;
      r.fuel_budget = 1000.0;
      if (rj.contains("id")) r.id = as_int(rj["id"], path + ".id");
      if (rj.contains("start"))
        r.start_position = as_vec2(rj["start"], path + ".start");
      if (rj.contains("max_speed"))
        r.max_speed = as_double(rj["max_speed"], path + ".max_speed");
      if (rj.contains("max_accel"))
        r.max_accel = as_double(rj["max_accel"], path + ".max_accel");
      if (rj.contains("workspace_radius"))
        r.workspace_radius =
            as_double(rj["workspace_radius"], path + ".workspace_radius");
      if (rj.contains("grasp_time"))
        r.grasp_time = as_double(rj["grasp_time"], path + ".grasp_time");
      if (rj.contains("fuel_budget"))
        r.fuel_budget = as_double(rj["fuel_budget"], path + ".fuel_budget");
      c.robots.push_back(r);
    }
  }

  if (j.contains("field")) {
    const json& fj = j["field"];
    check_keys(fj, "field",
               {"kind", "count", "nx", "ny", "jitter", "r_min", "cluster_std",
                "item_size", "tumbling", "drift_speed_max", "tumble_rate_max"});
    if (fj.contains("kind"))
      c.field_spec =
          default_spec(parse_kind(as_string(fj["kind"], "field.kind"),
                                  "field.kind"));
    if (fj.contains("count"))
      c.field_spec.count = as_int(fj["count"], "field.count");
    if (fj.contains("nx")) c.field_spec.nx = as_int(fj["nx"], "field.nx");
    if (fj.contains("ny")) c.field_spec.ny = as_int(fj["ny"], "field.ny");
    if (fj.contains("jitter"))
      c.field_spec.jitter = as_double(fj["jitter"], "field.jitter");
    if (fj.contains("r_min"))
      c.field_spec.r_min = as_double(fj["r_min"], "field.r_min");
    if (fj.contains("cluster_std"))
      c.field_spec.cluster_std =
          as_double(fj["cluster_std"], "field.cluster_std");
    if (fj.contains("item_size"))
      c.field_spec.item_size = as_double(fj["item_size"], "field.item_size");
    if (fj.contains("tumbling"))
      c.field_spec.tumbling = as_bool(fj["tumbling"], "field.tumbling");
    if (fj.contains("drift_speed_max"))
      c.field_spec.drift_speed_max =
          as_double(fj["drift_speed_max"], "field.drift_speed_max");
    if (fj.contains("tumble_rate_max"))
      c.field_spec.tumble_rate_max =
          as_double(fj["tumble_rate_max"], "field.tumble_rate_max");
  }

  if (j.contains("allocation")) {
    const json& aj = j["allocation"];
    check_keys(aj, "allocation",
               {"episodes", "lr", "discount", "eps_start", "eps_end", "n_mc",
                "grid_n"});
    if (aj.contains("episodes"))
      c.allocation.episodes = as_int(aj["episodes"], "allocation.episodes");
    if (aj.contains("lr"))
      c.allocation.lr = as_double(aj["lr"], "allocation.lr");
    if (aj.contains("discount"))
      c.allocation.discount = as_double(aj["discount"], "allocation.discount");
    if (aj.contains("eps_start"))
      c.allocation.eps_start =
          as_double(aj["eps_start"], "allocation.eps_start");
    if (aj.contains("eps_end"))
      c.allocation.eps_end = as_double(aj["eps_end"], "allocation.eps_end");
    if (aj.contains("n_mc"))
      c.allocation.n_mc = as_int(aj["n_mc"], "allocation.n_mc");
    if (aj.contains("grid_n"))
      c.allocation.grid_n = as_int(aj["grid_n"], "allocation.grid_n");
  }

  if (j.contains("seeds")) {
    const json& seeds = j["seeds"];
    if (!seeds.is_array()) throw ParseError("field 'seeds' must be an array");
    c.seeds.clear();
    for (size_t i = 0; i < seeds.size(); ++i) {
      const json& s = seeds[i];
      if (!s.is_number_integer() || s.get<int64_t>() < 0)
        throw ParseError("field 'seeds' must hold non-negative integers");
      c.seeds.push_back(s.get<uint64_t>());
    }
  }

  if (j.contains("out_dir")) c.out_dir = as_string(j["out_dir"], "out_dir");

  if (j.contains("chains")) {
    const json& chains = j["chains"];
    if (!chains.is_object())
      throw ParseError("field 'chains' must be an object");
    for (auto it = chains.begin(); it != chains.end(); ++it)
      c.chains[it.key()] = parse_chain(it.value(), "chains." + it.key());
  }

  validate_config(c);
  return c;
}

Config parse_config(const std::string& path) {
  return parse_config_text(read_file(path));
}

EnvSpec env_spec_of(const Config& config) {
  EnvSpec env;
  env.robots = config.robots;
  env.field_spec = config.field_spec;
  env.region = config.region;
  env.disposal = config.disposal;
  env.dt = config.dt;
  env.horizon = config.horizon;
  return env;
}

}  // namespace orbsim
