#pragma once

#include <map>
#include <string>
#include <vector>

#include "orbsim/allocation.hpp"
#include "orbsim/chain.hpp"

namespace orbsim {

struct AllocationConfig {
  int episodes = 300;
  double lr = 0.2;
  double discount = 0.95;
  double eps_start = 1.0;
  double eps_end = 0.05;
  int n_mc = 10;
  int grid_n = 4;
};

/// Full experiment description.  Every field has a default, so "{}" is a
/// valid config file; unknown keys are rejected.
struct Config {
  double dt = 0.1;
  double horizon = 300.0;
  Region region;  // [0,0] x [15,15]
  Vec2 disposal = Vec2(7.5, 7.5);
  std::vector<RobotSpec> robots;
  FieldSpec field_spec;
  AllocationConfig allocation;
  std::vector<uint64_t> seeds;  // 1..10
  std::string out_dir = "out";
  /// Named dynamics-test chains; "planar2" and "serial3" are always present
  /// (user entries override by name).
  std::map<std::string, ChainModel> chains;
};

/// The documented defaults: two robots flanking a 15 x 15 m region, Poisson
/// debris, 10 evaluation seeds, the stock test chains.
Config default_config();

/// Planar two-link chain (z-axis joints, in-line COMs, frictionless); its
/// torques have a closed form the dynamics checks compare against.
ChainModel make_planar2_chain();

/// Three-link chain with out-of-plane axes, offset rotations, and Coulomb
/// friction at every joint; exercises the general recursion paths.
ChainModel make_serial3_chain();

Config parse_config_text(const std::string& text);
Config parse_config(const std::string& path);

EnvSpec env_spec_of(const Config& config);

}  // namespace orbsim
