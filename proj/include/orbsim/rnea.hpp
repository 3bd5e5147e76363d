#pragma once

#include <vector>

#include "orbsim/chain.hpp"

namespace orbsim {

/// Combined force + torque at a point, world- or frame-local depending on use.
struct Wrench {
  Vec3 force = Vec3::Zero();   // N
  Vec3 torque = Vec3::Zero();  // N m

  /// [torque; force] ordering, pairing with [omega; v] motion vectors.
  SpatialVector as_spatial() const { return {torque, force}; }
  static Wrench from_spatial(const SpatialVector& s) {
    return {s.linear, s.angular};
  }
};

/// Kinematic sweep shared by the dynamics routines: per-link pose in the
/// parent frame plus spatial velocity/acceleration in the link's own frame.
struct ChainKinematics {
  std::vector<Transform> pose_in_parent;
  std::vector<SpatialVector> velocity;
  std::vector<SpatialVector> acceleration;  // includes the -gravity base seed
};

ChainKinematics chain_kinematics(const ChainModel& model, const VecX& q,
                                 const VecX& qdot, const VecX& qddot);

/// Per-link spatial velocities in link coordinates; the base is at rest.
std::vector<SpatialVector> propagate_velocity(const ChainModel& model,
                                              const VecX& q, const VecX& qdot);

/// Per-link spatial accelerations in link coordinates.  The base acceleration
/// is seeded with -gravity, so gravity torques fall out of the force sweep.
std::vector<SpatialVector> propagate_acceleration(const ChainModel& model,
                                                  const VecX& q,
                                                  const VecX& qdot,
                                                  const VecX& qddot);

/// Inverse dynamics: joint torques realizing the given joint motion while the
/// tip applies tip_wrench to the environment (expressed in the last link's
/// frame).  Coulomb joint friction enters as friction_coeff * sgn(qdot) with
/// sgn(0) = 0.
VecX rnea(const ChainModel& model, const JointState& state,
          const Wrench& tip_wrench = {});

/// Sum of (1/2) V^T I V over links; >= 0.
double kinetic_energy(const ChainModel& model, const VecX& q,
                      const VecX& qdot);

}  // namespace orbsim
