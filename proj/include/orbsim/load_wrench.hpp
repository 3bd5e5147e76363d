#pragma once

#include <Eigen/Dense>
#include <utility>

#include "orbsim/rnea.hpp"
#include "orbsim/spatial.hpp"

namespace orbsim {

/// Rigid load being manipulated by two arms.  All vectors are expressed in a
/// common frame centered at the load's COM.
struct LoadState {
  double mass = 1.0;                    // kg
  Mat3 rot_inertia = Mat3::Identity();  // kg m^2, about the COM
  Vec3 lin_acc = Vec3::Zero();          // m/s^2, COM acceleration
  Vec3 ang_vel = Vec3::Zero();          // rad/s
  Vec3 ang_acc = Vec3::Zero();          // rad/s^2
  Vec3 coriolis = Vec3::Zero();         // N, coriolis/centripetal force term
  Vec3 external_force = Vec3::Zero();   // N, generalized inertial force input
  Vec3 external_torque = Vec3::Zero();  // N m, load's own torque input
  Vec3 external_offset = Vec3::Zero();  // m, lever arm of external_force
};

/// Grasp points of the two arms relative to the load COM.
struct GraspConfig {
  Vec3 r1 = Vec3::UnitY();
  Vec3 r2 = -Vec3::UnitY();
};

/// Net load wrench the two arm wrenches must realize.  Force balance:
///   -f1 - f2 + coriolis + external_force = mass * lin_acc
/// Moment balance (Euler equation on the right-hand side):
///   -(t1 + r1 x f1) - (t2 + r2 x f2) + external_torque
///     + external_offset x external_force
///   = rot_inertia * ang_acc + ang_vel x (rot_inertia * ang_vel)
///
/// Twelve unknowns, six equations; returns the minimum-Euclidean-norm pair.
/// Throws DegenerateGrasp when the grasp points coincide or the grasp map
/// drops rank beyond the 1e-10 pseudo-inverse tolerance.
std::pair<Wrench, Wrench> dual_arm_decompose(const LoadState& load,
                                             const GraspConfig& grasp);

/// Stacked (force residual, moment residual) of the two balance equations;
/// zero iff (w1, w2) satisfy them.
Vec6 load_balance_residual(const LoadState& load, const GraspConfig& grasp,
                           const Wrench& w1, const Wrench& w2);

}  // namespace orbsim
