#include "orbsim/rnea.hpp"

#include <Eigen/Geometry>

#include "orbsim/errors.hpp"

namespace orbsim {

namespace {

Transform joint_pose(const LinkParams& link, double q) {
  const Mat3 joint_rot =
      Eigen::AngleAxisd(q, link.joint_axis).toRotationMatrix();
  return {link.joint_offset.rot * joint_rot, link.joint_offset.trans};
}

}  // namespace

ChainKinematics chain_kinematics(const ChainModel& model, const VecX& q,
                                 const VecX& qdot, const VecX& qddot) {
  check_dims(model, q, "q");
  check_dims(model, qdot, "qdot");
  check_dims(model, qddot, "qddot");

  const std::size_t n = model.dof();
  ChainKinematics kin;
  kin.pose_in_parent.resize(n);
  kin.velocity.resize(n);
  kin.acceleration.resize(n);

  SpatialVector v_prev = SpatialVector::zero();
  SpatialVector a_prev{Vec3::Zero(), -model.gravity};
  for (std::size_t i = 0; i < n; ++i) {
    const auto& link = model.links[i];
    const Transform pose = joint_pose(link, q[i]);
    const SpatialVector screw{link.joint_axis, Vec3::Zero()};

    SpatialVector v = pose.motion_to_child(v_prev) + screw * qdot[i];
    // Velocity-product term: crm(V_i) * S_i * qdot_i.
    const SpatialVector joint_vel = screw * qdot[i];
    SpatialVector a = pose.motion_to_child(a_prev) + screw * qddot[i] +
                      SpatialVector{v.angular.cross(joint_vel.angular),
                                    v.angular.cross(joint_vel.linear) +
                                        v.linear.cross(joint_vel.angular)};

    kin.pose_in_parent[i] = pose;
    kin.velocity[i] = v;
    kin.acceleration[i] = a;
    v_prev = v;
    a_prev = a;
  }
  return kin;
}

std::vector<SpatialVector> propagate_velocity(const ChainModel& model,
                                              const VecX& q,
                                              const VecX& qdot) {
  const VecX zeros = VecX::Zero(q.size());
  return chain_kinematics(model, q, qdot, zeros).velocity;
}

std::vector<SpatialVector> propagate_acceleration(const ChainModel& model,
                                                  const VecX& q,
                                                  const VecX& qdot,
                                                  const VecX& qddot) {
  return chain_kinematics(model, q, qdot, qddot).acceleration;
}

VecX rnea(const ChainModel& model, const JointState& state,
          const Wrench& tip_wrench) {
  if (!state.q.allFinite() || !state.qdot.allFinite() ||
      !state.qddot.allFinite() || !tip_wrench.force.allFinite() ||
      !tip_wrench.torque.allFinite()) {
    throw NonFiniteInput("rnea: non-finite joint state or tip wrench");
  }
  const auto kin = chain_kinematics(model, state.q, state.qdot, state.qddot);
  const std::size_t n = model.dof();

  VecX tau(n);
  SpatialVector f_carry = tip_wrench.as_spatial();
  for (std::size_t idx = n; idx-- > 0;) {
    const auto& link = model.links[idx];
    const SpatialMat inertia = link.spatial_inertia();
    const SpatialVector momentum = apply_inertia(inertia, kin.velocity[idx]);
    SpatialVector f = apply_inertia(inertia, kin.acceleration[idx]) +
                      force_cross_apply(kin.velocity[idx], momentum) + f_carry;

    const double qd = state.qdot[idx];
    const double sgn = qd > 0.0 ? 1.0 : (qd < 0.0 ? -1.0 : 0.0);
    tau[idx] = link.joint_axis.dot(f.angular) + link.friction_coeff * sgn;

    if (idx > 0) {
      f_carry = kin.pose_in_parent[idx].force_to_parent(f);
    }
  }
  return tau;
}

double kinetic_energy(const ChainModel& model, const VecX& q,
                      const VecX& qdot) {
  check_dims(model, q, "q");
  check_dims(model, qdot, "qdot");
  const auto vel = propagate_velocity(model, q, qdot);
  double energy = 0.0;
  for (std::size_t i = 0; i < model.dof(); ++i) {
    const SpatialMat inertia = model.links[i].spatial_inertia();
    energy += 0.5 * vel[i].dot(apply_inertia(inertia, vel[i]));
  }
  return energy;
}

}  // namespace orbsim
