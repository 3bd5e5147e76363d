#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "orbsim/spatial.hpp"

namespace orbsim {

using VecX = Eigen::VectorXd;

/// Inertial and joint parameters of one link of a serial chain.
/// rot_inertia is taken about the link frame origin (the joint), not the COM.
/// joint_offset is the fixed transform from the parent frame to this link's
/// frame at q = 0; the joint then rotates the link about joint_axis, a unit
/// vector expressed in the link frame.
struct LinkParams {
  double mass = 1.0;                    // kg
  Vec3 com = Vec3::Zero();              // m, link frame
  Mat3 rot_inertia = Mat3::Identity();  // kg m^2, about link frame origin
  double friction_coeff = 0.0;          // N m, Coulomb level
  Vec3 joint_axis = Vec3::UnitZ();      // unit, link frame
  Transform joint_offset;               // parent -> link at q = 0

  SpatialMat spatial_inertia() const {
    return assemble_spatial_inertia(mass, com, rot_inertia);
  }
};

/// Serial chain, base to tip.  Gravity defaults to zero (free-fall).
struct ChainModel {
  std::vector<LinkParams> links;
  Vec3 gravity = Vec3::Zero();  // m/s^2

  std::size_t dof() const { return links.size(); }
};

struct JointState {
  VecX q;
  VecX qdot;
  VecX qddot;
};

/// Parallel-axis shift of a rotational inertia from the COM to the link
/// frame origin, with the COM at `com` in that frame.
inline Mat3 shift_inertia_to_origin(double mass, const Vec3& com,
                                    const Mat3& inertia_about_com) {
  return inertia_about_com +
         mass * (com.squaredNorm() * Mat3::Identity() -
                 com * com.transpose());
}

/// Throws DimensionMismatch / NonFiniteInput / NonPositiveMass /
/// AsymmetricInertia when the model violates its invariants.  Rotational
/// inertias must be symmetric with no eigenvalue below -1e-9 (a point mass
/// sits exactly on the semidefinite boundary).
void validate_chain(const ChainModel& model);

void check_dims(const ChainModel& model, const VecX& v, const std::string& name);

}  // namespace orbsim
