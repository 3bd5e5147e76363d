#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "orbsim/errors.hpp"

// 6-D spatial vector algebra for serial-chain rigid body dynamics.
//
// Convention: spatial vectors are stored [angular; linear].  A motion vector
// holds [omega; v] where v is the velocity of the body-fixed point currently
// at the frame origin; a force vector holds [torque; force] referenced to the
// same origin.  The pairing <f, m> = torque.omega + force.v is the mechanical
// power, which is what makes force_cross_dual the dual of motion_cross.

namespace orbsim {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using SpatialMat = Eigen::Matrix<double, 6, 6>;

struct SpatialVector {
  Vec3 angular = Vec3::Zero();
  Vec3 linear = Vec3::Zero();

  Vec6 as_vec6() const {
    Vec6 out;
    out << angular, linear;
    return out;
  }
  static SpatialVector from_vec6(const Vec6& v) {
    return {v.head<3>(), v.tail<3>()};
  }
  static SpatialVector zero() { return {}; }

  SpatialVector operator+(const SpatialVector& o) const {
    return {angular + o.angular, linear + o.linear};
  }
  SpatialVector operator-(const SpatialVector& o) const {
    return {angular - o.angular, linear - o.linear};
  }
  SpatialVector operator*(double s) const { return {angular * s, linear * s}; }
  double dot(const SpatialVector& o) const {
    return angular.dot(o.angular) + linear.dot(o.linear);
  }
  bool all_finite() const {
    return angular.allFinite() && linear.allFinite();
  }
};

/// Cross-product matrix: skew(v) * w == v.cross(w); antisymmetric.
inline Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return s;
}

inline SpatialMat spatial_mat_from_blocks(const Mat3& tl, const Mat3& tr,
                                          const Mat3& bl, const Mat3& br) {
  SpatialMat m;
  m.block<3, 3>(0, 0) = tl;
  m.block<3, 3>(0, 3) = tr;
  m.block<3, 3>(3, 0) = bl;
  m.block<3, 3>(3, 3) = br;
  return m;
}

/// Motion cross operator (Lie bracket on twists):
/// blocks [skew(w), 0; skew(v), skew(w)] for v = [w; v_lin].
inline SpatialMat motion_cross(const SpatialVector& v) {
  const Mat3 wx = skew(v.angular);
  return spatial_mat_from_blocks(wx, Mat3::Zero(), skew(v.linear), wx);
}

/// Dual (co-adjoint) cross operator acting on force vectors; equals
/// -motion_cross(v)^T, i.e. blocks [skew(w), skew(v_lin); 0, skew(w)].
inline SpatialMat force_cross_dual(const SpatialVector& v) {
  const Mat3 wx = skew(v.angular);
  return spatial_mat_from_blocks(wx, skew(v.linear), Mat3::Zero(), wx);
}

/// Applies force_cross_dual(v) to a force vector without forming the 6x6.
inline SpatialVector force_cross_apply(const SpatialVector& v,
                                       const SpatialVector& f) {
  return {v.angular.cross(f.angular) + v.linear.cross(f.linear),
          v.angular.cross(f.linear)};
}

/// Spatial inertia of a rigid body about the frame origin:
/// blocks [J, m*skew(p); -m*skew(p), m*E3], with p the COM offset and J the
/// rotational inertia about the origin.
inline SpatialMat assemble_spatial_inertia(double mass, const Vec3& com,
                                           const Mat3& rot_inertia) {
  if (!(mass > 0.0)) {
    throw NonPositiveMass("spatial inertia requires mass > 0, got " +
                          std::to_string(mass));
  }
  if ((rot_inertia - rot_inertia.transpose()).norm() > 1e-9) {
    throw AsymmetricInertia("rotational inertia matrix is not symmetric");
  }
  const Mat3 mpx = mass * skew(com);
  return spatial_mat_from_blocks(rot_inertia, mpx, -mpx,
                                 mass * Mat3::Identity());
}

inline SpatialVector apply_inertia(const SpatialMat& inertia,
                                   const SpatialVector& v) {
  return SpatialVector::from_vec6(inertia * v.as_vec6());
}

/// Mass, COM offset and rotational inertia (about the frame origin) of one
/// rigid body; assembles into the 6x6 spatial inertia on demand.
struct SpatialInertia {
  double mass = 1.0;
  Vec3 com = Vec3::Zero();
  Mat3 rot_inertia = Mat3::Identity();

  SpatialMat matrix() const {
    return assemble_spatial_inertia(mass, com, rot_inertia);
  }
};

/// Rigid transform: pose of a child frame expressed in its parent frame.
/// rot's columns are the child axes in parent coordinates, trans the child
/// origin in parent coordinates.
struct Transform {
  Mat3 rot = Mat3::Identity();
  Vec3 trans = Vec3::Zero();

  /// Re-expresses a motion vector given in parent coordinates (at the parent
  /// origin) in child coordinates at the child origin.
  SpatialVector motion_to_child(const SpatialVector& m) const {
    return {rot.transpose() * m.angular,
            rot.transpose() * (m.linear + m.angular.cross(trans))};
  }

  /// Re-expresses a force vector given in child coordinates (at the child
  /// origin) in parent coordinates at the parent origin.
  SpatialVector force_to_parent(const SpatialVector& f) const {
    const Vec3 force_p = rot * f.linear;
    return {rot * f.angular + trans.cross(force_p), force_p};
  }

  Vec3 point_to_parent(const Vec3& p) const { return rot * p + trans; }

  /// Pose of grandchild in this frame's parent: this ∘ child.
  Transform compose(const Transform& child) const {
    return {rot * child.rot, rot * child.trans + trans};
  }
};

}  // namespace orbsim
