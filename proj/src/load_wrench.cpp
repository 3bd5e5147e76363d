#include "orbsim/load_wrench.hpp"

#include <Eigen/SVD>

#include "orbsim/errors.hpp"

namespace orbsim {

namespace {

void validate_load(const LoadState& load, const GraspConfig& grasp) {
  if (!(load.mass > 0.0)) throw NonPositiveMass("load mass must be positive");
  if (!load.rot_inertia.isApprox(load.rot_inertia.transpose(), 1e-9))
    throw AsymmetricInertia("load inertia must be symmetric");
  bool finite = load.rot_inertia.allFinite() && load.lin_acc.allFinite() &&
                load.ang_vel.allFinite() && load.ang_acc.allFinite() &&
                load.coriolis.allFinite() && load.external_force.allFinite() &&
                load.external_torque.allFinite() &&
                load.external_offset.allFinite() && grasp.r1.allFinite() &&
                grasp.r2.allFinite() && std::isfinite(load.mass);
  if (!finite) throw NonFiniteInput("load state contains non-finite values");
}

// Right-hand side of the stacked balance equations, see the header.
Vec6 balance_rhs(const LoadState& load) {
  Vec6 b;
  b.head<3>() = load.mass * load.lin_acc - load.coriolis - load.external_force;
  b.tail<3>() = load.rot_inertia * load.ang_acc +
                load.ang_vel.cross(load.rot_inertia * load.ang_vel) -
                load.external_torque -
                load.external_offset.cross(load.external_force);
  return b;
}

// Grasp map: stacks (-f1 - f2) rows and (-r x f - t) rows against
// x = [f1; t1; f2; t2].
Eigen::Matrix<double, 6, 12> grasp_map(const GraspConfig& grasp) {
  Eigen::Matrix<double, 6, 12> A = Eigen::Matrix<double, 6, 12>::Zero();
  A.block<3, 3>(0, 0) = -Mat3::Identity();
  A.block<3, 3>(0, 6) = -Mat3::Identity();
  A.block<3, 3>(3, 0) = -skew(grasp.r1);
  A.block<3, 3>(3, 3) = -Mat3::Identity();
  A.block<3, 3>(3, 6) = -skew(grasp.r2);
  A.block<3, 3>(3, 9) = -Mat3::Identity();
  return A;
}

}  // namespace

std::pair<Wrench, Wrench> dual_arm_decompose(const LoadState& load,
                                             const GraspConfig& grasp) {
  validate_load(load, grasp);
  if ((grasp.r1 - grasp.r2).norm() < 1e-12)
    throw DegenerateGrasp("grasp points coincide");

  const Eigen::Matrix<double, 6, 12> A = grasp_map(grasp);
  const Vec6 b = balance_rhs(load);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-10);
  if (svd.rank() < 6) throw DegenerateGrasp("grasp map is rank deficient");
  Eigen::VectorXd x = svd.solve(b);

  Wrench w1{x.segment<3>(0), x.segment<3>(3)};
  Wrench w2{x.segment<3>(6), x.segment<3>(9)};
  return {w1, w2};
}

Vec6 load_balance_residual(const LoadState& load, const GraspConfig& grasp,
                           const Wrench& w1, const Wrench& w2) {
  validate_load(load, grasp);
  Eigen::Matrix<double, 12, 1> x;
  x << w1.force, w1.torque, w2.force, w2.torque;
  return grasp_map(grasp) * x - balance_rhs(load);
}

}  // namespace orbsim
