#include "orbsim/chain.hpp"

#include <Eigen/Eigenvalues>

#include "orbsim/errors.hpp"

namespace orbsim {

void validate_chain(const ChainModel& model) {
  if (model.links.empty()) {
    throw DimensionMismatch("chain needs at least one link");
  }
  if (!model.gravity.allFinite()) {
    throw NonFiniteInput("gravity is not finite");
  }
  for (std::size_t i = 0; i < model.links.size(); ++i) {
    const auto& link = model.links[i];
    const std::string where = "link " + std::to_string(i);
    if (!(link.mass > 0.0)) {
      throw NonPositiveMass(where + ": mass must be > 0");
    }
    if (link.friction_coeff < 0.0) {
      throw NonFiniteInput(where + ": friction coefficient must be >= 0");
    }
    if (!link.com.allFinite() || !link.rot_inertia.allFinite() ||
        !link.joint_axis.allFinite() || !link.joint_offset.rot.allFinite() ||
        !link.joint_offset.trans.allFinite() ||
        !std::isfinite(link.mass) || !std::isfinite(link.friction_coeff)) {
      throw NonFiniteInput(where + ": non-finite parameter");
    }
    if (std::abs(link.joint_axis.norm() - 1.0) > 1e-12) {
      throw NonFiniteInput(where + ": joint axis must be a unit vector");
    }
    if ((link.rot_inertia - link.rot_inertia.transpose()).norm() > 1e-9) {
      throw AsymmetricInertia(where + ": rotational inertia not symmetric");
    }
    // Point masses make the inertia singular along the COM axis, so the
    // check is semidefiniteness with a small tolerance, not strict PD.
    Eigen::SelfAdjointEigenSolver<Mat3> eig(link.rot_inertia);
    if (eig.eigenvalues().minCoeff() < -1e-9) {
      throw AsymmetricInertia(where + ": rotational inertia has a negative eigenvalue");
    }
  }
}

void check_dims(const ChainModel& model, const VecX& v,
                const std::string& name) {
  if (static_cast<std::size_t>(v.size()) != model.dof()) {
    throw DimensionMismatch(name + " has size " + std::to_string(v.size()) +
                            ", chain has " + std::to_string(model.dof()) +
                            " joints");
  }
}

}  // namespace orbsim
