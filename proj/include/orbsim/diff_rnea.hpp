#pragma once

#include <string>
#include <tuple>
#include <vector>

#include "orbsim/chain.hpp"

namespace orbsim {

/// Log-space parameters: mass_i = exp(alpha_i), friction_i = exp(beta_i).
/// The exponential keeps both strictly positive for any real iterate.
struct VirtualParams {
  VecX alpha;
  VecX beta;
};

struct TorqueSample {
  VecX q;
  VecX qdot;
  VecX qddot;
  VecX tau_measured;
};

struct FitReport {
  VirtualParams final_params;
  std::vector<double> loss_history;  // loss_history[0] is the initial loss
  int iterations = 0;                // equals loss_history.size() - 1
};

/// Elementwise exponential of (alpha, beta) -> (masses, frictions).
std::pair<VecX, VecX> reparam(const VirtualParams& vp);

/// tanh(x / eps): odd, bounded by 1, approaches sgn(x) as eps -> 0.
double smooth_sign(double x, double eps);

struct TorqueGrads {
  VecX tau_pred;
  Eigen::MatrixXd dtau_dalpha;  // (i, j) = d tau_i / d alpha_j
  Eigen::MatrixXd dtau_dbeta;   // diagonal: friction only affects its joint
};

/// Predicted torques under the reparameterized model plus exact analytic
/// gradients.  model_shape supplies geometry (COM, joint placement) and the
/// inertia shape; each link's rotational inertia is normalized by its mass
/// and rescaled by exp(alpha_i), so alpha_i scales the spatial inertia
/// linearly.  Friction uses smooth_sign instead of the hard sign.
TorqueGrads rnea_with_grads(const ChainModel& model_shape,
                            const VirtualParams& vp, const TorqueSample& sample,
                            double eps = 1e-2);

/// Mean squared torque error over all samples and joints.
double sysid_loss(const ChainModel& model_shape, const VirtualParams& vp,
                  const std::vector<TorqueSample>& dataset, double eps = 1e-2);

/// Gradient descent on sysid_loss with step-halving backtracking: a step
/// that increases the loss is retried at half the rate, up to 30 halvings.
/// Stops at max_iters, when the decrease falls below 1e-14, or when
/// backtracking cannot find a decrease.
FitReport sysid_fit(const ChainModel& model_shape, const VirtualParams& init,
                    const std::vector<TorqueSample>& dataset, double lr = 1e-2,
                    int max_iters = 5000, double eps = 1e-2);

/// The model with reparam(vp) applied: masses, proportionally scaled
/// rotational inertias, frictions.
ChainModel apply_params(const ChainModel& model_shape, const VirtualParams& vp);

/// Columns: q_1..q_n, qd_1..qd_n, qdd_1..qdd_n, tau_1..tau_n.
std::string dataset_to_csv(const std::vector<TorqueSample>& dataset);
std::vector<TorqueSample> dataset_from_csv(const std::string& text);

}  // namespace orbsim
