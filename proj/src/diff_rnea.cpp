#include "orbsim/diff_rnea.hpp"

#include <cmath>
#include <string>

#include "orbsim/csv.hpp"
#include "orbsim/errors.hpp"
#include "orbsim/rnea.hpp"

namespace orbsim {

namespace {

void check_params(const ChainModel& model, const VirtualParams& vp) {
  const auto n = static_cast<Eigen::Index>(model.dof());
  if (vp.alpha.size() != n || vp.beta.size() != n)
    throw DimensionMismatch("virtual parameter length does not match chain");
  if (!vp.alpha.allFinite() || !vp.beta.allFinite())
    throw NonFiniteInput("virtual parameters contain non-finite values");
}

void check_sample(const ChainModel& model, const TorqueSample& s,
                  bool need_tau) {
  const auto n = static_cast<Eigen::Index>(model.dof());
  if (s.q.size() != n || s.qdot.size() != n || s.qddot.size() != n)
    throw DimensionMismatch("sample joint vectors do not match chain");
  if (need_tau && s.tau_measured.size() != n)
    throw DimensionMismatch("sample torque vector does not match chain");
  bool finite = s.q.allFinite() && s.qdot.allFinite() && s.qddot.allFinite() &&
                (!need_tau || s.tau_measured.allFinite());
  if (!finite) throw NonFiniteInput("sample contains non-finite values");
}

}  // namespace

std::pair<VecX, VecX> reparam(const VirtualParams& vp) {
  return {vp.alpha.array().exp(), vp.beta.array().exp()};
}

double smooth_sign(double x, double eps) {
  if (!(eps > 0.0)) throw NonPositiveEps("smoothing width must be positive");
  return std::tanh(x / eps);
}

ChainModel apply_params(const ChainModel& model_shape,
                        const VirtualParams& vp) {
  check_params(model_shape, vp);
  auto [mass, fric] = reparam(vp);
  ChainModel out = model_shape;
  for (std::size_t i = 0; i < out.links.size(); ++i) {
    LinkParams& link = out.links[i];
    const double scale = mass[i] / model_shape.links[i].mass;
    link.mass = mass[i];
    link.rot_inertia = scale * model_shape.links[i].rot_inertia;
    link.friction_coeff = fric[i];
  }
  return out;
}

TorqueGrads rnea_with_grads(const ChainModel& model_shape,
                            const VirtualParams& vp, const TorqueSample& sample,
                            double eps) {
  if (!(eps > 0.0)) throw NonPositiveEps("smoothing width must be positive");
  check_params(model_shape, vp);
  check_sample(model_shape, sample, false);
  const auto n = static_cast<Eigen::Index>(model_shape.dof());

  ChainKinematics kin =
      chain_kinematics(model_shape, sample.q, sample.qdot, sample.qddot);

  // Torque is linear in the per-link masses: with the COM fixed and the
  // rotational inertia scaling with mass, link j's spatial inertia is
  // mass_j times a unit-mass inertia.  Propagating each link's unit-mass
  // wrench inward gives the exact mass sensitivities in one sweep.
  Eigen::MatrixXd contrib = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const LinkParams& link = model_shape.links[j];
    const Mat3 unit_rot_inertia = link.rot_inertia / link.mass;
    const SpatialMat unit_inertia =
        assemble_spatial_inertia(1.0, link.com, unit_rot_inertia);
    SpatialVector w =
        apply_inertia(unit_inertia, kin.acceleration[j]) +
        force_cross_apply(kin.velocity[j],
                          apply_inertia(unit_inertia, kin.velocity[j]));
    for (Eigen::Index i = j; i >= 0; --i) {
      contrib(i, j) = model_shape.links[i].joint_axis.dot(w.angular);
      if (i > 0) w = kin.pose_in_parent[i].force_to_parent(w);
    }
  }

  auto [mass, fric] = reparam(vp);
  TorqueGrads out;
  out.tau_pred = contrib * mass;
  out.dtau_dalpha = contrib * mass.asDiagonal();
  out.dtau_dbeta = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = smooth_sign(sample.qdot[i], eps);
    out.tau_pred[i] += fric[i] * s;
    out.dtau_dbeta(i, i) = fric[i] * s;
  }
  return out;
}

double sysid_loss(const ChainModel& model_shape, const VirtualParams& vp,
                  const std::vector<TorqueSample>& dataset, double eps) {
  if (dataset.empty()) throw EmptyDataset("sysid_loss needs samples");
  const auto n = static_cast<Eigen::Index>(model_shape.dof());
  double sum = 0.0;
  for (const TorqueSample& s : dataset) {
    check_sample(model_shape, s, true);
    TorqueGrads tg = rnea_with_grads(model_shape, vp, s, eps);
    sum += (tg.tau_pred - s.tau_measured).squaredNorm();
  }
  return sum / (static_cast<double>(dataset.size()) * static_cast<double>(n));
}

namespace {

struct LossGrad {
  double loss = 0.0;
  VecX dalpha;
  VecX dbeta;
};

LossGrad loss_with_grad(const ChainModel& model_shape, const VirtualParams& vp,
                        const std::vector<TorqueSample>& dataset, double eps) {
  const auto n = static_cast<Eigen::Index>(model_shape.dof());
  LossGrad out;
  out.dalpha = VecX::Zero(n);
  out.dbeta = VecX::Zero(n);
  for (const TorqueSample& s : dataset) {
    check_sample(model_shape, s, true);
    TorqueGrads tg = rnea_with_grads(model_shape, vp, s, eps);
    VecX r = tg.tau_pred - s.tau_measured;
    out.loss += r.squaredNorm();
    out.dalpha += 2.0 * tg.dtau_dalpha.transpose() * r;
    out.dbeta += 2.0 * tg.dtau_dbeta.transpose() * r;
  }
  const double denom =
      static_cast<double>(dataset.size()) * static_cast<double>(n);
  out.loss /= denom;
  out.dalpha /= denom;
  out.dbeta /= denom;
  return out;
}

}  // namespace

FitReport sysid_fit(const ChainModel& model_shape, const VirtualParams& init,
                    const std::vector<TorqueSample>& dataset, double lr,
                    int max_iters, double eps) {
  if (!(lr > 0.0)) throw InvalidHyper("learning rate must be positive");
  if (max_iters < 0) throw InvalidHyper("max_iters must be non-negative");
  if (dataset.empty()) throw EmptyDataset("sysid_fit needs samples");
  check_params(model_shape, init);

  FitReport report;
  report.final_params = init;
  double cur_loss = sysid_loss(model_shape, init, dataset, eps);
  if (!std::isfinite(cur_loss)) throw DivergedFit("initial loss is non-finite");
  report.loss_history.push_back(cur_loss);

  for (int iter = 0; iter < max_iters; ++iter) {
    LossGrad lg = loss_with_grad(model_shape, report.final_params, dataset, eps);
    if (!lg.dalpha.allFinite() || !lg.dbeta.allFinite())
      throw DivergedFit("gradient is non-finite");

    // Step halving: retry a loss-increasing step at half the rate, fresh
    // rate each iteration.
    double step = lr;
    bool accepted = false;
    VirtualParams cand;
    double cand_loss = 0.0;
    for (int halving = 0; halving <= 30; ++halving) {
      cand.alpha = report.final_params.alpha - step * lg.dalpha;
      cand.beta = report.final_params.beta - step * lg.dbeta;
      cand_loss = sysid_loss(model_shape, cand, dataset, eps);
      if (std::isfinite(cand_loss) && cand_loss < cur_loss) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!std::isfinite(cand_loss))
        throw DivergedFit("loss is non-finite after backtracking");
      break;
    }

    auto [mass, fric] = reparam(cand);
    if (!(mass.minCoeff() > 0.0) || !(fric.minCoeff() > 0.0))
      throw DivergedFit("reparameterized values left the positive range");

    const double decrease = cur_loss - cand_loss;
    report.final_params = cand;
    cur_loss = cand_loss;
    report.loss_history.push_back(cur_loss);
    if (decrease < 1e-14) break;
  }

  report.iterations = static_cast<int>(report.loss_history.size()) - 1;
  return report;
}

std::string dataset_to_csv(const std::vector<TorqueSample>& dataset) {
  if (dataset.empty()) throw EmptyDataset("cannot export an empty dataset");
  const auto n = dataset.front().q.size();
  std::vector<std::string> header;
  auto add_cols = [&](const std::string& prefix) {
    for (Eigen::Index i = 0; i < n; ++i)
      header.push_back(prefix + "_" + std::to_string(i + 1));
  };
  add_cols("q");
  add_cols("qd");
  add_cols("qdd");
  add_cols("tau");
  CsvTable table(header);
  for (const TorqueSample& s : dataset) {
    if (s.q.size() != n || s.qdot.size() != n || s.qddot.size() != n ||
        s.tau_measured.size() != n)
      throw DimensionMismatch("dataset rows have inconsistent widths");
    std::vector<std::string> row;
    auto add_vec = [&row](const VecX& v) {
      for (Eigen::Index i = 0; i < v.size(); ++i)
        row.push_back(format_double(v[i]));
    };
    add_vec(s.q);
    add_vec(s.qdot);
    add_vec(s.qddot);
    add_vec(s.tau_measured);
    table.add_row(std::move(row));
  }
  return table.render();
}

std::vector<TorqueSample> dataset_from_csv(const std::string& text) {
  auto rows = parse_csv(text);
  if (rows.empty()) throw ParseError("dataset CSV has no header");
  const auto& header = rows.front();
  if (header.size() % 4 != 0 || header.empty())
    throw ParseError("dataset header must hold q/qd/qdd/tau column groups");
  const std::size_t n = header.size() / 4;
  if (header[0] != "q_1" || header[n] != "qd_1" || header[2 * n] != "qdd_1" ||
      header[3 * n] != "tau_1")
    throw ParseError("dataset header columns are out of order");

  std::vector<TorqueSample> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size())
      throw ParseError("dataset row " + std::to_string(r) + " has wrong width");
    TorqueSample s;
    auto read_vec = [&](std::size_t offset) {
      VecX v(n);
      for (std::size_t i = 0; i < n; ++i) {
        try {
          v[static_cast<Eigen::Index>(i)] = std::stod(row[offset + i]);
        } catch (const std::exception&) {
          throw ParseError("dataset row " + std::to_string(r) +
                           " holds a non-numeric field");
        }
      }
      return v;
    };
    s.q = read_vec(0);
    s.qdot = read_vec(n);
    s.qddot = read_vec(2 * n);
    s.tau_measured = read_vec(3 * n);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace orbsim
