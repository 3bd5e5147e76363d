#include "orbsim/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <memory>

#include "orbsim/allocation.hpp"
#include "orbsim/csv.hpp"
#include "orbsim/diff_rnea.hpp"
#include "orbsim/errors.hpp"
#include "orbsim/load_wrench.hpp"
#include "orbsim/policies.hpp"
#include "orbsim/rnea.hpp"
#include "orbsim/rng.hpp"

namespace orbsim {

namespace {

void write_output(const Config& config, const std::string& name,
                  const std::string& content) {
  std::filesystem::create_directories(config.out_dir);
  write_file((std::filesystem::path(config.out_dir) / name).string(), content);
}

JointState random_state(const ChainModel& model, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(model.dof());
  JointState s{VecX(n), VecX(n), VecX(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    s.q[i] = rng.uniform(-M_PI, M_PI);
    s.qdot[i] = rng.uniform(-2.0, 2.0);
    s.qddot[i] = rng.uniform(-5.0, 5.0);
  }
  return s;
}

/// World pose of every link frame, accumulated base to tip.
void world_poses(const ChainModel& model, const VecX& q, std::vector<Mat3>* rot,
                 std::vector<Vec3>* pos) {
  ChainKinematics kin = chain_kinematics(model, q, VecX::Zero(q.size()),
                                         VecX::Zero(q.size()));
  rot->clear();
  pos->clear();
  Mat3 r = Mat3::Identity();
  Vec3 p = Vec3::Zero();
  for (std::size_t i = 0; i < model.dof(); ++i) {
    p = p + r * kin.pose_in_parent[i].trans;
    r = r * kin.pose_in_parent[i].rot;
    rot->push_back(r);
    pos->push_back(p);
  }
}

Vec3 vee(const Mat3& m) {
  Mat3 a = 0.5 * (m - m.transpose());
  return {a(2, 1), a(0, 2), a(1, 0)};
}

struct CheckRow {
  std::string name;
  double max_error = 0.0;
  double threshold = 0.0;
};

/// Body-frame link velocities against central differences of the world
/// poses along q(t) = q + qdot t.
double check_velocity_fd(const ChainModel& chain, Rng& rng) {
  ChainModel model = chain;
  model.gravity = Vec3::Zero();
  const double h = 1e-6;
  double worst = 0.0;
  for (int trial = 0; trial < 25; ++trial) {
    JointState s = random_state(model, rng);
    std::vector<SpatialVector> vel =
        propagate_velocity(model, s.q, s.qdot);
    std::vector<Mat3> r0, rp, rm;
    std::vector<Vec3> p0, pp, pm;
    world_poses(model, s.q, &r0, &p0);
    world_poses(model, VecX(s.q + h * s.qdot), &rp, &pp);
    world_poses(model, VecX(s.q - h * s.qdot), &rm, &pm);
    for (std::size_t i = 0; i < model.dof(); ++i) {
      Mat3 rdot = (rp[i] - rm[i]) / (2.0 * h);
      Vec3 omega = vee(Mat3(r0[i].transpose() * rdot));
      Vec3 lin = r0[i].transpose() * ((pp[i] - pm[i]) / (2.0 * h));
      worst = std::max(worst, (vel[i].angular - omega).lpNorm<Eigen::Infinity>());
      worst = std::max(worst, (vel[i].linear - lin).lpNorm<Eigen::Infinity>());
    }
  }
  return worst;
}

/// Body-frame link accelerations against central differences of the body
/// velocities along q(t) = q + qdot t + qddot t^2 / 2.
double check_acceleration_fd(const ChainModel& chain, Rng& rng) {
  ChainModel model = chain;
  model.gravity = Vec3::Zero();
  const double h = 1e-6;
  double worst = 0.0;
  for (int trial = 0; trial < 25; ++trial) {
    JointState s = random_state(model, rng);
    std::vector<SpatialVector> acc =
        propagate_acceleration(model, s.q, s.qdot, s.qddot);
    auto vel_at = [&](double t) {
      VecX q = s.q + t * s.qdot + 0.5 * t * t * s.qddot;
      VecX qd = s.qdot + t * s.qddot;
      return propagate_velocity(model, q, qd);
    };
    std::vector<SpatialVector> vp = vel_at(h);
    std::vector<SpatialVector> vm = vel_at(-h);
    for (std::size_t i = 0; i < model.dof(); ++i) {
      Vec6 fd = (vp[i].as_vec6() - vm[i].as_vec6()) / (2.0 * h);
      worst = std::max(worst,
                       (acc[i].as_vec6() - fd).lpNorm<Eigen::Infinity>());
    }
  }
  return worst;
}

/// Closed-form planar double pendulum torques (zero gravity).  Inertias
/// enter about the link frame origins, links stretched along +x.
VecX planar2_closed_form(const ChainModel& model, const JointState& s) {
  const double m2 = model.links[1].mass;
  const double a1 = model.links[1].joint_offset.trans.x();
  const double c2 = model.links[1].com.x();
  const double i1o = model.links[0].rot_inertia(2, 2);
  const double i2o = model.links[1].rot_inertia(2, 2);
  const double cos2 = std::cos(s.q[1]);
  const double sin2 = std::sin(s.q[1]);
  const double m11 = i1o + i2o + m2 * (a1 * a1 + 2.0 * a1 * c2 * cos2);
  const double m12 = i2o + m2 * a1 * c2 * cos2;
  const double m22 = i2o;
  const double hh = m2 * a1 * c2 * sin2;
  VecX tau(2);
  tau[0] = m11 * s.qddot[0] + m12 * s.qddot[1] -
           hh * (2.0 * s.qdot[0] * s.qdot[1] + s.qdot[1] * s.qdot[1]);
  tau[1] = m12 * s.qddot[0] + m22 * s.qddot[1] + hh * s.qdot[0] * s.qdot[0];
  return tau;
}

double check_double_pendulum(Rng& rng) {
  ChainModel model = make_planar2_chain();
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    JointState s = random_state(model, rng);
    VecX got = rnea(model, s);
    VecX want = planar2_closed_form(model, s);
    const double scale = std::max(want.lpNorm<Eigen::Infinity>(), 1e-12);
    worst = std::max(worst, (got - want).lpNorm<Eigen::Infinity>() / scale);
  }
  return worst;
}

/// |tau . qdot - d(KE)/dt - dissipation| along a smooth 5 s trajectory;
/// d(KE)/dt by central differences in time.
double check_power_balance(const ChainModel& chain, bool with_friction) {
  ChainModel model = chain;
  model.gravity = Vec3::Zero();
  if (!with_friction)
    for (LinkParams& link : model.links) link.friction_coeff = 0.0;
  const auto n = static_cast<Eigen::Index>(model.dof());
  VecX amp(n), freq(n), phase(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    amp[i] = 0.8 + 0.2 * static_cast<double>(i);
    freq[i] = 1.0 + 0.45 * static_cast<double>(i);
    phase[i] = 0.3 * static_cast<double>(i);
  }
  auto state_at = [&](double t) {
    JointState s{VecX(n), VecX(n), VecX(n)};
    for (Eigen::Index i = 0; i < n; ++i) {
      s.q[i] = amp[i] * std::sin(freq[i] * t + phase[i]);
      s.qdot[i] = amp[i] * freq[i] * std::cos(freq[i] * t + phase[i]);
      s.qddot[i] = -amp[i] * freq[i] * freq[i] * std::sin(freq[i] * t + phase[i]);
    }
    return s;
  };
  const double h = 1e-6;
  double worst = 0.0;
  for (int k = 0; k <= 500; ++k) {
    const double t = 5.0 * static_cast<double>(k) / 500.0;
    JointState s = state_at(t);
    VecX tau = rnea(model, s);
    const double power = tau.dot(s.qdot);
    JointState sp = state_at(t + h);
    JointState sm = state_at(t - h);
    const double ke_dot = (kinetic_energy(model, sp.q, sp.qdot) -
                           kinetic_energy(model, sm.q, sm.qdot)) /
                          (2.0 * h);
    double dissipation = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      dissipation += model.links[static_cast<std::size_t>(i)].friction_coeff *
                     std::abs(s.qdot[i]);
    worst = std::max(worst, std::abs(power - ke_dot - dissipation));
  }
  return worst;
}

double check_kinetic_energy_nonneg(const ChainModel& model, Rng& rng) {
  double lowest = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    JointState s = random_state(model, rng);
    lowest = std::min(lowest, kinetic_energy(model, s.q, s.qdot));
  }
  return std::max(0.0, -lowest);
}

LoadState random_load(Rng& rng) {
  LoadState load;
  load.mass = rng.uniform(0.5, 10.0);
  Mat3 a;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) a(r, c) = rng.normal();
  load.rot_inertia = a.transpose() * a + 0.1 * Mat3::Identity();
  for (int i = 0; i < 3; ++i) {
    load.lin_acc[i] = rng.uniform(-2.0, 2.0);
    load.ang_vel[i] = rng.uniform(-2.0, 2.0);
    load.ang_acc[i] = rng.uniform(-2.0, 2.0);
    load.coriolis[i] = rng.uniform(-1.0, 1.0);
    load.external_force[i] = rng.uniform(-5.0, 5.0);
    load.external_torque[i] = rng.uniform(-5.0, 5.0);
    load.external_offset[i] = rng.uniform(-1.0, 1.0);
  }
  return load;
}

GraspConfig random_grasp(Rng& rng) {
  GraspConfig grasp;
  do {
    for (int i = 0; i < 3; ++i) {
      grasp.r1[i] = rng.uniform(-1.0, 1.0);
      grasp.r2[i] = rng.uniform(-1.0, 1.0);
    }
  } while ((grasp.r1 - grasp.r2).norm() < 0.1);
  return grasp;
}

double check_decompose_residual(Rng& rng) {
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    LoadState load = random_load(rng);
    GraspConfig grasp = random_grasp(rng);
    auto [w1, w2] = dual_arm_decompose(load, grasp);
    worst = std::max(worst,
                     load_balance_residual(load, grasp, w1, w2).norm());
  }
  return worst;
}

/// Null-space perturbations keep both balance equations; the pseudoinverse
/// solution must never be longer than a perturbed one.
double check_decompose_min_norm(Rng& rng) {
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    LoadState load = random_load(rng);
    GraspConfig grasp = random_grasp(rng);
    auto [w1, w2] = dual_arm_decompose(load, grasp);
    const double base_sq = w1.force.squaredNorm() + w1.torque.squaredNorm() +
                           w2.force.squaredNorm() + w2.torque.squaredNorm();
    const Vec6 res0 = load_balance_residual(load, grasp, w1, w2);
    for (int p = 0; p < 10; ++p) {
      Vec3 df, dt1;
      for (int i = 0; i < 3; ++i) {
        df[i] = rng.uniform(-1.0, 1.0);
        dt1[i] = rng.uniform(-1.0, 1.0);
      }
      Wrench p1{w1.force + df, w1.torque + dt1};
      Wrench p2{w2.force - df,
                w2.torque - dt1 - (grasp.r1 - grasp.r2).cross(df)};
      const Vec6 res = load_balance_residual(load, grasp, p1, p2);
      worst = std::max(worst, (res - res0).norm());
      const double pert_sq = p1.force.squaredNorm() + p1.torque.squaredNorm() +
                             p2.force.squaredNorm() + p2.torque.squaredNorm();
      worst = std::max(worst, std::sqrt(base_sq) - std::sqrt(pert_sq));
    }
  }
  return worst;
}

VirtualParams random_params(std::size_t n, Rng& rng) {
  VirtualParams vp{VecX(static_cast<Eigen::Index>(n)),
                   VecX(static_cast<Eigen::Index>(n))};
  for (Eigen::Index i = 0; i < vp.alpha.size(); ++i) {
    vp.alpha[i] = rng.uniform(-1.0, 1.0);
    vp.beta[i] = rng.uniform(-1.0, 1.0);
  }
  return vp;
}

/// Analytic parameter gradients against central differences; relative error
/// with a unit floor on the denominator.
double check_param_gradient(const ChainModel& model, Rng& rng, bool alpha) {
  const double h = 1e-6;
  const auto n = static_cast<Eigen::Index>(model.dof());
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    JointState st = random_state(model, rng);
    TorqueSample sample{st.q, st.qdot, st.qddot, VecX::Zero(n)};
    VirtualParams vp = random_params(model.dof(), rng);
    TorqueGrads grads = rnea_with_grads(model, vp, sample);
    for (Eigen::Index j = 0; j < n; ++j) {
      VirtualParams up = vp, dn = vp;
      (alpha ? up.alpha[j] : up.beta[j]) += h;
      (alpha ? dn.alpha[j] : dn.beta[j]) -= h;
      VecX fd = (rnea_with_grads(model, up, sample).tau_pred -
                 rnea_with_grads(model, dn, sample).tau_pred) /
                (2.0 * h);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double got =
            alpha ? grads.dtau_dalpha(i, j) : grads.dtau_dbeta(i, j);
        const double rel =
            std::abs(got - fd[i]) / std::max(1.0, std::abs(fd[i]));
        worst = std::max(worst, rel);
      }
    }
  }
  return worst;
}

/// <f, crm(v) w> + <crf(v) f, w> must vanish for every motion pair (v, w)
/// and force f.
double check_dual_pairing(Rng& rng) {
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    Vec6 v, w, f;
    for (int i = 0; i < 6; ++i) {
      v[i] = rng.uniform(-1.0, 1.0);
      w[i] = rng.uniform(-1.0, 1.0);
      f[i] = rng.uniform(-1.0, 1.0);
    }
    SpatialVector sv = SpatialVector::from_vec6(v);
    const double lhs = f.dot(motion_cross(sv) * w);
    const double rhs = (force_cross_dual(sv) * f).dot(w);
    worst = std::max(worst, std::abs(lhs + rhs));
  }
  return worst;
}

std::unique_ptr<Policy> make_named_policy(const Config& config,
                                          const std::string& name) {
  const EnvSpec env = env_spec_of(config);
  const int robots = static_cast<int>(config.robots.size());
  if (name == "fifo")
    return std::make_unique<RulePolicy>(
        std::vector<Rule>(config.robots.size(), Rule::FIFO));
  if (name == "spt")
    return std::make_unique<RulePolicy>(
        std::vector<Rule>(config.robots.size(), Rule::SPT));
  if (name == "rules")
    return std::make_unique<RulePolicy>(greedy_rule_search(
        robots, env, {Rule::FIFO, Rule::SPT}, config.allocation.n_mc,
        config.seeds.front() + 20000));
  if (name == "q") {
    QHyper hyper;
    hyper.episodes = config.allocation.episodes;
    hyper.lr = config.allocation.lr;
    hyper.discount = config.allocation.discount;
    hyper.eps_start = config.allocation.eps_start;
    hyper.eps_end = config.allocation.eps_end;
    hyper.grid_n = config.allocation.grid_n;
    return std::make_unique<QPolicy>(
        train_q_policy(env, hyper, config.seeds.front() + 10000));
  }
  return nullptr;
}

}  // namespace

int cmd_dynamics_check(const Config& config) {
  const ChainModel& serial3 = config.chains.at("serial3");
  const uint64_t base = config.seeds.front();
  std::vector<CheckRow> rows;
  int idx = 0;
  auto run = [&](const std::string& name, double threshold, auto&& fn) {
    Rng rng(derive_seed(base, static_cast<uint64_t>(idx++)));
    rows.push_back({name, fn(rng), threshold});
  };

  run("velocity_recursion_fd", 1e-6,
      [&](Rng& rng) { return check_velocity_fd(serial3, rng); });
  run("acceleration_recursion_fd", 1e-5,
      [&](Rng& rng) { return check_acceleration_fd(serial3, rng); });
  run("double_pendulum_closed_form", 1e-9,
      [&](Rng& rng) { return check_double_pendulum(rng); });
  run("power_balance_frictionless", 1e-6,
      [&](Rng&) { return check_power_balance(serial3, false); });
  run("power_balance_coulomb", 1e-6,
      [&](Rng&) { return check_power_balance(serial3, true); });
  run("kinetic_energy_nonneg", 1e-12,
      [&](Rng& rng) { return check_kinetic_energy_nonneg(serial3, rng); });
  run("wrench_decompose_residual", 1e-9,
      [&](Rng& rng) { return check_decompose_residual(rng); });
  run("wrench_decompose_min_norm", 1e-12,
      [&](Rng& rng) { return check_decompose_min_norm(rng); });
  run("param_gradient_alpha_fd", 1e-5,
      [&](Rng& rng) { return check_param_gradient(serial3, rng, true); });
  run("param_gradient_beta_fd", 1e-5,
      [&](Rng& rng) { return check_param_gradient(serial3, rng, false); });
  run("spatial_dual_pairing", 1e-12,
      [&](Rng& rng) { return check_dual_pairing(rng); });

  CsvTable table({"check", "max_error", "threshold", "pass"});
  bool all_pass = true;
  for (const CheckRow& row : rows) {
    const bool pass = row.max_error <= row.threshold;
    all_pass = all_pass && pass;
    table.add_row({row.name, format_double(row.max_error),
                   format_double(row.threshold), pass ? "1" : "0"});
    std::cout << (pass ? "pass" : "FAIL") << "  " << row.name
              << "  max_error=" << format_double(row.max_error)
              << " threshold=" << format_double(row.threshold) << "\n";
  }
  write_output(config, "dynamics_report.csv", table.render());
  return all_pass ? 0 : 2;
}

int cmd_train(const Config& config) {
  const EnvSpec env = env_spec_of(config);
  QHyper hyper;
  hyper.episodes = config.allocation.episodes;
  hyper.lr = config.allocation.lr;
  hyper.discount = config.allocation.discount;
  hyper.eps_start = config.allocation.eps_start;
  hyper.eps_end = config.allocation.eps_end;
  hyper.grid_n = config.allocation.grid_n;

  std::vector<TrainEpisodeRow> curve;
  QPolicy policy = train_q_policy(env, hyper, config.seeds.front(), &curve);

  write_output(config, "qtable.csv", qtable_to_csv(policy));
  CsvTable table({"episode", "reward_total", "transfer_rate", "epsilon"});
  for (const TrainEpisodeRow& row : curve)
    table.add_row({std::to_string(row.episode), format_double(row.reward_total),
                   format_double(row.transfer_rate),
                   format_double(row.epsilon)});
  write_output(config, "training_curve.csv", table.render());

  std::cout << "train  episodes=" << hyper.episodes
            << " states=" << policy.table.size() << " out=" << config.out_dir
            << "\n";
  return 0;
}

int cmd_bench(const Config& config,
              const std::vector<std::string>& policy_names) {
  static const std::vector<std::string> kCanonical = {"fifo", "spt", "rules",
                                                      "q"};
  std::vector<std::string> selected;
  if (policy_names.empty()) {
    selected = kCanonical;
  } else {
    for (const std::string& name : policy_names)
      if (std::find(kCanonical.begin(), kCanonical.end(), name) ==
          kCanonical.end())
        throw MissingPolicy("no policy named '" + name +
                            "'; expected fifo, spt, rules or q");
    for (const std::string& name : kCanonical)
      if (std::find(policy_names.begin(), policy_names.end(), name) !=
          policy_names.end())
        selected.push_back(name);
  }
  if (selected.empty()) throw MissingPolicy("no policy selected");

  const EnvSpec env = env_spec_of(config);

  struct PolicyRuns {
    std::string name;
    std::vector<double> transfer, reward, fuel;
    double mean_transfer = 0.0;
  };
  auto mean_of = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  };
  auto std_of = [&](const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
  };

  std::vector<PolicyRuns> runs;
  for (const std::string& name : selected) {
    std::unique_ptr<Policy> policy = make_named_policy(config, name);
    PolicyRuns r;
    r.name = name;
    for (uint64_t seed : config.seeds) {
      EvalReport rep = monte_carlo_eval(*policy, env, 1, seed);
      r.transfer.push_back(rep.transfer_rates[0]);
      r.reward.push_back(rep.rewards[0]);
      r.fuel.push_back(rep.fuels[0]);
    }
    r.mean_transfer = mean_of(r.transfer);
    runs.push_back(std::move(r));
  }

  CsvTable summary({"policy", "n", "mean_transfer", "std_transfer",
                    "mean_reward", "std_reward", "mean_fuel", "std_fuel"});
  CsvTable per_seed(
      {"policy", "seed", "transfer_rate", "reward_total", "total_fuel"});
  for (const PolicyRuns& r : runs) {
    summary.add_row({r.name, std::to_string(r.transfer.size()),
                     format_double(r.mean_transfer),
                     format_double(std_of(r.transfer)),
                     format_double(mean_of(r.reward)),
                     format_double(std_of(r.reward)),
                     format_double(mean_of(r.fuel)),
                     format_double(std_of(r.fuel))});
    std::cout << "bench  " << r.name
              << "  mean_transfer=" << format_double(r.mean_transfer)
              << " mean_reward=" << format_double(mean_of(r.reward)) << "\n";
    for (std::size_t i = 0; i < config.seeds.size(); ++i)
      per_seed.add_row({r.name, std::to_string(config.seeds[i]),
                        format_double(r.transfer[i]),
                        format_double(r.reward[i]), format_double(r.fuel[i])});
  }

  const PolicyRuns* q_run = nullptr;
  const PolicyRuns* best_heuristic = nullptr;
  for (const PolicyRuns& r : runs) {
    if (r.name == "q") {
      q_run = &r;
    } else if (!best_heuristic ||
               r.mean_transfer > best_heuristic->mean_transfer) {
      best_heuristic = &r;
    }
  }
  if (q_run && best_heuristic && best_heuristic->mean_transfer > 0.0) {
    const double improvement =
        (q_run->mean_transfer - best_heuristic->mean_transfer) /
        best_heuristic->mean_transfer;
    summary.add_row(
        {"improvement", "", format_double(improvement), "", "", "", "", ""});
    std::cout << "bench  improvement=" << format_double(improvement)
              << " (q vs " << best_heuristic->name << ")\n";
  }

  write_output(config, "bench.csv", summary.render());
  write_output(config, "bench_per_seed.csv", per_seed.render());
  return 0;
}

int cmd_simulate(const Config& config, const std::string& policy_name) {
  std::unique_ptr<Policy> policy = make_named_policy(config, policy_name);
  if (!policy)
    throw UnknownPolicy("no policy named '" + policy_name +
                        "'; expected fifo, spt, rules or q");

  World world = make_env_world(env_spec_of(config), config.seeds.front());
  std::vector<Event> events;
  EpisodeMetrics metrics =
      run_episode(std::move(world), *policy, config.horizon, &events);

  write_output(config, "events.csv", events_to_csv(events));
  CsvTable table({"retrieved_count", "total_debris", "transfer_rate",
                  "elapsed", "total_fuel", "penalty", "reward_total"});
  table.add_row({std::to_string(metrics.retrieved_count),
                 std::to_string(metrics.total_debris),
                 format_double(metrics.transfer_rate),
                 format_double(metrics.elapsed),
                 format_double(metrics.total_fuel),
                 format_double(metrics.penalty_accum),
                 format_double(metrics.reward_total)});
  write_output(config, "metrics.csv", table.render());

  std::cout << "simulate  policy=" << policy_name
            << " retrieved=" << metrics.retrieved_count << "/"
            << metrics.total_debris
            << " reward=" << format_double(metrics.reward_total) << "\n";
  return 0;
}

}  // namespace orbsim
