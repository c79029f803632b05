#include "magodom/pipeline.hpp"

#include <cmath>

#include "magodom/errors.hpp"

namespace magodom {

Dataset simulate_dataset(const MagWorld& world, const TrueTrajectory& traj,
                         const SensorConfig& sensors, const SimulateOptions& opt) {
  Dataset d;
  d.meta.array_baseline = sensors.mag_array.baseline;
  d.meta.gyro_rate_hz = sensors.gyro.rate_hz;
  d.meta.mag_rate_hz = sensors.mag_array.rate_hz;

  GyroModel gyro = sensors.gyro;
  MagArrayModel mag = sensors.mag_array;
  if (opt.zero_noise) {
    gyro.noise_psd = 0.0;
    mag.noise_std = 0.0;
  }

  d.gyro = simulate_gyro(traj, gyro, opt.seed);

  std::mt19937_64 mag_rng(opt.seed + 1);
  const double mag_dt = 1.0 / mag.rate_hz;
  const int n_mag = static_cast<int>(std::round(traj.duration() * mag.rate_hz));
  d.mag.reserve(n_mag + 1);
  d.truth.reserve(n_mag + 1);
  for (int k = 0; k <= n_mag; ++k) {
    const double t = k * mag_dt;
    const Pose2 pose = traj.pose(t);
    Dataset::MagRecord rec;
    rec.t = t;
    rec.readings = simulate_array(world, pad_to_3d(pose), mag, mag_rng);
    for (Vector3d& b : rec.readings) b += sensors.mag_bias;
    d.mag.push_back(rec);
    d.truth.push_back({t, pose});
  }

  if (sensors.with_odom) {
    std::mt19937_64 odom_rng(opt.seed + 2);
    std::normal_distribution<double> noise(0.0, 1.0);
    const double sigma = opt.zero_noise ? 0.0 : sensors.odom_speed_noise_std;
    const double dt = 1.0 / sensors.gyro.rate_hz;
    const int n = static_cast<int>(std::round(traj.duration() * sensors.gyro.rate_hz));
    for (int k = 1; k <= n; ++k) {
      const double t = k * dt;
      const double v = traj.speed(t - dt / 2.0) + (sigma > 0 ? sigma * noise(odom_rng) : 0.0);
      d.odom.push_back({t, v});
    }
  }
  return d;
}

namespace {

struct Keyframes {
  std::vector<double> times;
  std::vector<FieldSample> samples;
  std::vector<PreintegratedGyro> preint;  // preint[k] covers (t_{k-1}, t_k]
};

Keyframes build_keyframes(const Dataset& d, const EstimatorConfig& cfg) {
  if (d.mag.empty()) throw DataError("dataset has no magnetometer records");
  const int stride =
      std::max(1, static_cast<int>(std::round(d.meta.mag_rate_hz / cfg.keyframe_hz)));
  Keyframes kf;
  for (size_t i = 0; i < d.mag.size(); i += stride) {
    kf.times.push_back(d.mag[i].t);
    kf.samples.push_back(
        recover_gradient(d.mag[i].readings, d.meta.array_baseline, d.mag[i].t));
  }
  const GyroModel model{cfg.q_gyro_psd, d.meta.gyro_rate_hz};
  kf.preint.resize(kf.times.size());
  size_t g = 0;
  for (size_t k = 1; k < kf.times.size(); ++k) {
    const double t0 = kf.times[k - 1];
    const double t1 = kf.times[k];
    while (g < d.gyro.size() && d.gyro[g].t <= t0 + 1e-9) ++g;
    size_t g_end = g;
    while (g_end < d.gyro.size() && d.gyro[g_end].t <= t1 + 1e-9) ++g_end;
    kf.preint[k] = preintegrate_gyro(
        std::span<const GyroSample>(d.gyro.data() + g, g_end - g), model);
    g = g_end;
  }
  return kf;
}

Pose2 anchor_pose(const Dataset& d, double t0) {
  if (d.truth.empty()) return Pose2::identity();
  // nearest truth record to the first keyframe
  const TimedPose* best = &d.truth.front();
  for (const TimedPose& p : d.truth) {
    if (std::abs(p.t - t0) < std::abs(best->t - t0)) best = &p;
  }
  return best->pose;
}

std::vector<Pose2> build_initial_guess(const Keyframes& kf, const Pose2& prior,
                                       const EstimatorConfig& cfg) {
  std::vector<Pose2> out;
  out.reserve(kf.times.size());
  out.push_back(prior);
  for (size_t k = 1; k < kf.times.size(); ++k) {
    const double th_prev = out.back().heading();
    const double th = wrap_angle(th_prev + kf.preint[k].dtheta);
    const double dt = kf.times[k] - kf.times[k - 1];
    Vector2d p = out.back().position();
    p += cfg.nominal_speed * dt * Vector2d(std::cos(th_prev), std::sin(th_prev));
    out.emplace_back(th, p);
  }
  return out;
}

EstimationProblem build_problem(const Keyframes& kf, const Pose2& prior,
                                const EstimatorConfig& cfg,
                                const EstimateOptions& opt) {
  EstimationProblem problem;
  problem.settings = cfg.solver;
  problem.initial = build_initial_guess(kf, prior, cfg);
  const size_t K = kf.times.size();

  Matrix3d P0 = Matrix3d::Zero();
  P0(0, 0) = cfg.prior_heading_std * cfg.prior_heading_std;
  P0(1, 1) = P0(2, 2) = cfg.prior_position_std * cfg.prior_position_std;
  problem.blocks.push_back(ResidualBlock::make_prior(0, prior, P0));

  const Matrix3d R_fd = cfg.r_fd_std * cfg.r_fd_std * Matrix3d::Identity();
  const Matrix3d R_cd = cfg.r_cd_std * cfg.r_cd_std * Matrix3d::Identity();
  const double r_slip_var = cfg.r_slip_std * cfg.r_slip_std;

  for (size_t k = 1; k < K; ++k) {
    problem.blocks.push_back(ResidualBlock::make_gyro(
        static_cast<int>(k - 1), static_cast<int>(k), kf.preint[k].dtheta,
        kf.preint[k].variance));
    if (!opt.drop_fd) {
      problem.blocks.push_back(ResidualBlock::make_fd_mag(
          static_cast<int>(k - 1), static_cast<int>(k), kf.samples[k - 1].B,
          kf.samples[k].B, kf.samples[k].gvec, R_fd));
    }
    if (!opt.drop_slip) {
      problem.blocks.push_back(ResidualBlock::make_slip(
          static_cast<int>(k - 1), static_cast<int>(k), r_slip_var));
    }
  }
  if (!opt.drop_cd) {
    for (size_t k = 1; k + 1 < K; ++k) {
      problem.blocks.push_back(ResidualBlock::make_cd_mag(
          static_cast<int>(k - 1), static_cast<int>(k), static_cast<int>(k + 1),
          kf.samples[k - 1].B, kf.samples[k + 1].B, kf.samples[k].gvec, R_cd));
    }
  }
  return problem;
}

}  // namespace

EstimateResult run_estimator(const Dataset& dataset, const EstimatorConfig& cfg,
                             const EstimateOptions& opt) {
  Keyframes kf = build_keyframes(dataset, cfg);
  Pose2 prior = anchor_pose(dataset, kf.times.front());
  if (opt.prior_perturb_seed != 0) {
    std::mt19937_64 rng(opt.prior_perturb_seed);
    std::normal_distribution<double> n(0.0, 1.0);
    Twist2 xi;
    xi << cfg.prior_heading_std * n(rng), cfg.prior_position_std * n(rng),
        cfg.prior_position_std * n(rng);
    prior = prior * se2_exp(xi);
  }

  EstimateResult res;
  res.keyframe_times = kf.times;
  res.samples = kf.samples;
  res.invariants.reserve(kf.samples.size());
  for (const FieldSample& s : kf.samples) res.invariants.push_back(invariants(s));

  EstimationProblem problem = build_problem(kf, prior, cfg, opt);
  Solution sol = solve(problem);
  res.report_no_loops = sol.report;
  res.report = sol.report;

  if (opt.with_loops) {
    const DistanceMatrix combined = combined_distance(res.invariants);
    std::vector<LoopCandidate> cands = extract_candidates(
        combined, cfg.loop.tau, cfg.loop.min_separation, cfg.loop.window);
    if (!cands.empty()) {
      const MarginalCovariance cov(problem, sol.trajectory);
      res.loops = gate_candidates(
          cands, sol.trajectory,
          [&](int i, int j) { return cov.relative(i, j); }, cfg.loop.alpha);
      bool any = false;
      const Matrix2d psi = cfg.psi_std * cfg.psi_std * Matrix2d::Identity();
      for (const LoopCandidate& c : res.loops) {
        if (c.accepted) {
          problem.blocks.push_back(ResidualBlock::make_loop(c.i, c.j, psi));
          any = true;
        }
      }
      if (any) {
        problem.initial = sol.trajectory;  // warm start
        sol = solve(problem);
        res.report = sol.report;
      }
    }
  }

  res.trajectory.reserve(sol.trajectory.size());
  for (size_t k = 0; k < sol.trajectory.size(); ++k)
    res.trajectory.push_back({kf.times[k], sol.trajectory[k]});

  if (opt.compute_marginals) {
    const MarginalCovariance cov(problem, sol.trajectory);
    res.marginals.reserve(sol.trajectory.size());
    for (size_t k = 0; k < sol.trajectory.size(); ++k)
      res.marginals.push_back(cov.marginal(static_cast<int>(k)));
  }
  return res;
}

std::vector<TimedPose> dead_reckon_odometry(const Dataset& dataset,
                                            double keyframe_hz) {
  if (dataset.odom.empty()) throw DataError("dataset has no wheel odometry");
  const Pose2 start = dataset.truth.empty() ? Pose2::identity() : dataset.truth.front().pose;
  // integrate at the gyro rate, emit at the keyframe rate
  const double dt = 1.0 / dataset.meta.gyro_rate_hz;
  std::vector<TimedPose> out;
  out.push_back({0.0, start});
  double th = start.heading();
  Vector2d p = start.position();
  const double emit_dt = 1.0 / keyframe_hz;
  double next_emit = emit_dt;
  size_t oi = 0;
  for (const GyroSample& g : dataset.gyro) {
    while (oi + 1 < dataset.odom.size() && dataset.odom[oi].t < g.t - 1e-9) ++oi;
    const double v = dataset.odom[oi].speed;
    const double th_new = th + g.u * dt;
    p += v * dt * Vector2d(std::cos(0.5 * (th + th_new)), std::sin(0.5 * (th + th_new)));
    th = th_new;
    if (g.t >= next_emit - 1e-9) {
      out.push_back({g.t, Pose2(wrap_angle(th), p)});
      next_emit += emit_dt;
    }
  }
  return out;
}

std::vector<AblationRow> run_ablation(const Dataset& dataset,
                                      const EstimatorConfig& cfg,
                                      const EstimateOptions& base_opt) {
  if (dataset.truth.empty()) throw DataError("ablation requires ground truth");
  const double max_dt = 0.5 / cfg.keyframe_hz;

  auto evaluate = [&](EstimateOptions opt) {
    opt.compute_marginals = false;
    const EstimateResult r = run_estimator(dataset, cfg, opt);
    return compute_metrics(r.trajectory, dataset.truth, nullptr, max_dt);
  };

  std::vector<AblationRow> rows;
  const MetricsReport base = evaluate(base_opt);
  rows.push_back({"baseline", base.position_rmse, base.attitude_rmse, 0.0, 0.0});

  const std::pair<const char*, bool EstimateOptions::*> variants[] = {
      {"drop_fd", &EstimateOptions::drop_fd},
      {"drop_cd", &EstimateOptions::drop_cd},
      {"drop_slip", &EstimateOptions::drop_slip},
  };
  for (const auto& [name, member] : variants) {
    EstimateOptions opt = base_opt;
    opt.*member = true;
    const MetricsReport m = evaluate(opt);
    rows.push_back({name, m.position_rmse, m.attitude_rmse,
                    100.0 * (m.position_rmse - base.position_rmse) / base.position_rmse,
                    100.0 * (m.attitude_rmse - base.attitude_rmse) / base.attitude_rmse});
  }
  return rows;
}

}  // namespace magodom
