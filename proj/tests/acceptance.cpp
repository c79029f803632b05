// Acceptance checks for the magnetic-odometry stack. Each check prints a
// single PASS/FAIL line with the measured quantities; the exit code is the
// number of failed checks. Run with the configuration directory as the
// only argument.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "magodom/config.hpp"
#include "magodom/pipeline.hpp"

using namespace magodom;
namespace fs = std::filesystem;

namespace {

struct Fixtures {
  MagWorld demo_world;
  TrueTrajectory demo_traj;
  SensorConfig demo_sensors;
  EstimatorConfig demo_estimator;
  EstimatorConfig consistency_estimator;
  SensorConfig ablation_sensors;
  EstimatorConfig ablation_estimator;
  MagWorld stress_world;
  TrueTrajectory stress_traj;

  explicit Fixtures(const fs::path& dir)
      : demo_world(load_world(dir / "demo_world.json")),
        demo_traj(load_trajectory(dir / "demo_trajectory.json")),
        demo_sensors(load_sensors(dir / "demo_sensors.json")),
        demo_estimator(load_estimator(dir / "demo_estimator.json")),
        consistency_estimator(load_estimator(dir / "consistency_estimator.json")),
        ablation_sensors(load_sensors(dir / "ablation_sensors.json")),
        ablation_estimator(load_estimator(dir / "ablation_estimator.json")),
        stress_world(load_world(dir / "stress_world.json")),
        stress_traj(load_trajectory(dir / "stress_trajectory.json")) {}
};

// The demo trajectory closes a rectangular survey loop after 100 s (500
// keyframes at 5 Hz) and then re-traces the first 20 s of the opening leg
// in the same direction. True revisit pairs are therefore (k, k + 500) for
// keyframes k in [0, 100].
constexpr int kLapKeyframes = 500;
constexpr int kOverlapKeyframes = 100;

Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

std::vector<Vector3d> sample_points(const MagWorld& world, int count,
                                    std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ux(-0.5, 4.5), uy(-1.0, 1.4),
      uz(-0.1, 0.1);
  std::vector<Vector3d> pts;
  while (static_cast<int>(pts.size()) < count) {
    const Vector3d r(ux(rng), uy(rng), uz(rng));
    bool clear = true;
    for (const Dipole& d : world.dipoles()) {
      if ((r - d.position).norm() < world.exclusion_radius() + 0.05) clear = false;
    }
    if (clear) pts.push_back(r);
  }
  return pts;
}

double rmse_vs_truth(const std::vector<TimedPose>& est, const Dataset& d) {
  return compute_metrics(est, d.truth, nullptr, 0.11).position_rmse;
}

// ---------------------------------------------------------------------------

bool check_invariant_rotation(const Fixtures& fx, std::string& detail) {
  std::mt19937_64 rng(101);
  const auto pts = sample_points(fx.demo_world, 10, rng);
  double worst = 0.0;
  for (const Vector3d& r : pts) {
    const auto f = fx.demo_world.eval(r);
    FieldSample base;
    base.B = f.B;
    base.gvec = vdash(f.G);
    const InvariantTriple ref = invariants(base);
    for (int k = 0; k < 100; ++k) {
      const Eigen::Matrix3d C = random_rotation(rng);
      FieldSample rot;
      rot.B = C.transpose() * f.B;
      rot.gvec = vdash(C.transpose() * f.G * C);
      const InvariantTriple got = invariants(rot);
      worst = std::max(worst, std::abs(got.I1 - ref.I1) / std::max(1.0, std::abs(ref.I1)));
      worst = std::max(worst, std::abs(got.I2 - ref.I2) / std::max(1.0, std::abs(ref.I2)));
      // det scales like |G|^3; relative tolerance against that scale
      worst = std::max(worst,
                       std::abs(got.I3 - ref.I3) / std::max(1.0, ref.I2 * ref.I2 * ref.I2));
    }
  }
  detail = "max relative deviation " + std::to_string(worst) + " over 1000 rotations";
  return worst < 1e-12;
}

bool check_maxwell_structure(const Fixtures& fx, std::string& detail) {
  std::mt19937_64 rng(102);
  const auto pts = sample_points(fx.demo_world, 1000, rng);
  double worst = 0.0;
  for (const Vector3d& r : pts) {
    const Matrix3d G = fx.demo_world.eval(r).G;
    worst = std::max(worst, (G - G.transpose()).cwiseAbs().maxCoeff());
    worst = std::max(worst, std::abs(G.trace()));
  }
  detail = "max symmetry/trace violation " + std::to_string(worst) + " uT/m";
  return worst < 1e-10;
}

bool check_gradiometry_convergence(const Fixtures& fx, std::string& detail) {
  const double baselines[] = {0.04, 0.08, 0.16};
  std::vector<double> log_d, log_e;
  for (double d : baselines) {
    MagArrayModel model;
    model.baseline = d;
    model.noise_std = 0.0;
    std::mt19937_64 rng(103);  // unused draws with zero noise
    double sq = 0.0;
    int n = 0;
    for (double t = 0.5; t < fx.demo_traj.duration(); t += 2.0) {
      const auto p3 = pad_to_3d(fx.demo_traj.pose(t));
      const ArrayReadings readings = simulate_array(fx.demo_world, p3, model, rng);
      const FieldSample rec = recover_gradient(readings, d);
      const Matrix3d G_true =
          p3.C.transpose() * fx.demo_world.eval(p3.r).G * p3.C;
      sq += (unvdash(rec.gvec) - G_true).squaredNorm();
      ++n;
    }
    log_d.push_back(std::log(d));
    log_e.push_back(std::log(std::sqrt(sq / n)));
  }
  // least-squares slope through the three (log d, log err) points
  const double mx = (log_d[0] + log_d[1] + log_d[2]) / 3.0;
  const double my = (log_e[0] + log_e[1] + log_e[2]) / 3.0;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < 3; ++i) {
    num += (log_d[i] - mx) * (log_e[i] - my);
    den += (log_d[i] - mx) * (log_d[i] - mx);
  }
  const double slope = num / den;
  detail = "log-log slope " + std::to_string(slope);
  return std::abs(slope - 2.0) < 0.2;
}

bool check_residual_jacobians(const Fixtures& fx, std::string& detail) {
  std::mt19937_64 rng(104);
  std::uniform_real_distribution<double> uh(-1.2, 1.2), up(-0.5, 0.5);
  const auto pts = sample_points(fx.demo_world, 100, rng);
  auto body_sample = [&](const Pose2& pose) {
    const auto p3 = pad_to_3d(pose);
    const auto f = fx.demo_world.eval(p3.r);
    FieldSample s;
    s.B = p3.C.transpose() * f.B;
    s.gvec = vdash(p3.C.transpose() * f.G * p3.C);
    return s;
  };

  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Pose2> poses;
    for (int k = 0; k < 3; ++k) {
      poses.emplace_back(uh(rng),
                         pts[(trial * 3 + k) % pts.size()].head<2>() +
                             Vector2d(0.02 * up(rng), 0.02 * up(rng)));
    }
    const FieldSample s0 = body_sample(poses[0]);
    const FieldSample s1 = body_sample(poses[1]);
    const FieldSample s2 = body_sample(poses[2]);

    std::vector<ResidualBlock> blocks = {
        ResidualBlock::make_prior(0, Pose2(uh(rng), Vector2d(up(rng), up(rng))),
                                  Matrix3d::Identity()),
        ResidualBlock::make_gyro(0, 1, 0.3 * uh(rng), 1e-4),
        ResidualBlock::make_fd_mag(0, 1, s0.B, s1.B, s1.gvec, Matrix3d::Identity()),
        ResidualBlock::make_cd_mag(0, 1, 2, s0.B, s2.B, s1.gvec,
                                   Matrix3d::Identity()),
        ResidualBlock::make_slip(0, 1, 1.0),
        ResidualBlock::make_loop(0, 2, Matrix2d::Identity()),
    };
    for (const ResidualBlock& b : blocks) {
      Eigen::VectorXd r0;
      std::vector<ResidualBlock::JacobianBlock> J;
      b.evaluate(poses, r0, &J);
      const double h = 1e-6;
      for (int p = 0; p < b.n_poses; ++p) {
        const int pose_idx = b.idx[p];
        for (int a = 0; a < 3; ++a) {
          Twist2 step = Twist2::Zero();
          step[a] = h;
          std::vector<Pose2> plus = poses, minus = poses;
          plus[pose_idx] = poses[pose_idx] * se2_exp(step);
          minus[pose_idx] = poses[pose_idx] * se2_exp(Twist2(-step));
          Eigen::VectorXd rp, rm;
          b.evaluate(plus, rp, nullptr);
          b.evaluate(minus, rm, nullptr);
          const Eigen::VectorXd fd = (rp - rm) / (2.0 * h);
          const double scale = std::max(1.0, fd.norm());
          worst = std::max(worst, (fd - J[p].col(a)).norm() / scale);
        }
      }
    }
  }
  detail = "max relative Jacobian error " + std::to_string(worst);
  return worst < 1e-6;
}

bool check_oracle_recovery(const Fixtures& fx, std::string& detail) {
  const Dataset d = simulate_dataset(fx.demo_world, fx.demo_traj, fx.demo_sensors,
                                     {.seed = 1, .zero_noise = true});
  EstimateOptions opt;
  opt.compute_marginals = false;
  const EstimateResult r = run_estimator(d, fx.demo_estimator, opt);
  const double rmse = rmse_vs_truth(r.trajectory, d);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "K=%zu, position rmse %.3e m, final cost %.3e",
                r.trajectory.size(), rmse, r.report.final_cost);
  detail = buf;
  return rmse < 1e-3 && r.report.final_cost < 1e-8;
}

bool check_dead_reckoning_improvement(const Fixtures& fx, std::string& detail) {
  double sum_mag = 0.0, sum_odom = 0.0;
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    const Dataset d =
        simulate_dataset(fx.demo_world, fx.demo_traj, fx.demo_sensors, {.seed = seed});
    EstimateOptions opt;
    opt.with_loops = true;
    opt.compute_marginals = false;
    sum_mag += rmse_vs_truth(run_estimator(d, fx.demo_estimator, opt).trajectory, d);
    sum_odom += rmse_vs_truth(dead_reckon_odometry(d, fx.demo_estimator.keyframe_hz), d);
  }
  const double improvement = 100.0 * (1.0 - sum_mag / sum_odom);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "mean rmse %.4f m vs wheel-odometry %.4f m (%.1f%% lower, 10 seeds)",
                sum_mag / 10.0, sum_odom / 10.0, improvement);
  detail = buf;
  return sum_mag <= 0.5 * sum_odom;
}

bool check_ablation_ordering(const Fixtures& fx, std::string& detail) {
  double base = 0.0, fd = 0.0, cd = 0.0, slip = 0.0;
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    const Dataset d = simulate_dataset(fx.demo_world, fx.demo_traj,
                                       fx.ablation_sensors, {.seed = seed});
    EstimateOptions opt;
    opt.compute_marginals = false;
    const auto rows = run_ablation(d, fx.ablation_estimator, opt);
    base += rows[0].position_rmse;
    fd += rows[1].position_rmse;
    cd += rows[2].position_rmse;
    slip += rows[3].position_rmse;
  }
  const double d_fd = 100.0 * (fd - base) / base;
  const double d_cd = 100.0 * (cd - base) / base;
  const double d_slip = 100.0 * (slip - base) / base;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "drop-fd %+.1f%%, drop-cd %+.1f%%, drop-slip %+.1f%% (10 seeds)",
                d_fd, d_cd, d_slip);
  detail = buf;
  return d_fd >= 20.0 && d_slip >= 20.0 && std::abs(d_cd) < 5.0;
}

bool check_loop_detection(const Fixtures& fx, std::string& detail) {
  EstimateOptions opt;
  opt.with_loops = true;
  opt.compute_marginals = false;

  int revisit_hits = 0;
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    const Dataset d =
        simulate_dataset(fx.demo_world, fx.demo_traj, fx.demo_sensors, {.seed = seed});
    const EstimateResult r = run_estimator(d, fx.demo_estimator, opt);
    for (const LoopCandidate& c : r.loops) {
      // within +/- 2 keyframes of some true revisit pair (k, k + lap)
      const bool near_truth = std::abs(c.j - c.i - kLapKeyframes) <= 2 &&
                              c.i >= -2 && c.i <= kOverlapKeyframes + 2;
      if (c.accepted && near_truth) {
        ++revisit_hits;
        break;
      }
    }
  }

  int false_accepts = 0, stress_accepts = 0;
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    const Dataset d = simulate_dataset(fx.stress_world, fx.stress_traj,
                                       fx.demo_sensors, {.seed = seed});
    const EstimateResult r = run_estimator(d, fx.demo_estimator, opt);
    for (const LoopCandidate& c : r.loops) {
      if (!c.accepted) continue;
      ++stress_accepts;
      const Vector2d pi = d.truth[c.i * 5].pose.position();  // 25 Hz truth, 5 Hz keyframes
      const Vector2d pj = d.truth[c.j * 5].pose.position();
      if ((pi - pj).norm() > 2.0) ++false_accepts;
    }
  }
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "lap revisit (k, k+%d) found in %d/10 seeds; stress world: %d accepts, "
                "%d beyond 2 m",
                kLapKeyframes, revisit_hits, stress_accepts, false_accepts);
  detail = buf;
  return revisit_hits == 10 && false_accepts == 0;
}

bool check_consistency(const Fixtures& fx, std::string& detail) {
  double fraction_sum = 0.0;
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    const Dataset d =
        simulate_dataset(fx.demo_world, fx.demo_traj, fx.demo_sensors, {.seed = seed});
    EstimateOptions opt;
    opt.prior_perturb_seed = 1000 + seed;
    const EstimateResult r = run_estimator(d, fx.consistency_estimator, opt);
    const auto rep = compute_metrics(r.trajectory, d.truth, &r.marginals, 0.11);
    fraction_sum += rep.fraction_within_bounds;
  }
  const double mean_fraction = fraction_sum / 20.0;
  char buf[120];
  std::snprintf(buf, sizeof(buf), "mean fraction of NEES within bounds %.3f (20 seeds)",
                mean_fraction);
  detail = buf;
  return mean_fraction >= 0.9;
}

bool check_detection_attitude_invariance(const Fixtures& fx, std::string& detail) {
  EstimateOptions opt;
  opt.with_loops = true;
  opt.compute_marginals = false;

  auto accepted_set = [&](const MagWorld& world, const TrueTrajectory& traj) {
    const Dataset d = simulate_dataset(world, traj, fx.demo_sensors, {.seed = 5});
    const EstimateResult r = run_estimator(d, fx.demo_estimator, opt);
    std::set<std::pair<int, int>> out;
    for (const LoopCandidate& c : r.loops)
      if (c.accepted) out.insert({c.i, c.j});
    return out;
  };

  const auto base = accepted_set(fx.demo_world, fx.demo_traj);

  std::mt19937_64 rng(110);
  std::uniform_real_distribution<double> u(-M_PI, M_PI);
  const double phi = u(rng);
  Eigen::Matrix3d Rz = Eigen::Matrix3d::Identity();
  Rz(0, 0) = std::cos(phi);
  Rz(0, 1) = -std::sin(phi);
  Rz(1, 0) = std::sin(phi);
  Rz(1, 1) = std::cos(phi);

  std::vector<Dipole> dipoles;
  for (const Dipole& dp : fx.demo_world.dipoles())
    dipoles.push_back({Rz * dp.position, Rz * dp.moment});
  const MagWorld rotated_world(
      Rz * fx.demo_world.background(), std::move(dipoles),
      fx.demo_world.exclusion_radius(), fx.demo_world.dipole_scale(),
      vdash(Rz * fx.demo_world.background_gradient() * Rz.transpose()));

  const Pose2 start0 = fx.demo_traj.pose(0.0);
  const Pose2 start(wrap_angle(start0.heading() + phi),
                    Rz.topLeftCorner<2, 2>() * start0.position());
  // same segment schedule as the demo trajectory, rotated start pose
  const std::vector<TrajectorySegment> segs = {
      {40.0, 0.1, 0.0}, {3.0, 0.0, 0.5235987755982988},
      {4.0, 0.1, 0.0},  {3.0, 0.0, 0.5235987755982988},
      {40.0, 0.1, 0.0}, {3.0, 0.0, 0.5235987755982988},
      {4.0, 0.1, 0.0},  {3.0, 0.0, 0.5235987755982988},
      {20.0, 0.1, 0.0}};
  const TrueTrajectory rotated_traj(start, segs);

  const auto rotated = accepted_set(rotated_world, rotated_traj);
  char buf[120];
  std::snprintf(buf, sizeof(buf),
                "rotation %.3f rad: %zu accepted loops vs %zu, sets %s", phi,
                rotated.size(), base.size(), rotated == base ? "identical" : "differ");
  detail = buf;
  return !base.empty() && rotated == base;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s <config-dir>\n", argv[0]);
    return 64;
  }
  const Fixtures fx{fs::path(argv[1])};

  using Check = std::function<bool(const Fixtures&, std::string&)>;
  const std::pair<const char*, Check> checks[] = {
      {"invariants unchanged under rotation", check_invariant_rotation},
      {"simulated gradients symmetric traceless", check_maxwell_structure},
      {"array gradient error is second order in baseline", check_gradiometry_convergence},
      {"analytic Jacobians match finite differences", check_residual_jacobians},
      {"noise-free recovery of the true trajectory", check_oracle_recovery},
      {"magnetic odometry beats wheel dead reckoning", check_dead_reckoning_improvement},
      {"ablation ordering (fd, cd, slip)", check_ablation_ordering},
      {"loop detection and gating", check_loop_detection},
      {"NEES consistency", check_consistency},
      {"detection invariant to world attitude", check_detection_attitude_invariance},
  };

  int failures = 0;
  int index = 0;
  for (const auto& [name, fn] : checks) {
    ++index;
    std::string detail;
    bool ok = false;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      ok = fn(fx, detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %2d. %s — %s (%.1f s)\n", ok ? "PASS" : "FAIL", index, name,
                detail.c_str(), secs);
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  return failures;
}
