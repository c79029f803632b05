#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "magodom/config.hpp"
#include "magodom/errors.hpp"
#include "magodom/pipeline.hpp"
#include "test_helpers.hpp"

using namespace magodom;
namespace fs = std::filesystem;

namespace {

SensorConfig quiet_sensors() {
  SensorConfig s;
  s.gyro.noise_psd = 2.5e-5;
  s.gyro.rate_hz = 50.0;
  s.mag_array.baseline = 0.4;
  s.mag_array.noise_std = 0.05;
  s.mag_array.rate_hz = 25.0;
  s.with_odom = true;
  s.odom_speed_noise_std = 0.01;
  return s;
}

TrueTrajectory short_track() {
  // straight, turn in place, straight: 20 s at 25 Hz -> 501 records,
  // downsampled to 101 keyframes at 5 Hz
  return TrueTrajectory(Pose2(0.0, Vector2d(0.2, -0.1)),
                        {{8.0, 0.05, 0.0},
                         {4.0, 0.0, 0.3926990816987241},
                         {8.0, 0.05, 0.0}});
}

MagWorld gradient_world() {
  GradVec g;
  g << 15.0, 5.0, 3.0, -8.0, 4.0;
  return MagWorld(Vector3d(20, 0, 45), test::small_dipole_world().dipoles(), 0.3,
                  0.001, g);
}

fs::path fresh_dir(const char* name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("dataset save/load round-trips exactly") {
  const Dataset d = simulate_dataset(gradient_world(), short_track(), quiet_sensors(),
                                     {.seed = 7});
  const fs::path dir = fresh_dir("magodom_roundtrip");
  d.save(dir);
  const Dataset e = Dataset::load(dir);

  REQUIRE(e.gyro.size() == d.gyro.size());
  REQUIRE(e.mag.size() == d.mag.size());
  REQUIRE(e.truth.size() == d.truth.size());
  REQUIRE(e.odom.size() == d.odom.size());
  CHECK(e.meta.array_baseline == d.meta.array_baseline);
  CHECK(e.meta.gyro_rate_hz == d.meta.gyro_rate_hz);
  CHECK(e.meta.mag_rate_hz == d.meta.mag_rate_hz);
  for (size_t i = 0; i < d.gyro.size(); ++i) {
    CHECK(e.gyro[i].t == d.gyro[i].t);
    CHECK(e.gyro[i].u == d.gyro[i].u);
  }
  for (size_t i = 0; i < d.mag.size(); ++i) {
    CHECK(e.mag[i].t == d.mag[i].t);
    for (int s = 0; s < 4; ++s) CHECK(e.mag[i].readings[s] == d.mag[i].readings[s]);
  }
  for (size_t i = 0; i < d.truth.size(); ++i) {
    CHECK(e.truth[i].t == d.truth[i].t);
    CHECK(e.truth[i].pose.position() == d.truth[i].pose.position());
    // the heading passes through cos/sin/atan2, so round-trips to 1 ulp
    CHECK(e.truth[i].pose.heading() ==
          doctest::Approx(d.truth[i].pose.heading()).epsilon(1e-15));
  }
  for (size_t i = 0; i < d.odom.size(); ++i) CHECK(e.odom[i].speed == d.odom[i].speed);
}

TEST_CASE("same seed gives byte-identical dataset files") {
  const auto world = gradient_world();
  const auto traj = short_track();
  const auto sensors = quiet_sensors();
  const fs::path a = fresh_dir("magodom_det_a");
  const fs::path b = fresh_dir("magodom_det_b");
  simulate_dataset(world, traj, sensors, {.seed = 42}).save(a);
  simulate_dataset(world, traj, sensors, {.seed = 42}).save(b);
  for (const char* f : {"gyro.csv", "mag.csv", "truth.csv", "odom.csv", "meta.json"}) {
    CHECK(slurp(a / f) == slurp(b / f));
  }
  // and a different seed changes the measurements
  const fs::path c = fresh_dir("magodom_det_c");
  simulate_dataset(world, traj, sensors, {.seed = 43}).save(c);
  CHECK(slurp(a / "mag.csv") != slurp(c / "mag.csv"));
  CHECK(slurp(a / "truth.csv") == slurp(c / "truth.csv"));
}

TEST_CASE("zero-noise streams match the analytic models") {
  const auto world = gradient_world();
  const auto traj = short_track();
  const Dataset d =
      simulate_dataset(world, traj, quiet_sensors(), {.seed = 3, .zero_noise = true});

  // gyro reads the mid-interval yaw rate exactly
  const double dt = 1.0 / 50.0;
  for (const GyroSample& g : d.gyro) {
    CHECK(g.u == doctest::Approx(traj.yaw_rate(g.t - dt / 2.0)).epsilon(1e-12));
  }
  // each magnetometer reads the world field at its own position, in body axes
  const MagArrayModel model = quiet_sensors().mag_array;
  const auto offsets = model.offsets();
  for (size_t i = 0; i < d.mag.size(); i += 37) {
    const auto p3 = pad_to_3d(traj.pose(d.mag[i].t));
    for (int s = 0; s < 4; ++s) {
      const Vector3d expect = p3.C.transpose() * world.eval(p3.r + p3.C * offsets[s]).B;
      CHECK((d.mag[i].readings[s] - expect).norm() < 1e-12);
    }
  }
  // wheel odometry reads the segment speed
  for (const auto& o : d.odom) {
    CHECK(o.speed == doctest::Approx(traj.speed(o.t - dt / 2.0)).epsilon(1e-12));
  }
}

TEST_CASE("zero-noise dead reckoning stays near the truth") {
  const Dataset d = simulate_dataset(gradient_world(), short_track(), quiet_sensors(),
                                     {.seed = 3, .zero_noise = true});
  const auto dr = dead_reckon_odometry(d, 5.0);
  const auto rep = compute_metrics(dr, d.truth, nullptr, 0.1);
  // only discretization error of the 50 Hz integrator remains
  CHECK(rep.position_rmse < 1e-3);
  CHECK(rep.attitude_rmse < 1e-6);
}

TEST_CASE("end-to-end estimate on a short noisy run") {
  const Dataset d =
      simulate_dataset(gradient_world(), short_track(), quiet_sensors(), {.seed = 11});
  EstimatorConfig cfg;
  cfg.nominal_speed = 0.05;
  const EstimateResult r = run_estimator(d, cfg, {});
  REQUIRE(r.trajectory.size() == 101);
  CHECK(r.report.convergence_reason != "max_iterations");
  const auto rep = compute_metrics(r.trajectory, d.truth, nullptr, 0.1);
  CHECK(rep.position_rmse < 0.05);
  CHECK(rep.attitude_rmse < 0.02);
  REQUIRE(r.marginals.size() == 101);
  for (const auto& P : r.marginals) {
    Eigen::SelfAdjointEigenSolver<Matrix3d> es(P);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("trajectory and covariance csv round-trips") {
  std::vector<TimedPose> traj = {{0.0, Pose2(0.3, Vector2d(1.25, -0.5))},
                                 {0.2, Pose2(-0.1, Vector2d(0.1, 1e-17))}};
  const fs::path dir = fresh_dir("magodom_csv");
  fs::create_directories(dir);
  write_trajectory_csv(dir / "traj.csv", traj);
  const auto back = read_trajectory_csv(dir / "traj.csv");
  REQUIRE(back.size() == 2);
  for (size_t i = 0; i < 2; ++i) {
    CHECK(back[i].t == traj[i].t);
    CHECK(back[i].pose.position() == traj[i].pose.position());
    CHECK(back[i].pose.heading() ==
          doctest::Approx(traj[i].pose.heading()).epsilon(1e-15));
  }

  Matrix3d P;
  P << 1.0, 0.1, 0.2, 0.1, 2.0, 0.3, 0.2, 0.3, 3.0;
  write_covariance_csv(dir / "cov.csv", {0.0, 0.2}, {P, Matrix3d(2.0 * P)});
  const auto covs = read_covariance_csv(dir / "cov.csv");
  REQUIRE(covs.size() == 2);
  CHECK(covs[0] == P);
  CHECK(covs[1] == Matrix3d(2.0 * P));
}

TEST_CASE("loading the shipped config files") {
  const fs::path root = fs::path(CONFIG_DIR);
  const MagWorld world = load_world(root / "demo_world.json");
  CHECK(world.dipoles().size() == 12);
  const TrueTrajectory traj = load_trajectory(root / "demo_trajectory.json");
  CHECK(traj.duration() == doctest::Approx(120.0));
  const SensorConfig sensors = load_sensors(root / "demo_sensors.json");
  CHECK(sensors.with_odom);
  CHECK(sensors.mag_array.noise_std == 0.01);
  const EstimatorConfig est = load_estimator(root / "demo_estimator.json");
  CHECK(est.r_fd_std == 5.0);
  CHECK(est.loop.min_separation == 40);

  CHECK_THROWS_AS((void)load_world(root / "no_such_file.json"), ConfigError);
}
