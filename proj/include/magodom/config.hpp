#pragma once

#include <filesystem>

#include "magodom/magnetostatics.hpp"
#include "magodom/sensors.hpp"
#include "magodom/solver.hpp"
#include "magodom/trajectory.hpp"

namespace magodom {

/// Sensor suite description (rates, noise, array geometry) plus the
/// optional wheel-odometry channel used only for the dead-reckoning
/// comparison baseline.
struct SensorConfig {
  GyroModel gyro;
  MagArrayModel mag_array;
  double odom_speed_noise_std = 0.0;  // m/s; 0 disables odom.csv
  bool with_odom = false;
  // injectable calibration disturbances, off by default
  Vector3d mag_bias = Vector3d::Zero();  // uT, common to all sensors
};

struct LoopConfig {
  double tau = 0.05;        // combined-distance threshold, dimensionless
  int min_separation = 40;  // keyframes
  int window = 10;          // non-max suppression window
  double alpha = 0.05;      // gate significance
};

struct EstimatorConfig {
  double keyframe_hz = 5.0;
  // modeled noise (weights of the least-squares blocks)
  double r_fd_std = 5.0;      // uT
  double r_cd_std = 0.5;      // uT
  double r_slip_std = 1e-4;   // m
  double psi_std = 3.5;       // m, loop closure
  double q_gyro_psd = 0.13 * 0.13;  // (rad/sqrt(s))^2
  double prior_heading_std = 1e-3;  // rad
  double prior_position_std = 1e-3; // m
  double nominal_speed = 0.0;       // m/s for the position initializer
  LoopConfig loop;
  SolverSettings solver;
};

MagWorld load_world(const std::filesystem::path& file);
TrueTrajectory load_trajectory(const std::filesystem::path& file);
SensorConfig load_sensors(const std::filesystem::path& file);
EstimatorConfig load_estimator(const std::filesystem::path& file);

}  // namespace magodom
