#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "magodom/geometry.hpp"
#include "magodom/magnetostatics.hpp"
#include "magodom/trajectory.hpp"

namespace magodom {

struct GyroSample {
  double t;  // s
  double u;  // rad/s
};

/// Scalar rate gyro, white-noise model. noise_psd is the continuous-time
/// variance density Q in (rad/sqrt(s))^2; the discrete sample noise
/// variance is Q/dt.
struct GyroModel {
  double noise_psd = 0.0;  // (rad/sqrt(s))^2
  double rate_hz = 50.0;
};

/// Cross-shaped array of four magnetometers at (+-d/2, 0, 0) and
/// (0, +-d/2, 0) in the body frame.
struct MagArrayModel {
  double baseline = 0.4;   // m
  double noise_std = 0.0;  // uT, per axis per sensor
  double rate_hz = 25.0;

  std::array<Vector3d, 4> offsets() const {
    const double h = baseline / 2.0;
    return {Vector3d(h, 0, 0), Vector3d(-h, 0, 0), Vector3d(0, h, 0),
            Vector3d(0, -h, 0)};
  }

  /// Covariance of the recovered field vector (mean of 4 sensors).
  Matrix3d field_covariance() const;

  /// Covariance of the recovered 5-element gradient, propagated through
  /// the linear finite-difference map; scales as 1/d^2.
  Eigen::Matrix<double, 5, 5> gradient_covariance() const;
};

using ArrayReadings = std::array<Vector3d, 4>;

/// Simulated gyro stream over the whole trajectory at the model rate.
/// Deterministic for a given seed.
std::vector<GyroSample> simulate_gyro(const TrueTrajectory& traj,
                                      const GyroModel& model, uint64_t seed);

/// One array snapshot: each sensor reads the world field at its own
/// position, rotated into the body frame, plus iid noise per axis.
ArrayReadings simulate_array(const MagWorld& world, const Pose3Padded& pose,
                             const MagArrayModel& model, std::mt19937_64& rng);

/// Recovers the collocated field and 5-element gradient from the four
/// readings: mean for B, centered differences for the planar derivatives,
/// curl/divergence constraints for the rest.
FieldSample recover_gradient(const ArrayReadings& readings, double baseline,
                             double t = 0.0);

struct PreintegratedGyro {
  double dtheta;    // rad
  double variance;  // rad^2
};

/// Sums gyro increments over samples in (t0, t1]. Each sample integrates
/// over its own preceding interval. Throws EmptyInterval if no samples.
PreintegratedGyro preintegrate_gyro(std::span<const GyroSample> samples,
                                    const GyroModel& model);

}  // namespace magodom
