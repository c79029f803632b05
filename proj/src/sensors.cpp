#include "magodom/sensors.hpp"

#include <cmath>

#include "magodom/errors.hpp"

namespace magodom {

Matrix3d MagArrayModel::field_covariance() const {
  // mean of four independent sensors
  return (noise_std * noise_std / 4.0) * Matrix3d::Identity();
}

Eigen::Matrix<double, 5, 5> MagArrayModel::gradient_covariance() const {
  // Centered difference (r+ - r-)/d: variance 2 s^2/d^2 per axis.
  // Bxy averages two independent differences, halving the variance.
  // Cross terms vanish (disjoint noise components per entry).
  const double s2 = noise_std * noise_std / (baseline * baseline);
  Eigen::Matrix<double, 5, 5> R = Eigen::Matrix<double, 5, 5>::Zero();
  R.diagonal() << 2.0 * s2, s2, 2.0 * s2, 2.0 * s2, 2.0 * s2;
  return R;
}

std::vector<GyroSample> simulate_gyro(const TrueTrajectory& traj,
                                      const GyroModel& model, uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double dt = 1.0 / model.rate_hz;
  const double sigma = std::sqrt(model.noise_psd / dt);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<GyroSample> out;
  const int n = static_cast<int>(std::round(traj.duration() * model.rate_hz));
  out.reserve(n);
  for (int k = 1; k <= n; ++k) {
    const double t = k * dt;
    // sample represents the interval (t - dt, t]; the trajectory's yaw
    // rate is piecewise constant, so mid-interval evaluation is exact
    // when segment breaks align with the sample grid
    const double w = sigma > 0.0 ? sigma * noise(rng) : 0.0;
    out.push_back(GyroSample{t, traj.yaw_rate(t - dt / 2.0) - w});
  }
  return out;
}

ArrayReadings simulate_array(const MagWorld& world, const Pose3Padded& pose,
                             const MagArrayModel& model, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  ArrayReadings out;
  const auto offsets = model.offsets();
  for (int i = 0; i < 4; ++i) {
    const Vector3d r_world = pose.r + pose.C * offsets[i];
    Vector3d b = pose.C.transpose() * world.eval(r_world).B;
    if (model.noise_std > 0.0) {
      for (int a = 0; a < 3; ++a) b[a] += model.noise_std * noise(rng);
    }
    out[i] = b;
  }
  return out;
}

FieldSample recover_gradient(const ArrayReadings& readings, double baseline,
                             double t) {
  if (!(baseline > 0.0)) throw DegenerateArray("array baseline must be positive");
  const Vector3d dx = (readings[0] - readings[1]) / baseline;  // dB/dx
  const Vector3d dy = (readings[2] - readings[3]) / baseline;  // dB/dy
  FieldSample s;
  s.t = t;
  s.B = 0.25 * (readings[0] + readings[1] + readings[2] + readings[3]);
  // symmetry enforced on the xy element; z-derivatives come from the
  // curl-free condition (Bxz = dBz/dx, Byz = dBz/dy), Bzz from trace
  s.gvec << dx.x(), 0.5 * (dx.y() + dy.x()), dx.z(), dy.y(), dy.z();
  return s;
}

PreintegratedGyro preintegrate_gyro(std::span<const GyroSample> samples,
                                    const GyroModel& model) {
  if (samples.empty()) throw EmptyInterval("no gyro samples in interval");
  const double dt = 1.0 / model.rate_hz;
  PreintegratedGyro out{0.0, 0.0};
  for (const GyroSample& s : samples) {
    out.dtheta += s.u * dt;
    out.variance += model.noise_psd * dt;
  }
  return out;
}

}  // namespace magodom
