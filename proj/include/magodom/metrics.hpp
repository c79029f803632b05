#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "magodom/geometry.hpp"

namespace magodom {

struct TimedPose {
  double t;
  Pose2 pose;
};

struct MetricsReport {
  double position_rmse = 0.0;  // m
  double attitude_rmse = 0.0;  // rad
  std::vector<double> nees;    // per associated timestep
  double nees_lower = 0.0;     // chi-square bounds at the 0.05 significance
  double nees_upper = 0.0;
  double fraction_within_bounds = 1.0;
  int associated = 0;
};

/// Rigidly moves the estimate so its first pose coincides with the first
/// ground-truth pose (no scaling).
std::vector<TimedPose> align_first_pose(const std::vector<TimedPose>& estimate,
                                        const std::vector<TimedPose>& truth);

/// RMSE and NEES against ground truth. Timestamps are associated
/// nearest-neighbor within max_dt; throws NoOverlappingTimestamps when
/// nothing associates. Covariances, when supplied, must be the marginal
/// pose covariances of the (aligned) estimate in estimate order.
MetricsReport compute_metrics(
    const std::vector<TimedPose>& estimate, const std::vector<TimedPose>& truth,
    const std::vector<Eigen::Matrix3d>* covariances, double max_dt,
    double significance = 0.05);

}  // namespace magodom
