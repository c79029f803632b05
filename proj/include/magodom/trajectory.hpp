#pragma once

#include <vector>

#include "magodom/geometry.hpp"

namespace magodom {

/// Constant-twist trajectory piece: forward speed along body-x plus a yaw
/// rate, held for a duration. Integrates to a straight line or a circular
/// arc in closed form.
struct TrajectorySegment {
  double duration;  // s
  double speed;     // m/s, body-x
  double yaw_rate;  // rad/s
};

/// Piecewise-unicycle ground-truth trajectory. Pose queries are exact
/// (closed-form arcs), so simulated sensors see no integration error.
class TrueTrajectory {
 public:
  TrueTrajectory(const Pose2& start, std::vector<TrajectorySegment> segments);

  double duration() const { return total_duration_; }

  /// Pose at time t, clamped to [0, duration].
  Pose2 pose(double t) const;

  /// Yaw rate of the active segment (right-continuous at breakpoints).
  double yaw_rate(double t) const;

  /// Forward speed of the active segment.
  double speed(double t) const;

 private:
  struct Node {
    double t_start;
    Pose2 pose_start;
    TrajectorySegment seg;
  };
  std::vector<Node> nodes_;
  Pose2 end_pose_;
  double total_duration_ = 0.0;
};

}  // namespace magodom
