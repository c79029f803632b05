#include "magodom/trajectory.hpp"

#include <cmath>

namespace magodom {

namespace {

Pose2 advance(const Pose2& start, const TrajectorySegment& seg, double tau) {
  const double th0 = start.heading();
  const double th = th0 + seg.yaw_rate * tau;
  Vector2d p = start.position();
  if (std::abs(seg.yaw_rate) < 1e-12) {
    p += seg.speed * tau * Vector2d(std::cos(th0), std::sin(th0));
  } else {
    const double k = seg.speed / seg.yaw_rate;
    p += k * Vector2d(std::sin(th) - std::sin(th0), std::cos(th0) - std::cos(th));
  }
  return Pose2(th, p);
}

}  // namespace

TrueTrajectory::TrueTrajectory(const Pose2& start,
                               std::vector<TrajectorySegment> segments) {
  Pose2 cur = start;
  double t = 0.0;
  nodes_.reserve(segments.size());
  for (const TrajectorySegment& seg : segments) {
    nodes_.push_back(Node{t, cur, seg});
    cur = advance(cur, seg, seg.duration);
    t += seg.duration;
  }
  end_pose_ = cur;
  total_duration_ = t;
}

Pose2 TrueTrajectory::pose(double t) const {
  if (t <= 0.0 || nodes_.empty()) return nodes_.empty() ? end_pose_ : nodes_.front().pose_start;
  if (t >= total_duration_) return end_pose_;
  // linear scan; trajectories have few segments
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    if (t >= it->t_start) return advance(it->pose_start, it->seg, t - it->t_start);
  }
  return nodes_.front().pose_start;
}

double TrueTrajectory::yaw_rate(double t) const {
  if (nodes_.empty()) return 0.0;
  if (t >= total_duration_) return nodes_.back().seg.yaw_rate;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    if (t >= it->t_start) return it->seg.yaw_rate;
  }
  return nodes_.front().seg.yaw_rate;
}

double TrueTrajectory::speed(double t) const {
  if (nodes_.empty()) return 0.0;
  if (t >= total_duration_) return nodes_.back().seg.speed;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    if (t >= it->t_start) return it->seg.speed;
  }
  return nodes_.front().seg.speed;
}

}  // namespace magodom
