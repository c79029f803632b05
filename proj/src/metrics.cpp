#include "magodom/metrics.hpp"

#include <cmath>

#include "magodom/errors.hpp"
#include "magodom/loopclosure.hpp"

namespace magodom {

std::vector<TimedPose> align_first_pose(const std::vector<TimedPose>& estimate,
                                        const std::vector<TimedPose>& truth) {
  if (estimate.empty() || truth.empty()) return estimate;
  const Pose2 A = truth.front().pose * estimate.front().pose.inverse();
  std::vector<TimedPose> out;
  out.reserve(estimate.size());
  for (const TimedPose& p : estimate) out.push_back({p.t, A * p.pose});
  return out;
}

MetricsReport compute_metrics(const std::vector<TimedPose>& estimate,
                              const std::vector<TimedPose>& truth,
                              const std::vector<Eigen::Matrix3d>* covariances,
                              double max_dt, double significance) {
  const std::vector<TimedPose> aligned = align_first_pose(estimate, truth);
  MetricsReport rep;
  double pos_sq = 0.0;
  double att_sq = 0.0;
  int n = 0;
  size_t j = 0;
  for (size_t i = 0; i < aligned.size(); ++i) {
    // truth timestamps are sorted; advance to the nearest
    while (j + 1 < truth.size() &&
           std::abs(truth[j + 1].t - aligned[i].t) <= std::abs(truth[j].t - aligned[i].t)) {
      ++j;
    }
    if (std::abs(truth[j].t - aligned[i].t) > max_dt) continue;
    const Pose2& gt = truth[j].pose;
    const Pose2& est = aligned[i].pose;
    pos_sq += (est.position() - gt.position()).squaredNorm();
    const double dth = wrap_angle(est.heading() - gt.heading());
    att_sq += dth * dth;
    ++n;
    if (covariances) {
      const Twist2 e = se2_log(est.inverse() * gt);
      const Eigen::Matrix3d& P = (*covariances)[i];
      rep.nees.push_back(e.dot(P.ldlt().solve(e)));
    }
  }
  if (n == 0) throw NoOverlappingTimestamps("no estimate/truth timestamp pairs within tolerance");
  rep.associated = n;
  rep.position_rmse = std::sqrt(pos_sq / n);
  rep.attitude_rmse = std::sqrt(att_sq / n);
  if (covariances) {
    rep.nees_lower = chi_square_quantile(significance / 2.0, 3);
    rep.nees_upper = chi_square_quantile(1.0 - significance / 2.0, 3);
    int within = 0;
    for (double v : rep.nees) {
      if (v >= rep.nees_lower && v <= rep.nees_upper) ++within;
    }
    rep.fraction_within_bounds =
        rep.nees.empty() ? 1.0 : static_cast<double>(within) / rep.nees.size();
  }
  return rep;
}

}  // namespace magodom
