#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "magodom/geometry.hpp"
#include "magodom/magnetostatics.hpp"

namespace magodom {

struct DistanceMatrix {
  Eigen::MatrixXd d;  // K x K, symmetric, zero diagonal
  std::string label;  // "I1" | "I2" | "I3" | "combined"
};

struct LoopCandidate {
  int i;                 // earlier keyframe
  int j;                 // later keyframe, j - i >= min separation
  double score;          // combined distance at (i, j)
  double gate_statistic = 0.0;  // squared Mahalanobis distance
  bool accepted = false;
};

/// Pairwise absolute differences of one invariant stream.
DistanceMatrix distance_matrix(const std::vector<double>& stream,
                               const std::string& label);

/// Sum of the three per-invariant matrices, each normalized by the max
/// absolute value of its stream. A stream with zero max contributes
/// nothing; throws AllInvariantsConstant when all three are flat zero.
DistanceMatrix combined_distance(const std::vector<InvariantTriple>& stream);

/// Thresholded local minima of the combined matrix, upper triangle only.
/// A pair qualifies if D(i,j) < tau, j - i >= min_separation, and D(i,j)
/// is the minimum within a window x window neighborhood (non-max
/// suppression collapses adjacent detections of the same revisit).
std::vector<LoopCandidate> extract_candidates(const DistanceMatrix& combined,
                                              double tau, int min_separation,
                                              int window);

/// Chi-square significance gate on the SE(2) "distance" between the two
/// solved poses. d = 3 degrees of freedom; significance alpha keeps the
/// (1 - alpha) quantile as threshold. Candidates whose relative
/// covariance is not invertible are rejected.
std::vector<LoopCandidate> gate_candidates(
    const std::vector<LoopCandidate>& candidates,
    const std::vector<Pose2>& trajectory,
    const std::function<Eigen::Matrix3d(int, int)>& relative_covariance,
    double alpha = 0.05);

/// Upper quantile of the chi-square distribution, used for the gate and
/// the NEES bounds.
double chi_square_quantile(double p, int dof);

}  // namespace magodom
