#include "magodom/loopclosure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/chi_squared.hpp>

#include "magodom/errors.hpp"

namespace magodom {

DistanceMatrix distance_matrix(const std::vector<double>& stream,
                               const std::string& label) {
  const int k = static_cast<int>(stream.size());
  DistanceMatrix out;
  out.label = label;
  out.d.setZero(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      const double d = std::abs(stream[i] - stream[j]);
      out.d(i, j) = d;
      out.d(j, i) = d;
    }
  }
  return out;
}

DistanceMatrix combined_distance(const std::vector<InvariantTriple>& stream) {
  const int k = static_cast<int>(stream.size());
  std::vector<double> s1(k), s2(k), s3(k);
  for (int i = 0; i < k; ++i) {
    s1[i] = stream[i].I1;
    s2[i] = stream[i].I2;
    s3[i] = stream[i].I3;
  }
  DistanceMatrix out;
  out.label = "combined";
  out.d.setZero(k, k);
  bool any = false;
  for (const auto* s : {&s1, &s2, &s3}) {
    double mx = 0.0;
    for (double v : *s) mx = std::max(mx, std::abs(v));
    if (mx == 0.0) continue;
    any = true;
    const std::string lbl;
    const DistanceMatrix d = distance_matrix(*s, lbl);
    out.d += d.d / mx;
  }
  if (!any) throw AllInvariantsConstant("all invariant streams are identically zero");
  return out;
}

std::vector<LoopCandidate> extract_candidates(const DistanceMatrix& combined,
                                              double tau, int min_separation,
                                              int window) {
  const int k = static_cast<int>(combined.d.rows());
  std::vector<LoopCandidate> out;
  for (int i = 0; i < k; ++i) {
    for (int j = i + min_separation; j < k; ++j) {
      const double v = combined.d(i, j);
      if (!(v < tau)) continue;
      // local minimum within the suppression window (ties resolved
      // toward the lexicographically smallest index pair)
      bool is_min = true;
      for (int a = std::max(0, i - window); is_min && a <= std::min(k - 1, i + window); ++a) {
        for (int b = std::max(0, j - window); b <= std::min(k - 1, j + window); ++b) {
          if (a == i && b == j) continue;
          if (b - a < min_separation || a >= b) continue;
          const double w = combined.d(a, b);
          if (w < v || (w == v && (a < i || (a == i && b < j)))) {
            is_min = false;
            break;
          }
        }
      }
      if (is_min) out.push_back(LoopCandidate{i, j, v});
    }
  }
  return out;
}

std::vector<LoopCandidate> gate_candidates(
    const std::vector<LoopCandidate>& candidates,
    const std::vector<Pose2>& trajectory,
    const std::function<Eigen::Matrix3d(int, int)>& relative_covariance,
    double alpha) {
  const double threshold = chi_square_quantile(1.0 - alpha, 3);
  std::vector<LoopCandidate> out;
  out.reserve(candidates.size());
  for (LoopCandidate c : candidates) {
    const Twist2 dxi = se2_log(trajectory[c.i].inverse() * trajectory[c.j]);
    const Eigen::Matrix3d sigma = relative_covariance(c.i, c.j);
    const Eigen::LDLT<Eigen::Matrix3d> ldlt(sigma);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().minCoeff() <= 0.0) {
      c.accepted = false;
      c.gate_statistic = std::numeric_limits<double>::infinity();
      out.push_back(c);
      continue;
    }
    c.gate_statistic = dxi.dot(ldlt.solve(dxi));
    c.accepted = c.gate_statistic <= threshold;
    out.push_back(c);
  }
  return out;
}

double chi_square_quantile(double p, int dof) {
  boost::math::chi_squared dist(dof);
  return boost::math::quantile(dist, p);
}

}  // namespace magodom
