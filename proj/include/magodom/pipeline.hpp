#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "magodom/config.hpp"
#include "magodom/dataset.hpp"
#include "magodom/loopclosure.hpp"
#include "magodom/metrics.hpp"
#include "magodom/solver.hpp"

namespace magodom {

struct SimulateOptions {
  uint64_t seed = 1;
  bool zero_noise = false;
};

/// Simulates the full sensor suite along the trajectory. Deterministic
/// for a given seed (fixed draw order per stream).
Dataset simulate_dataset(const MagWorld& world, const TrueTrajectory& traj,
                         const SensorConfig& sensors, const SimulateOptions& opt);

struct EstimateOptions {
  bool with_loops = false;
  bool drop_fd = false;
  bool drop_cd = false;
  bool drop_slip = false;
  // when nonzero, the prior mean is perturbed by a draw from P0 (used by
  // consistency studies so the prior error is itself distributed as modeled)
  uint64_t prior_perturb_seed = 0;
  bool compute_marginals = true;
};

struct EstimateResult {
  std::vector<double> keyframe_times;
  std::vector<TimedPose> trajectory;
  std::vector<FieldSample> samples;
  std::vector<InvariantTriple> invariants;
  SolveReport report;              // final solve
  SolveReport report_no_loops;     // first pass (equals report when no loops)
  std::vector<LoopCandidate> loops;  // all candidates, annotated by the gate
  std::vector<Eigen::Matrix3d> marginals;  // per keyframe, final problem
};

/// Keyframing, preintegration, problem construction, two-pass solve with
/// loop detection and gating. The dataset must contain mag and gyro
/// streams; ground truth is used only for the prior mean (world-frame
/// anchoring) when present.
EstimateResult run_estimator(const Dataset& dataset, const EstimatorConfig& config,
                             const EstimateOptions& opt);

/// Wheel-odometry + gyro dead reckoning, the comparison baseline. Uses
/// the same anchoring convention as run_estimator (first truth pose when
/// available). Requires odom.csv; throws DataError otherwise.
std::vector<TimedPose> dead_reckon_odometry(const Dataset& dataset,
                                            double keyframe_hz);

struct AblationRow {
  std::string name;
  double position_rmse;
  double attitude_rmse;
  double position_delta_pct;  // vs baseline
  double attitude_delta_pct;
};

/// Baseline plus drop-fd / drop-cd / drop-slip variants, evaluated
/// against the dataset's ground truth.
std::vector<AblationRow> run_ablation(const Dataset& dataset,
                                      const EstimatorConfig& config,
                                      const EstimateOptions& base_opt);

}  // namespace magodom
