// Command-line driver for the magnetic-odometry pipeline: dataset
// simulation, batch estimation with optional loop closures, loop-closure
// inspection, metrics, and the ablation study.
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 solver
// error (anything else comes from argument parsing).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "magodom/config.hpp"
#include "magodom/errors.hpp"
#include "magodom/pipeline.hpp"

using namespace magodom;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Relative config paths that don't resolve from the working directory are
// looked up in $MAGODOM_CONFIG_DIR when it is set.
fs::path resolve_config(const std::string& given) {
  fs::path p(given);
  if (fs::exists(p) || p.is_absolute()) return p;
  if (const char* dir = std::getenv("MAGODOM_CONFIG_DIR")) {
    const fs::path alt = fs::path(dir) / p;
    if (fs::exists(alt)) return alt;
  }
  return p;
}

void write_report_json(const fs::path& file, const SolveReport& rep) {
  json j;
  j["iterations"] = rep.iterations;
  j["initial_cost"] = rep.initial_cost;
  j["final_cost"] = rep.final_cost;
  j["convergence_reason"] = rep.convergence_reason;
  j["cost_trace"] = rep.cost_trace;
  std::ofstream out(file);
  out << j.dump(2) << '\n';
}

void write_loops_csv(const fs::path& file, const std::vector<LoopCandidate>& loops) {
  std::ofstream out(file);
  out << "i,j,score,gate_statistic,accepted\n";
  for (const LoopCandidate& c : loops) {
    out << c.i << ',' << c.j << ',' << format_double(c.score) << ','
        << format_double(c.gate_statistic) << ',' << (c.accepted ? 1 : 0) << '\n';
  }
}

void write_invariants_csv(const fs::path& file, const std::vector<double>& times,
                          const std::vector<InvariantTriple>& inv) {
  std::ofstream out(file);
  out << "t,I1,I2,I3\n";
  for (size_t k = 0; k < inv.size(); ++k) {
    out << format_double(times[k]) << ',' << format_double(inv[k].I1) << ','
        << format_double(inv[k].I2) << ',' << format_double(inv[k].I3) << '\n';
  }
}

std::vector<double> times_of(const std::vector<TimedPose>& traj) {
  std::vector<double> t;
  t.reserve(traj.size());
  for (const TimedPose& p : traj) t.push_back(p.t);
  return t;
}

int cmd_simulate(const std::string& world_file, const std::string& traj_file,
                 const std::string& sensors_file, uint64_t seed, bool zero_noise,
                 const fs::path& out_dir) {
  const MagWorld world = load_world(resolve_config(world_file));
  const TrueTrajectory traj = load_trajectory(resolve_config(traj_file));
  const SensorConfig sensors = load_sensors(resolve_config(sensors_file));
  const Dataset d = simulate_dataset(world, traj, sensors,
                                     {.seed = seed, .zero_noise = zero_noise});
  d.save(out_dir);
  std::cout << "wrote " << d.gyro.size() << " gyro, " << d.mag.size()
            << " magnetometer records to " << out_dir.string() << '\n';
  return 0;
}

int cmd_estimate(const std::string& data_dir, const std::string& estimator_file,
                 const EstimateOptions& opt, const fs::path& out_dir) {
  const Dataset d = Dataset::load(data_dir);
  const EstimatorConfig cfg = load_estimator(resolve_config(estimator_file));
  const EstimateResult r = run_estimator(d, cfg, opt);

  fs::create_directories(out_dir);
  write_trajectory_csv(out_dir / "trajectory.csv", r.trajectory);
  write_invariants_csv(out_dir / "invariants.csv", r.keyframe_times, r.invariants);
  write_report_json(out_dir / "report.json", r.report);
  if (opt.with_loops) write_loops_csv(out_dir / "loops.csv", r.loops);
  if (!r.marginals.empty())
    write_covariance_csv(out_dir / "covariance.csv", r.keyframe_times, r.marginals);

  int accepted = 0;
  for (const LoopCandidate& c : r.loops) accepted += c.accepted ? 1 : 0;
  std::cout << r.trajectory.size() << " keyframes, " << r.report.iterations
            << " iterations, final cost " << r.report.final_cost;
  if (opt.with_loops)
    std::cout << ", " << accepted << "/" << r.loops.size() << " loop closures accepted";
  std::cout << '\n';
  return 0;
}

int cmd_detect_loops(const std::string& data_dir, const std::string& estimator_file,
                     const fs::path& out_dir) {
  const Dataset d = Dataset::load(data_dir);
  const EstimatorConfig cfg = load_estimator(resolve_config(estimator_file));
  EstimateOptions opt;
  opt.with_loops = true;
  opt.compute_marginals = false;
  const EstimateResult r = run_estimator(d, cfg, opt);

  fs::create_directories(out_dir);
  write_invariants_csv(out_dir / "invariants.csv", r.keyframe_times, r.invariants);

  std::vector<double> s1, s2, s3;
  for (const InvariantTriple& v : r.invariants) {
    s1.push_back(v.I1);
    s2.push_back(v.I2);
    s3.push_back(v.I3);
  }
  write_matrix_csv(out_dir / "distance_I1.csv", distance_matrix(s1, "I1").d);
  write_matrix_csv(out_dir / "distance_I2.csv", distance_matrix(s2, "I2").d);
  write_matrix_csv(out_dir / "distance_I3.csv", distance_matrix(s3, "I3").d);
  const DistanceMatrix combined = combined_distance(r.invariants);
  write_matrix_csv(out_dir / "distance_combined.csv", combined.d);
  // log10 copy for heatmap rendering; zeros clamped to the smallest positive entry
  Eigen::MatrixXd lg = combined.d;
  double floor_val = std::numeric_limits<double>::max();
  for (Eigen::Index i = 0; i < lg.size(); ++i)
    if (lg(i) > 0.0) floor_val = std::min(floor_val, lg(i));
  if (floor_val == std::numeric_limits<double>::max()) floor_val = 1.0;
  for (Eigen::Index i = 0; i < lg.size(); ++i)
    lg(i) = std::log10(std::max(lg(i), floor_val));
  write_matrix_csv(out_dir / "distance_combined_log10.csv", lg);

  write_loops_csv(out_dir / "candidates.csv", r.loops);
  int accepted = 0;
  for (const LoopCandidate& c : r.loops) accepted += c.accepted ? 1 : 0;
  std::cout << r.loops.size() << " candidates, " << accepted << " accepted\n";
  return 0;
}

int cmd_metrics(const std::string& estimate_file, const std::string& truth_file,
                const std::string& cov_file, double max_dt,
                const std::string& nees_out) {
  const auto estimate = read_trajectory_csv(estimate_file);
  const auto truth = read_trajectory_csv(truth_file);
  std::vector<Eigen::Matrix3d> covs;
  if (!cov_file.empty()) covs = read_covariance_csv(cov_file);
  if (!covs.empty() && covs.size() != estimate.size())
    throw DataError("covariance rows do not match the estimate");
  const MetricsReport rep =
      compute_metrics(estimate, truth, covs.empty() ? nullptr : &covs, max_dt);

  json j;
  j["position_rmse"] = rep.position_rmse;
  j["attitude_rmse"] = rep.attitude_rmse;
  j["associated"] = rep.associated;
  if (!covs.empty()) {
    j["nees_lower"] = rep.nees_lower;
    j["nees_upper"] = rep.nees_upper;
    j["fraction_within_bounds"] = rep.fraction_within_bounds;
  }
  std::cout << j.dump(2) << '\n';

  if (!nees_out.empty() && !covs.empty()) {
    std::ofstream out(nees_out);
    out << "k,nees\n";
    for (size_t k = 0; k < rep.nees.size(); ++k)
      out << k << ',' << format_double(rep.nees[k]) << '\n';
  }
  return 0;
}

int cmd_ablate(const std::string& data_dir, const std::string& estimator_file,
               const std::string& out_file) {
  const Dataset d = Dataset::load(data_dir);
  const EstimatorConfig cfg = load_estimator(resolve_config(estimator_file));
  const auto rows = run_ablation(d, cfg, {});

  std::ostringstream csv;
  csv << "variant,position_rmse,attitude_rmse,position_delta_pct,attitude_delta_pct\n";
  for (const AblationRow& r : rows) {
    csv << r.name << ',' << format_double(r.position_rmse) << ','
        << format_double(r.attitude_rmse) << ',' << format_double(r.position_delta_pct)
        << ',' << format_double(r.attitude_delta_pct) << '\n';
  }
  std::cout << csv.str();
  if (!out_file.empty()) {
    std::ofstream out(out_file);
    out << csv.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Magnetic odometry toolkit: simulation, estimation, loop closure"};
  app.require_subcommand(1);

  // simulate
  std::string world_file, traj_file, sensors_file;
  uint64_t seed = 1;
  bool zero_noise = false;
  std::string out_dir = "out";
  auto* sim = app.add_subcommand("simulate", "Simulate a dataset from configs");
  sim->add_option("--world", world_file, "world config (json)")->required();
  sim->add_option("--trajectory", traj_file, "trajectory config (json)")->required();
  sim->add_option("--sensors", sensors_file, "sensor config (json)")->required();
  sim->add_option("--seed", seed, "rng seed");
  sim->add_flag("--zero-noise", zero_noise, "disable all sensor noise");
  sim->add_option("-o,--out", out_dir, "output dataset directory")->required();

  // estimate
  std::string data_dir, estimator_file;
  EstimateOptions est_opt;
  bool no_loops = false, no_marginals = false;
  auto* est = app.add_subcommand("estimate", "Run the batch estimator on a dataset");
  est->add_option("--data", data_dir, "dataset directory")->required();
  est->add_option("--estimator", estimator_file, "estimator config (json)")->required();
  est->add_flag("--with-loops", est_opt.with_loops, "detect, gate and enforce loop closures");
  est->add_flag("--no-loops", no_loops, "odometry only (default)");
  est->add_flag("--drop-fd", est_opt.drop_fd, "ablation: drop first-difference field blocks");
  est->add_flag("--drop-cd", est_opt.drop_cd, "ablation: drop central-difference field blocks");
  est->add_flag("--drop-slip", est_opt.drop_slip, "ablation: drop lateral-slip blocks");
  est->add_option("--prior-perturb-seed", est_opt.prior_perturb_seed,
                  "perturb the anchor prior by a draw from its covariance");
  est->add_flag("--no-marginals", no_marginals, "skip marginal covariance extraction");
  est->add_option("-o,--out", out_dir, "output directory")->required();

  // detect-loops
  auto* det = app.add_subcommand("detect-loops",
                                 "Export distance matrices and gated candidates");
  det->add_option("--data", data_dir, "dataset directory")->required();
  det->add_option("--estimator", estimator_file, "estimator config (json)")->required();
  det->add_option("-o,--out", out_dir, "output directory")->required();

  // metrics
  std::string estimate_file, truth_file, cov_file, nees_out;
  double max_dt = 0.1;
  auto* met = app.add_subcommand("metrics", "Compare an estimate against ground truth");
  met->add_option("--estimate", estimate_file, "estimated trajectory csv")->required();
  met->add_option("--truth", truth_file, "ground-truth trajectory csv")->required();
  met->add_option("--covariance", cov_file, "marginal covariance csv (enables NEES)");
  met->add_option("--max-dt", max_dt, "association tolerance in seconds");
  met->add_option("--nees-out", nees_out, "write the per-timestep NEES series here");

  // ablate
  std::string ablate_out;
  auto* abl = app.add_subcommand("ablate", "Baseline plus drop-fd/cd/slip study");
  abl->add_option("--data", data_dir, "dataset directory")->required();
  abl->add_option("--estimator", estimator_file, "estimator config (json)")->required();
  abl->add_option("-o,--out", ablate_out, "also write the table to this csv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return cmd_simulate(world_file, traj_file, sensors_file, seed, zero_noise,
                                  out_dir);
    if (*est) {
      if (no_loops && est_opt.with_loops)
        throw ConfigError("--no-loops and --with-loops are mutually exclusive");
      est_opt.compute_marginals = !no_marginals;
      return cmd_estimate(data_dir, estimator_file, est_opt, out_dir);
    }
    if (*det) return cmd_detect_loops(data_dir, estimator_file, out_dir);
    if (*met) return cmd_metrics(estimate_file, truth_file, cov_file, max_dt, nees_out);
    if (*abl) return cmd_ablate(data_dir, estimator_file, ablate_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
