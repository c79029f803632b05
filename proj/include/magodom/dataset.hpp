#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "magodom/metrics.hpp"
#include "magodom/sensors.hpp"

namespace magodom {

/// Raw sensor logs plus optional ground truth, as stored on disk.
/// Column schemas are documented in the README; all floating point values
/// are written with 17 significant digits so write/read round-trips are
/// exact and seeded runs are byte-identical.
struct Dataset {
  struct MagRecord {
    double t;
    ArrayReadings readings;
  };
  struct OdomSample {
    double t;
    double speed;  // m/s, body-x
  };
  struct Meta {
    double array_baseline = 0.4;
    double gyro_rate_hz = 50.0;
    double mag_rate_hz = 25.0;
  };

  Meta meta;
  std::vector<GyroSample> gyro;
  std::vector<MagRecord> mag;
  std::vector<TimedPose> truth;      // may be empty
  std::vector<OdomSample> odom;      // may be empty

  /// Writes gyro.csv, mag.csv, meta.json and, when present, truth.csv and
  /// odom.csv into dir (created if needed).
  void save(const std::filesystem::path& dir) const;

  /// Loads a dataset directory; throws DataError on malformed files.
  static Dataset load(const std::filesystem::path& dir);
};

// Free-standing CSV helpers shared by the CLI outputs.
void write_trajectory_csv(const std::filesystem::path& file,
                          const std::vector<TimedPose>& traj);
std::vector<TimedPose> read_trajectory_csv(const std::filesystem::path& file);

void write_covariance_csv(const std::filesystem::path& file,
                          const std::vector<double>& times,
                          const std::vector<Eigen::Matrix3d>& covs);
std::vector<Eigen::Matrix3d> read_covariance_csv(const std::filesystem::path& file);

void write_matrix_csv(const std::filesystem::path& file, const Eigen::MatrixXd& m);

std::string format_double(double v);

}  // namespace magodom
