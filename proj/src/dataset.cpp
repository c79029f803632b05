#include "magodom/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "magodom/errors.hpp"

namespace magodom {

namespace {

using nlohmann::json;

std::vector<std::vector<double>> read_csv(const std::filesystem::path& file,
                                          size_t expect_cols) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open " + file.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty file " + file.string());
  std::vector<std::vector<double>> rows;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw DataError(file.string() + ":" + std::to_string(lineno) +
                        ": bad number '" + cell + "'");
      }
    }
    if (row.size() != expect_cols) {
      throw DataError(file.string() + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(expect_cols) + " columns, got " +
                      std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void check_increasing(const std::filesystem::path& file,
                      const std::vector<std::vector<double>>& rows) {
  for (size_t i = 1; i < rows.size(); ++i) {
    if (!(rows[i][0] > rows[i - 1][0])) {
      throw DataError(file.string() + ": timestamps not strictly increasing at row " +
                      std::to_string(i + 1));
    }
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void Dataset::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "gyro.csv");
    out << "t,u\n";
    for (const GyroSample& s : gyro)
      out << format_double(s.t) << ',' << format_double(s.u) << '\n';
  }
  {
    std::ofstream out(dir / "mag.csv");
    out << "t,b1x,b1y,b1z,b2x,b2y,b2z,b3x,b3y,b3z,b4x,b4y,b4z\n";
    for (const MagRecord& m : mag) {
      out << format_double(m.t);
      for (const Vector3d& b : m.readings)
        for (int a = 0; a < 3; ++a) out << ',' << format_double(b[a]);
      out << '\n';
    }
  }
  if (!truth.empty()) write_trajectory_csv(dir / "truth.csv", truth);
  if (!odom.empty()) {
    std::ofstream out(dir / "odom.csv");
    out << "t,speed\n";
    for (const OdomSample& s : odom)
      out << format_double(s.t) << ',' << format_double(s.speed) << '\n';
  }
  {
    json j;
    j["array_baseline"] = meta.array_baseline;
    j["gyro_rate_hz"] = meta.gyro_rate_hz;
    j["mag_rate_hz"] = meta.mag_rate_hz;
    std::ofstream out(dir / "meta.json");
    out << j.dump(2) << '\n';
  }
}

Dataset Dataset::load(const std::filesystem::path& dir) {
  Dataset d;
  {
    std::ifstream in(dir / "meta.json");
    if (!in) throw DataError("cannot open " + (dir / "meta.json").string());
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw DataError((dir / "meta.json").string() + ": " + e.what());
    }
    d.meta.array_baseline = j.at("array_baseline").get<double>();
    d.meta.gyro_rate_hz = j.at("gyro_rate_hz").get<double>();
    d.meta.mag_rate_hz = j.at("mag_rate_hz").get<double>();
  }
  {
    auto rows = read_csv(dir / "gyro.csv", 2);
    check_increasing(dir / "gyro.csv", rows);
    for (const auto& r : rows) d.gyro.push_back({r[0], r[1]});
  }
  {
    auto rows = read_csv(dir / "mag.csv", 13);
    check_increasing(dir / "mag.csv", rows);
    for (const auto& r : rows) {
      MagRecord m;
      m.t = r[0];
      for (int s = 0; s < 4; ++s)
        m.readings[s] = Vector3d(r[1 + 3 * s], r[2 + 3 * s], r[3 + 3 * s]);
      d.mag.push_back(m);
    }
  }
  if (std::filesystem::exists(dir / "truth.csv"))
    d.truth = read_trajectory_csv(dir / "truth.csv");
  if (std::filesystem::exists(dir / "odom.csv")) {
    auto rows = read_csv(dir / "odom.csv", 2);
    check_increasing(dir / "odom.csv", rows);
    for (const auto& r : rows) d.odom.push_back({r[0], r[1]});
  }
  return d;
}

void write_trajectory_csv(const std::filesystem::path& file,
                          const std::vector<TimedPose>& traj) {
  std::ofstream out(file);
  out << "t,x,y,theta\n";
  for (const TimedPose& p : traj) {
    out << format_double(p.t) << ',' << format_double(p.pose.position().x()) << ','
        << format_double(p.pose.position().y()) << ','
        << format_double(p.pose.heading()) << '\n';
  }
}

std::vector<TimedPose> read_trajectory_csv(const std::filesystem::path& file) {
  auto rows = read_csv(file, 4);
  check_increasing(file, rows);
  std::vector<TimedPose> out;
  out.reserve(rows.size());
  for (const auto& r : rows)
    out.push_back({r[0], Pose2(r[3], Vector2d(r[1], r[2]))});
  return out;
}

void write_covariance_csv(const std::filesystem::path& file,
                          const std::vector<double>& times,
                          const std::vector<Eigen::Matrix3d>& covs) {
  std::ofstream out(file);
  out << "t,p00,p01,p02,p11,p12,p22\n";
  for (size_t i = 0; i < covs.size(); ++i) {
    const Eigen::Matrix3d& P = covs[i];
    out << format_double(times[i]);
    const double v[6] = {P(0, 0), P(0, 1), P(0, 2), P(1, 1), P(1, 2), P(2, 2)};
    for (double x : v) out << ',' << format_double(x);
    out << '\n';
  }
}

std::vector<Eigen::Matrix3d> read_covariance_csv(const std::filesystem::path& file) {
  auto rows = read_csv(file, 7);
  std::vector<Eigen::Matrix3d> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    Eigen::Matrix3d P;
    P << r[1], r[2], r[3],
         r[2], r[4], r[5],
         r[3], r[5], r[6];
    out.push_back(P);
  }
  return out;
}

void write_matrix_csv(const std::filesystem::path& file, const Eigen::MatrixXd& m) {
  std::ofstream out(file);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

}  // namespace magodom
