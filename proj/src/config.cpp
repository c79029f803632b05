#include "magodom/config.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "magodom/errors.hpp"

namespace magodom {

namespace {

using nlohmann::json;

json load_json(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open " + file.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    // nlohmann reports the byte offset; surface the message as-is
    throw ConfigError(file.string() + ": " + e.what());
  }
}

Vector3d vec3(const json& j, const char* key) {
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 3)
    throw ConfigError(std::string(key) + " must be a 3-element array");
  return Vector3d(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
}

template <typename T>
T get_or(const json& j, const char* key, T def) {
  return j.contains(key) ? j.at(key).get<T>() : def;
}

}  // namespace

MagWorld load_world(const std::filesystem::path& file) {
  const json j = load_json(file);
  try {
    std::vector<Dipole> dipoles;
    if (j.contains("dipoles")) {
      for (const auto& d : j.at("dipoles")) {
        dipoles.push_back({vec3(d, "position"), vec3(d, "moment")});
      }
    }
    GradVec bg_grad = GradVec::Zero();
    if (j.contains("background_gradient")) {
      const auto& a = j.at("background_gradient");
      if (!a.is_array() || a.size() != 5)
        throw ConfigError("background_gradient must have 5 elements");
      for (int i = 0; i < 5; ++i) bg_grad[i] = a[i].get<double>();
    }
    return MagWorld(vec3(j, "background"), std::move(dipoles),
                    get_or(j, "exclusion_radius", 0.3),
                    get_or(j, "dipole_scale", 0.1), bg_grad);
  } catch (const json::exception& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
}

TrueTrajectory load_trajectory(const std::filesystem::path& file) {
  const json j = load_json(file);
  try {
    const auto& s = j.at("start");
    const Pose2 start(s.at("heading").get<double>(),
                      Vector2d(s.at("x").get<double>(), s.at("y").get<double>()));
    std::vector<TrajectorySegment> segs;
    for (const auto& seg : j.at("segments")) {
      segs.push_back({seg.at("duration").get<double>(),
                      seg.at("speed").get<double>(),
                      get_or(seg, "yaw_rate", 0.0)});
    }
    return TrueTrajectory(start, std::move(segs));
  } catch (const json::exception& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
}

SensorConfig load_sensors(const std::filesystem::path& file) {
  const json j = load_json(file);
  try {
    SensorConfig c;
    const auto& g = j.at("gyro");
    c.gyro.noise_psd = g.at("noise_psd").get<double>();
    c.gyro.rate_hz = get_or(g, "rate_hz", 50.0);
    const auto& m = j.at("mag_array");
    c.mag_array.baseline = get_or(m, "baseline", 0.4);
    c.mag_array.noise_std = m.at("noise_std").get<double>();
    c.mag_array.rate_hz = get_or(m, "rate_hz", 25.0);
    if (j.contains("wheel_odom")) {
      c.with_odom = true;
      c.odom_speed_noise_std = j.at("wheel_odom").at("speed_noise_std").get<double>();
    }
    if (j.contains("mag_bias")) c.mag_bias = vec3(j, "mag_bias");
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
}

EstimatorConfig load_estimator(const std::filesystem::path& file) {
  const json j = load_json(file);
  try {
    EstimatorConfig c;
    c.keyframe_hz = get_or(j, "keyframe_hz", 5.0);
    if (j.contains("covariances")) {
      const auto& v = j.at("covariances");
      c.r_fd_std = get_or(v, "r_fd_std", c.r_fd_std);
      c.r_cd_std = get_or(v, "r_cd_std", c.r_cd_std);
      c.r_slip_std = get_or(v, "r_slip_std", c.r_slip_std);
      c.psi_std = get_or(v, "psi_std", c.psi_std);
      c.q_gyro_psd = get_or(v, "q_gyro_psd", c.q_gyro_psd);
      c.prior_heading_std = get_or(v, "prior_heading_std", c.prior_heading_std);
      c.prior_position_std = get_or(v, "prior_position_std", c.prior_position_std);
    }
    c.nominal_speed = get_or(j, "nominal_speed", 0.0);
    if (j.contains("loop")) {
      const auto& l = j.at("loop");
      c.loop.tau = get_or(l, "tau", c.loop.tau);
      c.loop.min_separation = get_or(l, "min_separation", c.loop.min_separation);
      c.loop.window = get_or(l, "window", c.loop.window);
      c.loop.alpha = get_or(l, "alpha", c.loop.alpha);
    }
    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      c.solver.max_iterations = get_or(s, "max_iterations", c.solver.max_iterations);
      c.solver.step_tolerance = get_or(s, "step_tolerance", c.solver.step_tolerance);
      c.solver.cost_tolerance = get_or(s, "cost_tolerance", c.solver.cost_tolerance);
    }
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
}

}  // namespace magodom
