#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "doorway/common.hpp"
#include "doorway/geometry/pose.hpp"

namespace doorway {

struct DoorConfig {
  Side hingeSide = Side::Right;
  SwingDirection swingDirection = SwingDirection::Push;
  MechanismType mechanismType = MechanismType::LeverHandle;
  double frameWidthM = 1.0;
  double panelWidthM = 0.98;
  double springCloserRateRadS = 0.0;  ///< 0 disables the closer
  std::optional<bool> unlatched;      ///< overrides the mechanism default
  double maxOpenAngleRad = 1.75;
  double handleHeightM = 1.0;
};

struct RobotStartConfig {
  double xM = -1.5;
  double yM = 0.0;
  double yawRad = 0.0;
  double stepWidthM = 0.24;
  /// Shoulder span as a fraction of the door frame opening.
  double shoulderSpanFraction = 0.85;
};

struct NoiseConfig {
  double missProbability = 0.0;   ///< whole-frame detector miss
  double maskFlipProbability = 0.0;  ///< per mask pixel inside the handle region
  double depthSigmaM = 0.0;
};

struct SensorConfig {
  double tiltDeg = 43.0;
  double rateHz = 30.0;
  int width = 672;
  int height = 376;
  double horizontalFovDeg = 110.0;
  double verticalFovDeg = 70.0;
  NoiseConfig noise;
};

/// Axis-aligned vertical board used to clutter the perception scene.
struct ClutterBoard {
  Vec3 center = Vec3::Zero();
  double widthM = 0.4;   ///< along the wall
  double heightM = 0.4;
  double facingYawRad = 0.0;  ///< yaw of the board normal
  friend bool operator==(const ClutterBoard&, const ClutterBoard&) = default;
};

struct ScenarioConfig {
  std::string name;
  DoorConfig door;
  RobotStartConfig robotStart;
  SensorConfig sensor;
  std::vector<ClutterBoard> clutter;
  double tickRateHz = 120.0;
  double timeoutS = 90.0;
};

void to_json(nlohmann::json& j, const ScenarioConfig& s);
/// Missing keys take defaults; throws ParseError on invalid values.
void from_json(const nlohmann::json& j, ScenarioConfig& s);

ScenarioConfig loadScenarioFile(const std::filesystem::path& path);
void saveScenarioFile(const ScenarioConfig& s, const std::filesystem::path& path);

}  // namespace doorway
