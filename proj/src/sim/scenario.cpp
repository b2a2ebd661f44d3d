#include "doorway/sim/scenario.hpp"

#include <fstream>

namespace doorway {

using nlohmann::json;

namespace {

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (const auto it = j.find(key); it != j.end()) {
    try {
      out = it->get<T>();
    } catch (const json::exception& e) {
      throw ParseError(std::string("scenario key '") + key + "': " + e.what());
    }
  }
}

template <typename E>
void readEnum(const json& j, const char* key, E& out) {
  if (j.contains(key)) out = parseEnum<E>(j, key);
}

const json& section(const json& j, const char* key) {
  static const json empty = json::object();
  const auto it = j.find(key);
  if (it == j.end()) return empty;
  if (!it->is_object()) throw ParseError(std::string("scenario section '") + key + "' must be an object");
  return *it;
}

void require(bool ok, const char* message) {
  if (!ok) throw ParseError(message);
}

}  // namespace

void to_json(json& j, const ScenarioConfig& s) {
  json door{{"hingeSide", s.door.hingeSide},
            {"swingDirection", s.door.swingDirection},
            {"mechanismType", s.door.mechanismType},
            {"frameWidthM", s.door.frameWidthM},
            {"panelWidthM", s.door.panelWidthM},
            {"springCloserRateRadS", s.door.springCloserRateRadS},
            {"maxOpenAngleRad", s.door.maxOpenAngleRad},
            {"handleHeightM", s.door.handleHeightM}};
  if (s.door.unlatched) door["unlatched"] = *s.door.unlatched;
  json clutter = json::array();
  for (const auto& c : s.clutter)
    clutter.push_back({{"center", c.center}, {"widthM", c.widthM}, {"heightM", c.heightM}, {"facingYawRad", c.facingYawRad}});
  j = json{{"name", s.name},
           {"door", door},
           {"robotStart",
            {{"xM", s.robotStart.xM},
             {"yM", s.robotStart.yM},
             {"yawRad", s.robotStart.yawRad},
             {"stepWidthM", s.robotStart.stepWidthM},
             {"shoulderSpanFraction", s.robotStart.shoulderSpanFraction}}},
           {"sensor",
            {{"tiltDeg", s.sensor.tiltDeg},
             {"rateHz", s.sensor.rateHz},
             {"width", s.sensor.width},
             {"height", s.sensor.height},
             {"horizontalFovDeg", s.sensor.horizontalFovDeg},
             {"verticalFovDeg", s.sensor.verticalFovDeg},
             {"noise",
              {{"missProbability", s.sensor.noise.missProbability},
               {"maskFlipProbability", s.sensor.noise.maskFlipProbability},
               {"depthSigmaM", s.sensor.noise.depthSigmaM}}}}},
           {"scene", {{"clutter", clutter}}},
           {"tickRateHz", s.tickRateHz},
           {"timeoutS", s.timeoutS}};
}

void from_json(const json& j, ScenarioConfig& s) {
  if (!j.is_object()) throw ParseError("scenario must be an object");
  s = ScenarioConfig{};
  read(j, "name", s.name);
  const json& door = section(j, "door");
  readEnum(door, "hingeSide", s.door.hingeSide);
  readEnum(door, "swingDirection", s.door.swingDirection);
  readEnum(door, "mechanismType", s.door.mechanismType);
  read(door, "frameWidthM", s.door.frameWidthM);
  read(door, "panelWidthM", s.door.panelWidthM);
  read(door, "springCloserRateRadS", s.door.springCloserRateRadS);
  read(door, "maxOpenAngleRad", s.door.maxOpenAngleRad);
  read(door, "handleHeightM", s.door.handleHeightM);
  if (door.contains("unlatched") && !door.at("unlatched").is_null()) s.door.unlatched = door.at("unlatched").get<bool>();

  const json& start = section(j, "robotStart");
  read(start, "xM", s.robotStart.xM);
  read(start, "yM", s.robotStart.yM);
  read(start, "yawRad", s.robotStart.yawRad);
  read(start, "stepWidthM", s.robotStart.stepWidthM);
  read(start, "shoulderSpanFraction", s.robotStart.shoulderSpanFraction);

  const json& sensor = section(j, "sensor");
  read(sensor, "tiltDeg", s.sensor.tiltDeg);
  read(sensor, "rateHz", s.sensor.rateHz);
  read(sensor, "width", s.sensor.width);
  read(sensor, "height", s.sensor.height);
  read(sensor, "horizontalFovDeg", s.sensor.horizontalFovDeg);
  read(sensor, "verticalFovDeg", s.sensor.verticalFovDeg);
  const json& noise = section(sensor, "noise");
  read(noise, "missProbability", s.sensor.noise.missProbability);
  read(noise, "maskFlipProbability", s.sensor.noise.maskFlipProbability);
  read(noise, "depthSigmaM", s.sensor.noise.depthSigmaM);

  const json& scene = section(j, "scene");
  if (const auto it = scene.find("clutter"); it != scene.end()) {
    for (const auto& c : *it) {
      ClutterBoard b;
      b.center = c.at("center").get<Vec3>();
      read(c, "widthM", b.widthM);
      read(c, "heightM", b.heightM);
      read(c, "facingYawRad", b.facingYawRad);
      s.clutter.push_back(b);
    }
  }
  read(j, "tickRateHz", s.tickRateHz);
  read(j, "timeoutS", s.timeoutS);

  require(s.tickRateHz > 0.0, "tickRateHz must be > 0");
  require(s.timeoutS > 0.0, "timeoutS must be > 0");
  require(s.door.frameWidthM > 0.0, "frameWidthM must be > 0");
  require(s.door.panelWidthM > 0.0 && s.door.panelWidthM <= s.door.frameWidthM, "panelWidthM must be in (0, frameWidthM]");
  require(s.door.springCloserRateRadS >= 0.0, "springCloserRateRadS must be >= 0");
  require(s.door.maxOpenAngleRad > 0.0 && s.door.maxOpenAngleRad < 3.1, "maxOpenAngleRad must be in (0, pi)");
  require(s.sensor.rateHz > 0.0 && s.sensor.rateHz <= s.tickRateHz, "sensor rateHz must be in (0, tickRateHz]");
  require(s.sensor.width > 0 && s.sensor.height > 0, "sensor image size must be positive");
  require(s.sensor.noise.missProbability >= 0.0 && s.sensor.noise.missProbability <= 1.0, "missProbability must be in [0, 1]");
  require(s.sensor.noise.maskFlipProbability >= 0.0 && s.sensor.noise.maskFlipProbability <= 1.0,
          "maskFlipProbability must be in [0, 1]");
  require(s.sensor.noise.depthSigmaM >= 0.0, "depthSigmaM must be >= 0");
  require(s.robotStart.stepWidthM > 0.0, "stepWidthM must be > 0");
  require(s.robotStart.shoulderSpanFraction > 0.0, "shoulderSpanFraction must be > 0");
}

ScenarioConfig loadScenarioFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file " + path.string());
  try {
    return json::parse(in).get<ScenarioConfig>();
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void saveScenarioFile(const ScenarioConfig& s, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write scenario file " + path.string());
  out << json(s).dump(2) << "\n";
}

}  // namespace doorway
