#include "doorway/model/parameters.hpp"

#include <cmath>

namespace doorway {

using nlohmann::json;

namespace {

template <typename T>
void read(const json& j, const char* key, T& out) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("parameter '") + key + "': " + e.what());
  }
}

template <typename T>
void readOptional(const json& j, const char* key, std::optional<T>& out) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return;
  T value{};
  read(j, key, value);
  out = std::move(value);
}

template <typename E>
void readEnum(const json& j, const char* key, E& out) {
  if (j.contains(key)) out = parseEnum<E>(j, key);
}

template <typename E>
void readOptionalEnum(const json& j, const char* key, std::optional<E>& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = parseEnum<E>(j, key);
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ParseError(message);
}

JointVector jointsFromJson(const json& j) {
  if (!j.is_array() || j.size() != 7) throw ParseError("parameter 'jointAnglesRad': expected 7 angles");
  JointVector q;
  for (int i = 0; i < 7; ++i) q[i] = j.at(i).get<double>();
  return q;
}

json jointsToJson(const JointVector& q) {
  json a = json::array();
  for (int i = 0; i < 7; ++i) a.push_back(q[i]);
  return a;
}

}  // namespace

bool ArmTrajectoryParams::operator==(const ArmTrajectoryParams& o) const {
  const bool jointsEqual = jointAnglesRad.has_value() == o.jointAnglesRad.has_value() &&
                           (!jointAnglesRad || *jointAnglesRad == *o.jointAnglesRad);
  return side == o.side && targetMode == o.targetMode && jointsEqual && handPose == o.handPose &&
         frameName == o.frameName && trajectoryTimeS == o.trajectoryTimeS && trackingWeight == o.trackingWeight;
}

bool ScrewTrajectoryParams::operator==(const ScrewTrajectoryParams& o) const {
  return side == o.side && axisOrigin == o.axisOrigin && axisDirection == o.axisDirection &&
         frameName == o.frameName && revolutionAngleRad == o.revolutionAngleRad &&
         axialTranslationM == o.axialTranslationM && durationS == o.durationS && sampleCount == o.sampleCount;
}

void to_json(json& j, const StanceGoal& g) {
  j = json{{"pointToStandAt", g.pointToStandAt},
           {"pointToFace", g.pointToFace},
           {"xyYawAdjustment", {g.adjustX, g.adjustY, g.adjustYaw}}};
}

void from_json(const json& j, StanceGoal& g) {
  g = StanceGoal{};
  g.pointToStandAt = j.at("pointToStandAt").get<Vec3>();
  g.pointToFace = j.at("pointToFace").get<Vec3>();
  if (const auto it = j.find("xyYawAdjustment"); it != j.end()) {
    if (!it->is_array() || it->size() != 3) throw ParseError("xyYawAdjustment must be [x, y, yaw]");
    g.adjustX = it->at(0).get<double>();
    g.adjustY = it->at(1).get<double>();
    g.adjustYaw = it->at(2).get<double>();
  }
}

void to_json(json& j, const Footstep& s) { j = json{{"side", s.side}, {"pose", s.pose}}; }

void from_json(const json& j, Footstep& s) {
  s.side = parseEnum<Side>(j, "side");
  s.pose = j.at("pose").get<Pose>();
}

NodeParameters defaultParameters(NodeKind kind) {
  switch (kind) {
    case NodeKind::DoorTraversalCoordinator: return CoordinatorParams{};
    case NodeKind::ActionSequence: return SequenceParams{};
    case NodeKind::FootstepPlanAction: return FootstepPlanParams{};
    case NodeKind::ArmTrajectoryAction: {
      ArmTrajectoryParams a;
      a.jointAnglesRad = homeJointAngles();
      return a;
    }
    case NodeKind::ScrewTrajectoryAction: return ScrewTrajectoryParams{};
    case NodeKind::ChestPelvisTrajectoryAction: return ChestPelvisTrajectoryParams{};
    case NodeKind::HandConfigurationAction: return HandConfigurationParams{};
    case NodeKind::WaitAction: return WaitParams{};
  }
  throw std::logic_error("unhandled node kind");
}

NodeParameters parseParameters(NodeKind kind, const json& j) {
  if (!j.is_null() && !j.is_object()) throw ParseError("parameters must be an object");
  const json& p = j.is_null() ? json::object() : j;
  NodeParameters out;
  switch (kind) {
    case NodeKind::DoorTraversalCoordinator: {
      CoordinatorParams c;
      read(p, "maxRetries", c.maxRetries);
      out = c;
      break;
    }
    case NodeKind::ActionSequence: {
      SequenceParams s;
      readOptionalEnum(p, "doorType", s.doorType);
      readOptional(p, "strategy", s.strategy);
      readOptionalEnum(p, "phase", s.phase);
      readOptional(p, "retryFromId", s.retryFromId);
      out = s;
      break;
    }
    case NodeKind::FootstepPlanAction: {
      FootstepPlanParams f;
      readEnum(p, "planMode", f.planMode);
      read(p, "steps", f.steps);
      readOptional(p, "goalStance", f.goalStance);
      read(p, "frameName", f.frameName);
      read(p, "swingDurationS", f.swingDurationS);
      read(p, "transferDurationS", f.transferDurationS);
      read(p, "stepWidthM", f.stepWidthM);
      read(p, "stepLengthM", f.stepLengthM);
      read(p, "turnPerStepRad", f.turnPerStepRad);
      out = f;
      break;
    }
    case NodeKind::ArmTrajectoryAction: {
      ArmTrajectoryParams a;
      readEnum(p, "side", a.side);
      readEnum(p, "targetMode", a.targetMode);
      if (p.contains("jointAnglesRad") && !p.at("jointAnglesRad").is_null())
        a.jointAnglesRad = jointsFromJson(p.at("jointAnglesRad"));
      readOptional(p, "handPose", a.handPose);
      read(p, "frameName", a.frameName);
      read(p, "trajectoryTimeS", a.trajectoryTimeS);
      read(p, "trackingWeight", a.trackingWeight);
      out = a;
      break;
    }
    case NodeKind::ScrewTrajectoryAction: {
      ScrewTrajectoryParams s;
      readEnum(p, "side", s.side);
      read(p, "axisOrigin", s.axisOrigin);
      read(p, "axisDirection", s.axisDirection);
      read(p, "frameName", s.frameName);
      read(p, "revolutionAngleRad", s.revolutionAngleRad);
      read(p, "axialTranslationM", s.axialTranslationM);
      read(p, "durationS", s.durationS);
      read(p, "sampleCount", s.sampleCount);
      out = s;
      break;
    }
    case NodeKind::ChestPelvisTrajectoryAction: {
      ChestPelvisTrajectoryParams c;
      readEnum(p, "bodyPart", c.bodyPart);
      read(p, "yawRad", c.yawRad);
      read(p, "heightOffsetM", c.heightOffsetM);
      read(p, "trajectoryTimeS", c.trajectoryTimeS);
      out = c;
      break;
    }
    case NodeKind::HandConfigurationAction: {
      HandConfigurationParams h;
      readEnum(p, "side", h.side);
      readEnum(p, "configuration", h.configuration);
      read(p, "knuckleAnglesRad", h.knuckleAnglesRad);
      read(p, "maxTorqueNm", h.maxTorqueNm);
      read(p, "durationS", h.durationS);
      out = h;
      break;
    }
    case NodeKind::WaitAction: {
      WaitParams w;
      read(p, "durationS", w.durationS);
      out = w;
      break;
    }
  }
  validate(out);
  return out;
}

namespace {

struct Serializer {
  json operator()(const CoordinatorParams& c) const { return {{"maxRetries", c.maxRetries}}; }
  json operator()(const SequenceParams& s) const {
    json j = json::object();
    if (s.doorType) j["doorType"] = *s.doorType;
    if (s.strategy) j["strategy"] = *s.strategy;
    if (s.phase) j["phase"] = *s.phase;
    if (s.retryFromId) j["retryFromId"] = *s.retryFromId;
    return j;
  }
  json operator()(const FootstepPlanParams& f) const {
    json j{{"planMode", f.planMode},           {"frameName", f.frameName},
           {"swingDurationS", f.swingDurationS}, {"transferDurationS", f.transferDurationS},
           {"stepWidthM", f.stepWidthM},         {"stepLengthM", f.stepLengthM},
           {"turnPerStepRad", f.turnPerStepRad}};
    if (f.planMode == PlanMode::PreSpecified || !f.steps.empty()) j["steps"] = f.steps;
    if (f.goalStance) j["goalStance"] = *f.goalStance;
    return j;
  }
  json operator()(const ArmTrajectoryParams& a) const {
    json j{{"side", a.side},
           {"targetMode", a.targetMode},
           {"frameName", a.frameName},
           {"trajectoryTimeS", a.trajectoryTimeS},
           {"trackingWeight", a.trackingWeight}};
    if (a.jointAnglesRad) j["jointAnglesRad"] = jointsToJson(*a.jointAnglesRad);
    if (a.handPose) j["handPose"] = *a.handPose;
    return j;
  }
  json operator()(const ScrewTrajectoryParams& s) const {
    return {{"side", s.side},
            {"axisOrigin", s.axisOrigin},
            {"axisDirection", s.axisDirection},
            {"frameName", s.frameName},
            {"revolutionAngleRad", s.revolutionAngleRad},
            {"axialTranslationM", s.axialTranslationM},
            {"durationS", s.durationS},
            {"sampleCount", s.sampleCount}};
  }
  json operator()(const ChestPelvisTrajectoryParams& c) const {
    return {{"bodyPart", c.bodyPart},
            {"yawRad", c.yawRad},
            {"heightOffsetM", c.heightOffsetM},
            {"trajectoryTimeS", c.trajectoryTimeS}};
  }
  json operator()(const HandConfigurationParams& h) const {
    json j{{"side", h.side},
           {"configuration", h.configuration},
           {"maxTorqueNm", h.maxTorqueNm},
           {"durationS", h.durationS}};
    if (!h.knuckleAnglesRad.empty()) j["knuckleAnglesRad"] = h.knuckleAnglesRad;
    return j;
  }
  json operator()(const WaitParams& w) const { return {{"durationS", w.durationS}}; }
};

struct Validator {
  void operator()(const CoordinatorParams& c) const { require(c.maxRetries >= 0, "maxRetries must be >= 0"); }
  void operator()(const SequenceParams& s) const {
    require(!s.strategy || !s.strategy->empty(), "strategy label must not be empty");
  }
  void operator()(const FootstepPlanParams& f) const {
    require(f.swingDurationS > 0.0, "swingDurationS must be > 0");
    require(f.transferDurationS > 0.0, "transferDurationS must be > 0");
    require(f.stepWidthM > 0.0, "stepWidthM must be > 0");
    require(f.stepLengthM > 0.0, "stepLengthM must be > 0");
    require(f.turnPerStepRad > 0.0, "turnPerStepRad must be > 0");
    if (f.planMode == PlanMode::PreSpecified) {
      require(!f.steps.empty(), "PreSpecified footstep plan requires at least one step");
    } else {
      require(f.goalStance.has_value(), "online footstep plan requires a goalStance");
      const Vec3 d = f.goalStance->pointToFace - f.goalStance->pointToStandAt;
      require(std::hypot(d.x(), d.y()) > 1e-6, "goalStance pointToFace must differ from pointToStandAt");
    }
  }
  void operator()(const ArmTrajectoryParams& a) const {
    require(a.trajectoryTimeS > 0.0, "trajectoryTimeS must be > 0");
    require(a.trackingWeight >= 0.0, "trackingWeight must be >= 0");
    if (a.targetMode == TargetMode::PresetJointAngles)
      require(a.jointAnglesRad && !a.handPose, "PresetJointAngles requires jointAnglesRad only");
    else
      require(a.handPose && !a.jointAnglesRad, "FrameRelativeHandPose requires handPose only");
  }
  void operator()(const ScrewTrajectoryParams& s) const {
    require(s.durationS > 0.0, "durationS must be > 0");
    require(s.sampleCount >= 2, "sampleCount must be >= 2");
    require(std::abs(s.axisDirection.norm() - 1.0) <= 1e-6, "axisDirection must be unit length");
  }
  void operator()(const ChestPelvisTrajectoryParams& c) const {
    require(c.trajectoryTimeS > 0.0, "trajectoryTimeS must be > 0");
  }
  void operator()(const HandConfigurationParams& h) const {
    require(h.maxTorqueNm >= 0.0, "maxTorqueNm must be >= 0");
    require(h.durationS > 0.0, "durationS must be > 0");
    if (h.configuration == HandConfiguration::Custom)
      require(!h.knuckleAnglesRad.empty(), "Custom configuration requires knuckleAnglesRad");
  }
  void operator()(const WaitParams& w) const { require(w.durationS >= 0.0, "durationS must be >= 0"); }
};

}  // namespace

json serializeParameters(const NodeParameters& p) { return std::visit(Serializer{}, p); }

void validate(const NodeParameters& p) { std::visit(Validator{}, p); }

}  // namespace doorway
