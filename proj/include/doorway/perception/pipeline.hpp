#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <vector>

#include "doorway/geometry/frame_tree.hpp"
#include "doorway/perception/detection.hpp"
#include "doorway/perception/sensor_frame.hpp"

namespace doorway {

inline constexpr const char* kDetectedMechanismFrame = "detectedMechanism";

/// 4-connected erosion; pixels outside the image count as unset.
Mask erodeMask(const Mask& mask, int iterations);
/// 4-connected dilation.
Mask dilateMask(const Mask& mask, int iterations);

/// World-frame mean of the masked valid depth points, subsampled uniformly in
/// row-major order to at most `sampleLimit` points. None when no point is valid.
std::optional<Vec3> maskCentroid(const Mask& mask, const DepthImage& depth, const Intrinsics& intrinsics,
                                 const Pose& cameraPose, int sampleLimit);

Vec3 alphaFilter(const Vec3& previous, const Vec3& measurement, double alpha);

struct PlanarRegion {
  Vec3 normal = Vec3::UnitX();  ///< unit, facing the camera
  Vec3 pointOnPlane = Vec3::Zero();
  int inlierCount = 0;
  double areaEstimate = 0.0;  ///< m²
};

struct PlaneExtractionOptions {
  double inlierDistance = 0.01;
  int minInliers = 500;
  int maxPlanes = 4;
  int iterations = 200;  ///< upper bound on hypotheses per plane
  int minIterations = 30;
  double confidence = 0.999;
  /// Hypotheses are scored on at most this many points before the full count.
  int scoringSampleSize = 1000;
  /// Only pixels on this grid are used; each stands for stride² pixels.
  int gridStride = 3;
  std::uint64_t seed = 1;
};

/// Iterative sampled-consensus plane fitting on the decimated depth cloud.
/// Area is the summed per-point surface footprint of the inliers.
std::vector<PlanarRegion> extractPlanes(const DepthImage& depth, const Intrinsics& intrinsics, const Pose& cameraPose,
                                        const PlaneExtractionOptions& options = {});

struct AssociationOptions {
  double maxDistance = 0.10;
  double maxVerticalComponent = 0.25881904510252074;  ///< sin 15°
  double minArea = 0.30;
};

/// Nearest region that is close to the centroid, vertical and large enough.
std::optional<PlanarRegion> associateMechanismPlane(const Vec3& centroid, const std::vector<PlanarRegion>& regions,
                                                    const AssociationOptions& options = {});

/// Z up, X along the horizontal projection of -normal (into the door).
Quat mechanismOrientation(const Vec3& cameraFacingNormal);

/// Pushes one frame's outcome; publishes the mechanism frame while stable.
void updateStability(MechanismDetection& detection, bool frameHadValidDetectionAndAssociation,
                     FrameTree* frames = nullptr);

struct PerceptionOptions {
  double alpha = 0.2;
  int erosionIterations = 2;
  int sampleLimit = 256;
  int windowSize = 30;  ///< one second of sensor frames
  double stableFraction = 0.6;
  PlaneExtractionOptions planes;
  AssociationOptions association;
};

/// Per-frame debug record for one mechanism class.
struct PerceptionRecord {
  double timestamp = 0.0;
  MechanismType type = MechanismType::LeverHandle;
  bool measured = false;
  Vec3 rawCentroid = Vec3::Zero();
  Vec3 filteredCentroid = Vec3::Zero();
  bool associated = false;
  Vec3 planeNormal = Vec3::Zero();
  bool stable = false;
};

class PerceptionPipeline {
 public:
  explicit PerceptionPipeline(PerceptionOptions options = {});

  /// Runs the full chain on one frame and returns one record per known class.
  std::vector<PerceptionRecord> process(const SensorFrame& frame, FrameTree* frames = nullptr);

  std::vector<MechanismDetection> detections() const;
  const std::vector<PlanarRegion>& lastRegions() const { return lastRegions_; }
  const PerceptionOptions& options() const { return options_; }

 private:
  MechanismDetection& detection(MechanismType type);

  PerceptionOptions options_;
  std::map<MechanismType, MechanismDetection> detections_;
  std::vector<PlanarRegion> lastRegions_;
  std::uint64_t frameCount_ = 0;
};

void writePerceptionCsvHeader(std::ostream& out);
void writePerceptionCsvRow(std::ostream& out, const PerceptionRecord& r);

}  // namespace doorway
