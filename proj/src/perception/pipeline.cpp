#include "doorway/perception/pipeline.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>

namespace doorway {

Intrinsics Intrinsics::fromFov(int width, int height, double horizontalFovRad, double verticalFovRad) {
  Intrinsics k;
  k.width = width;
  k.height = height;
  k.cx = (width - 1) / 2.0;
  k.cy = (height - 1) / 2.0;
  k.fx = (width / 2.0) / std::tan(horizontalFovRad / 2.0);
  k.fy = (height / 2.0) / std::tan(verticalFovRad / 2.0);
  return k;
}

std::size_t Mask::count() const { return static_cast<std::size_t>(std::count(data.begin(), data.end(), 1)); }

namespace {

template <bool Erode>
Mask morph(const Mask& mask, int iterations) {
  Mask cur = mask;
  // Only pixels within one step of a set pixel can change.
  int u0 = cur.width, v0 = cur.height, u1 = -1, v1 = -1;
  for (int v = 0; v < cur.height; ++v)
    for (int u = 0; u < cur.width; ++u)
      if (cur.at(u, v)) {
        u0 = std::min(u0, u), u1 = std::max(u1, u), v0 = std::min(v0, v), v1 = std::max(v1, v);
      }
  if (u1 < 0) return cur;
  for (int it = 0; it < iterations; ++it) {
    if (!Erode) u0 = std::max(0, u0 - 1), v0 = std::max(0, v0 - 1), u1 = std::min(cur.width - 1, u1 + 1),
                v1 = std::min(cur.height - 1, v1 + 1);
    Mask next = cur;
    auto get = [&](int x, int y) { return x >= 0 && y >= 0 && x < cur.width && y < cur.height && cur.at(x, y); };
    for (int v = v0; v <= v1; ++v) {
      for (int u = u0; u <= u1; ++u) {
        const bool c = get(u, v);
        const bool l = get(u - 1, v), r = get(u + 1, v), t = get(u, v - 1), b = get(u, v + 1);
        next.set(u, v, Erode ? (c && l && r && t && b) : (c || l || r || t || b));
      }
    }
    cur = std::move(next);
  }
  return cur;
}

/// Decimated cloud, structure of arrays.
struct Cloud {
  std::vector<Vec3> world;
  std::vector<Vec3> rayCamera;  ///< unit-depth camera ray
  std::vector<double> depth;
  std::size_t size() const { return world.size(); }
};

struct Plane {
  Vec3 n;
  double d;  ///< n·x + d = 0
  double distance(const Vec3& x) const { return std::abs(n.dot(x) + d); }
};

std::optional<Plane> fitLeastSquares(const Cloud& cloud, const std::vector<int>& idx) {
  if (idx.size() < 3) return std::nullopt;
  Vec3 mean = Vec3::Zero();
  for (int i : idx) mean += cloud.world[i];
  mean /= static_cast<double>(idx.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (int i : idx) {
    const Vec3 q = cloud.world[i] - mean;
    cov.noalias() += q * q.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  const Vec3 n = es.eigenvectors().col(0).normalized();
  return Plane{n, -n.dot(mean)};
}

std::vector<int> inliersOf(const Cloud& cloud, const std::vector<int>& pool, const Plane& p, double tolerance) {
  std::vector<int> out;
  out.reserve(pool.size());
  for (int i : pool)
    if (p.distance(cloud.world[i]) <= tolerance) out.push_back(i);
  return out;
}

}  // namespace

Mask erodeMask(const Mask& mask, int iterations) { return morph<true>(mask, iterations); }
Mask dilateMask(const Mask& mask, int iterations) { return morph<false>(mask, iterations); }

std::optional<Vec3> maskCentroid(const Mask& mask, const DepthImage& depth, const Intrinsics& k, const Pose& cameraPose,
                                 int sampleLimit) {
  std::vector<std::pair<int, int>> pixels;
  for (int v = 0; v < mask.height; ++v)
    for (int u = 0; u < mask.width; ++u)
      if (mask.at(u, v) && depth.valid(u, v)) pixels.emplace_back(u, v);
  if (pixels.empty() || sampleLimit <= 0) return std::nullopt;
  const std::size_t n = pixels.size();
  const std::size_t m = std::min<std::size_t>(n, static_cast<std::size_t>(sampleLimit));
  Vec3 sum = Vec3::Zero();
  for (std::size_t i = 0; i < m; ++i) {
    const auto [u, v] = pixels[i * n / m];
    sum += k.deproject(u, v, depth.at(u, v));
  }
  return cameraPose.transformPoint(sum / static_cast<double>(m));
}

Vec3 alphaFilter(const Vec3& previous, const Vec3& measurement, double alpha) {
  return previous + alpha * (measurement - previous);
}

std::vector<PlanarRegion> extractPlanes(const DepthImage& depth, const Intrinsics& k, const Pose& cameraPose,
                                        const PlaneExtractionOptions& o) {
  Cloud cloud;
  const int stride = std::max(1, o.gridStride);
  const std::size_t capacity = static_cast<std::size_t>((depth.width + stride - 1) / stride) *
                               static_cast<std::size_t>((depth.height + stride - 1) / stride);
  cloud.world.reserve(capacity);
  cloud.rayCamera.reserve(capacity);
  cloud.depth.reserve(capacity);
  const Eigen::Matrix3d rotation = cameraPose.orientation.toRotationMatrix();
  for (int v = 0; v < depth.height; v += stride) {
    for (int u = 0; u < depth.width; u += stride) {
      if (!depth.valid(u, v)) continue;
      const Vec3 ray = k.ray(u, v);
      const double z = depth.at(u, v);
      cloud.world.push_back(rotation * (z * ray) + cameraPose.position);
      cloud.rayCamera.push_back(ray);
      cloud.depth.push_back(z);
    }
  }
  std::vector<PlanarRegion> regions;
  if (cloud.size() < 3) return regions;

  std::mt19937_64 rng(o.seed);
  std::vector<int> remaining(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) remaining[i] = static_cast<int>(i);
  const double pixelScale = static_cast<double>(stride * stride) / (k.fx * k.fy);

  while (static_cast<int>(regions.size()) < o.maxPlanes && static_cast<int>(remaining.size()) >= o.minInliers) {
    std::vector<int> scoring;
    const std::size_t n = remaining.size();
    const std::size_t m = std::min<std::size_t>(n, static_cast<std::size_t>(o.scoringSampleSize));
    for (std::size_t i = 0; i < m; ++i) scoring.push_back(remaining[i * n / m]);

    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::optional<Plane> best;
    std::size_t bestScore = 0;
    int needed = o.iterations;
    for (int it = 0; it < std::min(needed, o.iterations); ++it) {
      const Vec3& a = cloud.world[remaining[pick(rng)]];
      const Vec3& b = cloud.world[remaining[pick(rng)]];
      const Vec3& c = cloud.world[remaining[pick(rng)]];
      const Vec3 cr = (b - a).cross(c - a);
      if (cr.norm() < 1e-9) continue;
      const Plane p{cr.normalized(), -cr.normalized().dot(a)};
      std::size_t score = 0;
      for (int i : scoring)
        if (p.distance(cloud.world[i]) <= o.inlierDistance) ++score;
      if (score > bestScore) {
        bestScore = score;
        best = p;
        // Stop once a better hypothesis is unlikely at the configured confidence.
        const double w = static_cast<double>(score) / static_cast<double>(scoring.size());
        const double miss = 1.0 - w * w * w;
        if (miss <= 0.0)
          needed = 0;
        else if (miss < 1.0)
          needed = std::max(o.minIterations, static_cast<int>(std::ceil(std::log(1.0 - o.confidence) / std::log(miss))));
      }
    }
    if (!best) break;
    std::vector<int> inliers = inliersOf(cloud, remaining, *best, o.inlierDistance);
    if (const auto fit = fitLeastSquares(cloud, inliers)) {
      std::vector<int> next = inliersOf(cloud, remaining, *fit, o.inlierDistance);
      if (next.size() >= inliers.size()) inliers = std::move(next);
    }
    if (static_cast<int>(inliers.size()) < o.minInliers) break;
    best = fitLeastSquares(cloud, inliers);

    PlanarRegion region;
    Vec3 mean = Vec3::Zero();
    for (int i : inliers) mean += cloud.world[i];
    mean /= static_cast<double>(inliers.size());
    region.normal = best->n;
    if (region.normal.dot(cameraPose.position - mean) < 0.0) region.normal = -region.normal;
    region.pointOnPlane = mean;
    region.inlierCount = static_cast<int>(inliers.size());
    // Footprint of one pixel: z² cos(a) / (fx fy |cos(b)|), a off the optical axis, b off the normal.
    const Vec3 normalCamera = rotation.transpose() * region.normal;
    for (int i : inliers) {
      const Vec3& ray = cloud.rayCamera[i];
      const double cosAlpha = 1.0 / ray.norm();
      const double cosBeta = std::max(0.05, std::abs(normalCamera.dot(ray)) * cosAlpha);
      region.areaEstimate += cloud.depth[i] * cloud.depth[i] * cosAlpha * pixelScale / cosBeta;
    }
    regions.push_back(region);

    std::vector<char> taken(cloud.size(), 0);
    for (int i : inliers) taken[static_cast<std::size_t>(i)] = 1;
    std::erase_if(remaining, [&](int i) { return taken[static_cast<std::size_t>(i)] != 0; });
  }
  return regions;
}

std::optional<PlanarRegion> associateMechanismPlane(const Vec3& centroid, const std::vector<PlanarRegion>& regions,
                                                    const AssociationOptions& o) {
  std::optional<PlanarRegion> best;
  double bestDistance = 0.0;
  for (const auto& r : regions) {
    const double d = std::abs(r.normal.dot(centroid - r.pointOnPlane));
    if (d > o.maxDistance) continue;
    if (std::abs(r.normal.z()) > o.maxVerticalComponent) continue;
    if (r.areaEstimate < o.minArea) continue;
    if (!best || d < bestDistance) {
      best = r;
      bestDistance = d;
    }
  }
  return best;
}

Quat mechanismOrientation(const Vec3& normal) {
  Vec3 x(-normal.x(), -normal.y(), 0.0);
  if (x.norm() < 1e-9) x = Vec3::UnitX();
  x.normalize();
  Eigen::Matrix3d r;
  r.col(0) = x;
  r.col(1) = Vec3::UnitZ().cross(x);
  r.col(2) = Vec3::UnitZ();
  return Quat(r);
}

void updateStability(MechanismDetection& d, bool hit, FrameTree* frames) {
  d.window.push(hit);
  if (frames && d.stable() && d.hasPlane && d.initialized)
    frames->addFrame(kDetectedMechanismFrame, Pose{d.filteredCentroid, mechanismOrientation(d.planeNormal)});
}

PerceptionPipeline::PerceptionPipeline(PerceptionOptions options) : options_(std::move(options)) {}

MechanismDetection& PerceptionPipeline::detection(MechanismType type) {
  auto it = detections_.find(type);
  if (it == detections_.end()) {
    MechanismDetection d;
    d.type = type;
    d.window = StabilityWindow(static_cast<std::size_t>(options_.windowSize), options_.stableFraction);
    it = detections_.emplace(type, std::move(d)).first;
  }
  return it->second;
}

std::vector<PerceptionRecord> PerceptionPipeline::process(const SensorFrame& frame, FrameTree* frames) {
  ++frameCount_;
  lastRegions_.clear();
  bool planesDone = false;
  std::vector<PerceptionRecord> records;
  std::vector<MechanismType> seen;

  for (const ClassMask& cm : frame.masks) {
    seen.push_back(cm.type);
    MechanismDetection& d = detection(cm.type);
    PerceptionRecord rec;
    rec.timestamp = frame.timestamp;
    rec.type = cm.type;
    const Mask eroded = erodeMask(cm.mask, options_.erosionIterations);
    const auto c = maskCentroid(eroded, frame.depth, frame.intrinsics, frame.cameraPose, options_.sampleLimit);
    bool hit = false;
    if (c) {
      rec.measured = true;
      d.rawCentroid = *c;
      d.filteredCentroid = d.initialized ? alphaFilter(d.filteredCentroid, *c, options_.alpha) : *c;
      d.initialized = true;
      if (!planesDone) {
        PlaneExtractionOptions po = options_.planes;
        po.seed = options_.planes.seed * 0x9E3779B97F4A7C15ULL + frameCount_;
        lastRegions_ = extractPlanes(frame.depth, frame.intrinsics, frame.cameraPose, po);
        planesDone = true;
      }
      if (const auto region = associateMechanismPlane(*c, lastRegions_, options_.association)) {
        d.planeNormal = region->normal;
        d.hasPlane = true;
        hit = true;
        rec.associated = true;
      }
    }
    updateStability(d, hit, frames);
    rec.rawCentroid = d.rawCentroid;
    rec.filteredCentroid = d.filteredCentroid;
    rec.planeNormal = d.hasPlane ? d.planeNormal : Vec3::Zero();
    rec.stable = d.stable();
    records.push_back(rec);
  }

  for (auto& [type, d] : detections_) {
    if (std::find(seen.begin(), seen.end(), type) != seen.end()) continue;
    updateStability(d, false, frames);
    PerceptionRecord rec;
    rec.timestamp = frame.timestamp;
    rec.type = type;
    rec.rawCentroid = d.rawCentroid;
    rec.filteredCentroid = d.filteredCentroid;
    rec.planeNormal = d.hasPlane ? d.planeNormal : Vec3::Zero();
    rec.stable = d.stable();
    records.push_back(rec);
  }
  return records;
}

std::vector<MechanismDetection> PerceptionPipeline::detections() const {
  std::vector<MechanismDetection> out;
  for (const auto& [type, d] : detections_) out.push_back(d);
  return out;
}

void writePerceptionCsvHeader(std::ostream& out) {
  out << "timestamp,type,measured,raw_x,raw_y,raw_z,filtered_x,filtered_y,filtered_z,associated,normal_x,normal_y,"
         "normal_z,stable\n";
}

void writePerceptionCsvRow(std::ostream& out, const PerceptionRecord& r) {
  const auto v = [&](const Vec3& p) { out << ',' << p.x() << ',' << p.y() << ',' << p.z(); };
  out << r.timestamp << ',' << nlohmann::json(r.type).get<std::string>() << ',' << (r.measured ? 1 : 0);
  v(r.rawCentroid);
  v(r.filteredCentroid);
  out << ',' << (r.associated ? 1 : 0);
  v(r.planeNormal);
  out << ',' << (r.stable ? 1 : 0) << '\n';
}

}  // namespace doorway
