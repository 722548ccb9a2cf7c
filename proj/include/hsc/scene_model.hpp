#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "hsc/descriptor.hpp"
#include "hsc/error.hpp"
#include "hsc/geometry.hpp"

namespace hsc {

using CameraId = std::uint32_t;
using PointId = std::uint32_t;

struct Observation {
  CameraId camera = 0;
  Eigen::Vector2d pixel = Eigen::Vector2d::Zero();

  bool operator==(const Observation&) const = default;
};

struct CameraRecord {
  CameraId id = 0;
  Intrinsics intrinsics;
  Pose pose;

  bool operator==(const CameraRecord&) const = default;
};

struct PointRecord {
  PointId id = 0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Descriptor descriptor{};
  std::vector<Observation> observations;

  bool operator==(const PointRecord&) const = default;
};

/// One detected query feature. `true_point` is ground-truth metadata carried
/// by synthetic queries (-1 for clutter or unknown); localization never reads it.
struct Feature {
  Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
  Descriptor descriptor{};
  std::int64_t true_point = -1;

  bool operator==(const Feature&) const = default;
};

struct QueryImage {
  std::uint32_t id = 0;
  Intrinsics intrinsics;
  std::vector<Feature> features;
  std::optional<Pose> ground_truth;

  bool operator==(const QueryImage&) const = default;
};

/// Bipartite point/camera adjacency (the visibility matrix M stored sparse).
/// Camera lists per point are sorted ascending so co-visibility tests are a
/// linear merge.
class VisibilityGraph {
 public:
  VisibilityGraph() = default;

  VisibilityGraph(std::span<const CameraRecord> cameras, std::span<const PointRecord> points) {
    cameras_of_point_.resize(points.size());
    for (std::size_t c = 0; c < cameras.size(); ++c) camera_slot_.emplace(cameras[c].id, c);
    points_of_camera_.resize(cameras.size());
    for (std::size_t p = 0; p < points.size(); ++p) {
      auto& cams = cameras_of_point_[p];
      cams.reserve(points[p].observations.size());
      for (const Observation& o : points[p].observations) cams.push_back(o.camera);
      std::sort(cams.begin(), cams.end());
      for (CameraId c : cams) points_of_camera_[camera_slot_.at(c)].push_back(static_cast<std::uint32_t>(p));
    }
  }

  /// Sorted camera ids observing point index `p`.
  [[nodiscard]] std::span<const CameraId> cameras_of(std::size_t p) const { return cameras_of_point_[p]; }
  /// Point indices observed by the camera with the given id.
  [[nodiscard]] std::span<const std::uint32_t> points_of(CameraId camera) const {
    return points_of_camera_[camera_slot_.at(camera)];
  }
  [[nodiscard]] bool observes(CameraId camera, std::size_t p) const {
    const auto& cams = cameras_of_point_[p];
    return std::binary_search(cams.begin(), cams.end(), camera);
  }
  [[nodiscard]] std::size_t edge_count() const {
    std::size_t n = 0;
    for (const auto& c : cameras_of_point_) n += c.size();
    return n;
  }

 private:
  std::vector<std::vector<CameraId>> cameras_of_point_;
  std::vector<std::vector<std::uint32_t>> points_of_camera_;
  std::unordered_map<CameraId, std::size_t> camera_slot_;
};

/// True when two ascending id lists share an element.
inline bool sorted_intersects(std::span<const CameraId> a, std::span<const CameraId> b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return true;
    if (*i < *j) {
      ++i;
    } else {
      ++j;
    }
  }
  return false;
}

/// Immutable SfM scene: cameras, points with mean descriptors and pixel
/// observations, and the derived visibility graph. Construction validates
/// every invariant; afterwards the object is safe for concurrent reads.
class SceneModel {
 public:
  SceneModel() = default;

  SceneModel(std::vector<CameraRecord> cameras, std::vector<PointRecord> points)
      : cameras_(std::move(cameras)), points_(std::move(points)) {
    validate();
    visibility_ = VisibilityGraph(cameras_, points_);
    check_visibility();
  }

  [[nodiscard]] const std::vector<CameraRecord>& cameras() const { return cameras_; }
  [[nodiscard]] const std::vector<PointRecord>& points() const { return points_; }
  [[nodiscard]] const VisibilityGraph& visibility() const { return visibility_; }

  [[nodiscard]] const CameraRecord& camera(CameraId id) const { return cameras_[camera_index_.at(id)]; }
  [[nodiscard]] std::size_t camera_index(CameraId id) const { return camera_index_.at(id); }
  [[nodiscard]] bool has_camera(CameraId id) const { return camera_index_.contains(id); }
  [[nodiscard]] bool empty() const { return cameras_.empty() && points_.empty(); }

  bool operator==(const SceneModel& o) const { return cameras_ == o.cameras_ && points_ == o.points_; }

 private:
  void validate() {
    for (std::size_t i = 0; i < cameras_.size(); ++i) {
      const CameraRecord& c = cameras_[i];
      const std::string where = "camera record " + std::to_string(i) + " (id " + std::to_string(c.id) + ")";
      if (!camera_index_.emplace(c.id, i).second) throw ValidationError(where + ": duplicate camera id");
      if (!c.intrinsics.valid()) throw ValidationError(where + ": invalid intrinsics");
      if (!is_rotation(c.pose.rotation) || !c.pose.center.allFinite()) {
        throw ValidationError(where + ": rotation not orthonormal within 1e-9");
      }
    }
    std::unordered_map<PointId, std::size_t> seen;
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const PointRecord& p = points_[i];
      const std::string where = "point record " + std::to_string(i) + " (id " + std::to_string(p.id) + ")";
      if (!seen.emplace(p.id, i).second) throw ValidationError(where + ": duplicate point id");
      if (!p.position.allFinite()) throw ValidationError(where + ": non-finite position");
      if (p.observations.empty()) throw ValidationError(where + ": no observations");
      std::vector<CameraId> cams;
      for (std::size_t k = 0; k < p.observations.size(); ++k) {
        const Observation& o = p.observations[k];
        auto it = camera_index_.find(o.camera);
        if (it == camera_index_.end()) {
          throw ValidationError(where + ": observation " + std::to_string(k) +
                                " references unknown camera " + std::to_string(o.camera));
        }
        if (!cameras_[it->second].intrinsics.contains(o.pixel)) {
          throw ValidationError(where + ": observation " + std::to_string(k) + " pixel out of bounds of camera " +
                                std::to_string(o.camera));
        }
        cams.push_back(o.camera);
      }
      std::sort(cams.begin(), cams.end());
      if (std::adjacent_find(cams.begin(), cams.end()) != cams.end()) {
        throw ValidationError(where + ": two observations in the same camera");
      }
    }
  }

  // M(i, j) = 1 exactly when camera i observes point j; exhaustive check.
  void check_visibility() const {
    std::size_t forward = 0;
    for (std::size_t p = 0; p < points_.size(); ++p) {
      for (const Observation& o : points_[p].observations) {
        if (!visibility_.observes(o.camera, p)) {
          throw ValidationError("visibility graph missing edge for point record " + std::to_string(p));
        }
        ++forward;
      }
    }
    std::size_t backward = 0;
    for (const CameraRecord& c : cameras_) backward += visibility_.points_of(c.id).size();
    if (forward != visibility_.edge_count() || backward != forward) {
      throw ValidationError("visibility graph edge count mismatch");
    }
  }

  std::vector<CameraRecord> cameras_;
  std::vector<PointRecord> points_;
  VisibilityGraph visibility_;
  std::unordered_map<CameraId, std::size_t> camera_index_;
};

}  // namespace hsc
