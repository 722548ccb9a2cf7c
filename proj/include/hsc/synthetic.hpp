#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hsc/descriptor.hpp"
#include "hsc/error.hpp"
#include "hsc/geometry.hpp"
#include "hsc/random.hpp"
#include "hsc/scene_model.hpp"

namespace hsc {

/// Parameters of the synthetic plaza scene: a box-shaped building whose four
/// facades carry the 3D points, database cameras on a ring around it, and
/// held-out query cameras closer to the facades.
struct SyntheticSpec {
  std::uint32_t n_points = 10000;
  std::uint32_t n_cameras = 50;
  std::uint32_t n_queries = 20;
  double noise_px = 1.0;
  std::uint64_t seed = 1;

  std::uint32_t image_width = 800;
  std::uint32_t image_height = 600;
  double focal = 600.0;

  double building_half_size = 10.0;  // facades at x, y = +-half_size
  double building_height = 14.0;
  double camera_ring_radius = 30.0;
  double camera_ring_spread_min = 0.55;  // per-camera radius factor: close-ups to wide shots
  double camera_ring_spread_max = 1.2;
  double query_radius_min = 14.0;
  double query_radius_max = 22.0;
  double max_view_angle_deg = 75.0;  // facade normal vs. viewing ray
  double max_range = 60.0;

  // Texture layout: a share of the points concentrates in Gaussian clumps
  // (ornaments); the rest is spread uniformly over the facades.
  std::uint32_t n_clumps = 16;
  double clump_fraction = 0.6;
  double clump_sigma = 1.2;

  // Appearance: points draw a prototype with Zipf-like frequency, then a
  // +-descriptor_jitter uniform perturbation per dimension.
  std::uint32_t n_prototypes = 256;
  double prototype_skew = 0.8;
  int descriptor_jitter = 8;
  int observation_noise = 3;  // per-observation descriptor noise before averaging
  int query_descriptor_noise = 4;

  double detection_rate = 0.6;  // share of visible points detected in a query
  double clutter_ratio = 0.5;   // clutter features per true feature

  std::uint32_t min_points_per_camera = 50;
  int max_retries = 5;
};

struct SyntheticScene {
  SceneModel scene;
  std::vector<QueryImage> queries;
  int attempts = 1;
  std::vector<std::string> diagnostics;
};

namespace synth_detail {

struct Facade {
  Eigen::Vector3d origin;  // bottom-left corner
  Eigen::Vector3d along;   // unit horizontal direction
  Eigen::Vector3d normal;  // outward
};

inline std::vector<Facade> facades(const SyntheticSpec& s) {
  const double h = s.building_half_size;
  return {
      {{h, -h, 0}, {0, 1, 0}, {1, 0, 0}},
      {{h, h, 0}, {-1, 0, 0}, {0, 1, 0}},
      {{-h, h, 0}, {0, -1, 0}, {-1, 0, 0}},
      {{-h, -h, 0}, {1, 0, 0}, {0, -1, 0}},
  };
}

// Positions are rounded to float so that the 32-bit storage of compressed
// models reproduces them exactly. The volatile store keeps GCC's SLP
// vectorizer from dropping the round trip at -O3.
inline Eigen::Vector3d to_float_grid(const Eigen::Vector3d& p) {
  return p.unaryExpr([](double v) {
    volatile float f = static_cast<float>(v);
    return static_cast<double>(f);
  });
}

inline std::uint8_t clamp_byte(int v) { return static_cast<std::uint8_t>(std::clamp(v, 0, 255)); }

inline Descriptor perturb(const Descriptor& base, int amplitude, Rng& rng) {
  Descriptor d{};
  std::uniform_int_distribution<int> noise(-amplitude, amplitude);
  for (std::size_t i = 0; i < kDescriptorDim; ++i) d[i] = clamp_byte(int{base[i]} + noise(rng));
  return d;
}

struct Visibility {
  const SyntheticSpec& spec;
  Intrinsics intrinsics;

  std::optional<Eigen::Vector2d> observe(const Pose& pose, const Eigen::Vector3d& p,
                                         const Eigen::Vector3d& normal) const {
    const Eigen::Vector3d ray = pose.center - p;
    const double dist = ray.norm();
    if (dist > spec.max_range || dist <= 0.0) return std::nullopt;
    if (normal.dot(ray) / dist < std::cos(spec.max_view_angle_deg * std::numbers::pi / 180.0)) return std::nullopt;
    auto px = project(pose, intrinsics, p);
    if (!px || !intrinsics.contains(*px)) return std::nullopt;
    return px;
  }
};

inline Pose jittered_look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target, double roll_deg, Rng& rng) {
  Pose p = Pose::look_at(eye, target);
  const double roll = uniform_real(rng, -roll_deg, roll_deg) * std::numbers::pi / 180.0;
  p.rotation = Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitZ()).toRotationMatrix() * p.rotation;
  return p;
}

}  // namespace synth_detail

/// Deterministic synthetic scene + held-out queries with ground truth.
/// Throws std::invalid_argument on a bad spec and hsc::Error when no attempt
/// yields a feasible scene within `max_retries`.
inline SyntheticScene generate_synthetic_scene(const SyntheticSpec& spec) {
  using namespace synth_detail;
  if (spec.n_points < 1) throw std::invalid_argument("synthetic scene needs n_points >= 1");
  if (spec.n_cameras < 2) throw std::invalid_argument("synthetic scene needs n_cameras >= 2");

  Intrinsics intr;
  intr.focal = spec.focal;
  intr.width = spec.image_width;
  intr.height = spec.image_height;
  intr.cx = spec.image_width / 2.0;
  intr.cy = spec.image_height / 2.0;
  const Visibility vis{spec, intr};
  const auto walls = facades(spec);
  const double wall_width = 2.0 * spec.building_half_size;

  SyntheticScene out;
  for (int attempt = 0; attempt < spec.max_retries; ++attempt) {
    out.attempts = attempt + 1;
    const std::uint64_t base = derive_seed(spec.seed, static_cast<std::uint64_t>(attempt));
    Rng cam_rng(derive_seed(base, 1));
    Rng point_rng(derive_seed(base, 2));
    Rng desc_rng(derive_seed(base, 3));
    Rng query_rng(derive_seed(base, 4));

    // Database cameras on a ring, each aimed at a jittered spot on the building.
    std::vector<CameraRecord> cameras(spec.n_cameras);
    for (std::uint32_t i = 0; i < spec.n_cameras; ++i) {
      const double az = 2.0 * std::numbers::pi * (i + uniform_real(cam_rng, -0.3, 0.3)) / spec.n_cameras;
      const double r = spec.camera_ring_radius * uniform_real(cam_rng, spec.camera_ring_spread_min, spec.camera_ring_spread_max);
      const Eigen::Vector3d eye(r * std::cos(az), r * std::sin(az), 1.6 + uniform_real(cam_rng, -0.3, 0.3));
      const Eigen::Vector3d target(uniform_real(cam_rng, -5, 5), uniform_real(cam_rng, -5, 5),
                                   uniform_real(cam_rng, 4, 9));
      cameras[i].id = i;
      cameras[i].intrinsics = intr;
      cameras[i].pose = jittered_look_at(eye, target, 5.0, cam_rng);
    }

    // Appearance prototypes with skewed frequencies.
    std::vector<Descriptor> prototypes(spec.n_prototypes);
    std::uniform_int_distribution<int> proto_value(20, 235);
    for (auto& p : prototypes)
      for (auto& v : p) v = static_cast<std::uint8_t>(proto_value(desc_rng));
    std::vector<double> weights(spec.n_prototypes);
    for (std::uint32_t r = 0; r < spec.n_prototypes; ++r) weights[r] = 1.0 / std::pow(r + 1.0, spec.prototype_skew);
    std::discrete_distribution<std::uint32_t> pick_proto(weights.begin(), weights.end());

    struct Clump {
      std::size_t wall;
      double u, z;
    };
    std::vector<Clump> clumps(spec.n_clumps);
    for (auto& c : clumps) {
      c.wall = uniform_index(point_rng, walls.size());
      c.u = uniform_real(point_rng, 1.5, wall_width - 1.5);
      c.z = uniform_real(point_rng, 1.5, spec.building_height - 1.5);
    }

    std::vector<PointRecord> points;
    std::vector<Descriptor> appearance;  // per-point descriptor before observation noise
    std::vector<Eigen::Vector3d> normals;
    points.reserve(spec.n_points);
    const std::uint64_t max_draws = 50ull * spec.n_points + 1000;
    std::uint64_t draws = 0;
    while (points.size() < spec.n_points && draws < max_draws) {
      ++draws;
      std::size_t wall;
      double u, z;
      if (!clumps.empty() && uniform_real(point_rng, 0.0, 1.0) < spec.clump_fraction) {
        const Clump& c = clumps[uniform_index(point_rng, clumps.size())];
        wall = c.wall;
        u = normal(point_rng, c.u, spec.clump_sigma);
        z = normal(point_rng, c.z, spec.clump_sigma);
      } else {
        wall = uniform_index(point_rng, walls.size());
        u = uniform_real(point_rng, 0.0, wall_width);
        z = uniform_real(point_rng, 0.0, spec.building_height);
      }
      if (u < 0.05 || u > wall_width - 0.05 || z < 0.05 || z > spec.building_height - 0.05) continue;
      const Facade& f = walls[wall];
      const Eigen::Vector3d pos = to_float_grid(f.origin + u * f.along + Eigen::Vector3d(0, 0, z));

      PointRecord p;
      p.id = static_cast<PointId>(points.size());
      p.position = pos;
      for (const CameraRecord& c : cameras) {
        if (auto px = vis.observe(c.pose, pos, f.normal)) p.observations.push_back({c.id, *px});
      }
      if (p.observations.size() < 2) continue;

      const Descriptor look = perturb(prototypes[pick_proto(desc_rng)], spec.descriptor_jitter, desc_rng);
      std::vector<Descriptor> per_obs;
      per_obs.reserve(p.observations.size());
      for (std::size_t k = 0; k < p.observations.size(); ++k) {
        per_obs.push_back(perturb(look, spec.observation_noise, desc_rng));
      }
      p.descriptor = mean_descriptor(per_obs);
      points.push_back(std::move(p));
      appearance.push_back(look);
      normals.push_back(f.normal);
    }
    if (points.size() < spec.n_points) {
      out.diagnostics.push_back("attempt " + std::to_string(attempt) + ": only " + std::to_string(points.size()) +
                                " points observed by >= 2 cameras");
      continue;
    }

    std::vector<std::size_t> per_camera(cameras.size(), 0);
    for (const PointRecord& p : points)
      for (const Observation& o : p.observations) ++per_camera[o.camera];
    const std::size_t required = std::min<std::size_t>(spec.min_points_per_camera, spec.n_points);
    const auto worst = std::min_element(per_camera.begin(), per_camera.end());
    if (*worst < required) {
      out.diagnostics.push_back("attempt " + std::to_string(attempt) + ": camera " +
                                std::to_string(worst - per_camera.begin()) + " observes only " +
                                std::to_string(*worst) + " points");
      continue;
    }

    // Queries: closer viewpoints than the database ring, aimed at the building.
    std::vector<QueryImage> queries;
    for (std::uint32_t qi = 0; qi < spec.n_queries; ++qi) {
      QueryImage q;
      q.id = qi;
      q.intrinsics = intr;
      for (int tries = 0; tries < 100; ++tries) {
        const double az = uniform_real(query_rng, 0.0, 2.0 * std::numbers::pi);
        const double r = uniform_real(query_rng, spec.query_radius_min, spec.query_radius_max);
        const Eigen::Vector3d eye(r * std::cos(az), r * std::sin(az), 1.6 + uniform_real(query_rng, -0.3, 0.3));
        const Eigen::Vector3d target(uniform_real(query_rng, -5, 5), uniform_real(query_rng, -5, 5),
                                     uniform_real(query_rng, 3, 9));
        const Pose pose = jittered_look_at(eye, target, 8.0, query_rng);
        q.features.clear();
        for (std::size_t pi = 0; pi < points.size(); ++pi) {
          auto px = vis.observe(pose, points[pi].position, normals[pi]);
          if (!px || uniform_real(query_rng, 0.0, 1.0) >= spec.detection_rate) continue;
          Feature f;
          if (spec.noise_px > 0.0) {
            f.pixel = *px + Eigen::Vector2d(normal(query_rng, 0.0, spec.noise_px), normal(query_rng, 0.0, spec.noise_px));
          } else {
            f.pixel = *px;
          }
          if (!intr.contains(f.pixel)) continue;
          f.descriptor = perturb(appearance[pi], spec.query_descriptor_noise, query_rng);
          f.true_point = points[pi].id;
          q.features.push_back(f);
        }
        if (q.features.size() < 20) continue;
        const auto n_clutter = static_cast<std::size_t>(std::lround(spec.clutter_ratio * q.features.size()));
        for (std::size_t k = 0; k < n_clutter; ++k) {
          Feature f;
          f.pixel = {uniform_real(query_rng, 0.0, intr.width), uniform_real(query_rng, 0.0, intr.height)};
          if (!intr.contains(f.pixel)) continue;
          f.descriptor = perturb(prototypes[pick_proto(query_rng)], spec.descriptor_jitter, query_rng);
          q.features.push_back(f);
        }
        std::shuffle(q.features.begin(), q.features.end(), query_rng);
        q.ground_truth = pose;
        break;
      }
      if (!q.ground_truth) throw Error("synthetic query " + std::to_string(qi) + ": no viewpoint sees >= 20 points");
      queries.push_back(std::move(q));
    }

    out.scene = SceneModel(std::move(cameras), std::move(points));
    out.queries = std::move(queries);
    return out;
  }
  std::string msg = "synthetic scene infeasible after " + std::to_string(spec.max_retries) + " attempts";
  for (const auto& d : out.diagnostics) msg += "; " + d;
  throw Error(msg);
}

}  // namespace hsc
