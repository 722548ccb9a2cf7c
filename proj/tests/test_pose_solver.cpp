#include <gtest/gtest.h>

#include <numbers>

#include "test_util.hpp"

using namespace hsc;

TEST(P3P, RecoversGroundTruth) {
  Rng rng(31);
  std::size_t max_solutions = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto c = testutil::random_p3p_case(rng);
    const P3PResult r = solve_p3p(c.corrs, c.intrinsics);
    ASSERT_EQ(r.status, P3PStatus::kOk) << "trial " << trial;
    ASSERT_LE(r.poses.size(), 4u);
    max_solutions = std::max(max_solutions, r.poses.size());
    bool found = false;
    for (const Pose& p : r.poses) {
      EXPECT_TRUE(is_rotation(p.rotation));
      for (const auto& corr : c.corrs) {
        EXPECT_LT(reprojection_error(p, c.intrinsics, corr.pixel, corr.point), 1e-6) << "trial " << trial;
      }
      const PoseError e = pose_error(p, c.truth);
      found = found || (e.position_m < 1e-8 && e.rotation_deg < 1e-8);
    }
    EXPECT_TRUE(found) << "trial " << trial;
  }
  EXPECT_GE(max_solutions, 2u);
}

TEST(P3P, Degeneracies) {
  const Intrinsics k = testutil::small_intrinsics();
  std::array<Correspondence, 3> line{{{{100, 100}, {0, 0, 5}, 0}, {{200, 100}, {1, 0, 5}, 1}, {{300, 100}, {2, 0, 5}, 2}}};
  EXPECT_EQ(solve_p3p(line, k).status, P3PStatus::kCollinear);
  EXPECT_TRUE(solve_p3p(line, k).poses.empty());
  std::array<Correspondence, 3> same_ray{{{{100, 100}, {0, 0, 5}, 0}, {{100, 100}, {1, 0, 5}, 1}, {{300, 100}, {0, 1, 5}, 2}}};
  EXPECT_EQ(solve_p3p(same_ray, k).status, P3PStatus::kCoincidentRays);
  std::array<Correspondence, 2> two{};
  EXPECT_THROW(solve_p3p(two, k), std::invalid_argument);
}

TEST(ReprojectionError, Conventions) {
  const Intrinsics k = testutil::small_intrinsics();
  const Pose p;  // identity at origin, looking along +z
  EXPECT_EQ(reprojection_error(p, k, {320, 240}, {0, 0, 3}), 0.0);
  EXPECT_TRUE(std::isinf(reprojection_error(p, k, {320, 240}, {0, 0, -3})));
  EXPECT_TRUE(std::isinf(reprojection_error(p, k, {320, 240}, {0, 0, 0})));
  // One normalized unit at unit depth moves the projection by `focal` pixels.
  EXPECT_NEAR(reprojection_error(p, k, {320, 240}, {1, 0, 1}), k.focal, 1e-9);
}

TEST(PoseError, KnownAngles) {
  Rng rng(32);
  const Pose a{Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix(), {1, 2, 3}};
  EXPECT_EQ(pose_error(a, a).position_m, 0.0);
  EXPECT_EQ(pose_error(a, a).rotation_deg, 0.0);
  for (int i = 0; i < 50; ++i) {
    const Eigen::Vector3d axis = Eigen::Vector3d(normal(rng, 0, 1), normal(rng, 0, 1), normal(rng, 0, 1)).normalized();
    Pose flipped = a;
    flipped.rotation = Eigen::AngleAxisd(std::numbers::pi, axis).toRotationMatrix() * a.rotation;
    EXPECT_NEAR(pose_error(flipped, a).rotation_deg, 180.0, 1e-6);
    Pose tilted = a;
    tilted.rotation = a.rotation * Eigen::AngleAxisd(2.5 * std::numbers::pi / 180.0, axis).toRotationMatrix();
    EXPECT_NEAR(pose_error(tilted, a).rotation_deg, 2.5, 1e-9);
    tilted.center += Eigen::Vector3d(3, 4, 0);
    EXPECT_NEAR(pose_error(tilted, a).position_m, 5.0, 1e-12);
    // Symmetric and non-negative.
    EXPECT_NEAR(pose_error(tilted, a).rotation_deg, pose_error(a, tilted).rotation_deg, 1e-12);
    EXPECT_GE(pose_error(tilted, a).rotation_deg, 0.0);
  }
  // Tiny angles stay accurate.
  Pose tiny = a;
  tiny.rotation = a.rotation * Eigen::AngleAxisd(1e-9, Eigen::Vector3d::UnitX()).toRotationMatrix();
  EXPECT_NEAR(pose_error(tiny, a).rotation_deg, 1e-9 * 180.0 / std::numbers::pi, 1e-15);
}

TEST(ReprojectionError, RigidInvariance) {
  Rng rng(33);
  for (int i = 0; i < 100; ++i) {
    const auto c = testutil::random_p3p_case(rng);
    const Eigen::Matrix3d g = Eigen::AngleAxisd(uniform_real(rng, 0, 3), Eigen::Vector3d::UnitZ()).toRotationMatrix() *
                              Eigen::AngleAxisd(uniform_real(rng, 0, 3), Eigen::Vector3d::UnitX()).toRotationMatrix();
    const Eigen::Vector3d t(uniform_real(rng, -10, 10), uniform_real(rng, -10, 10), uniform_real(rng, -10, 10));
    // World moves by x -> g x + t; the camera moves with it.
    const Pose moved{c.truth.rotation * g.transpose(), g * c.truth.center + t};
    for (const auto& corr : c.corrs) {
      const Eigen::Vector2d off = corr.pixel + Eigen::Vector2d(uniform_real(rng, -5, 5), uniform_real(rng, -5, 5));
      EXPECT_NEAR(reprojection_error(c.truth, c.intrinsics, off, corr.point),
                  reprojection_error(moved, c.intrinsics, off, g * corr.point + t), 1e-9);
    }
  }
}

TEST(Geometry, LookAtAndTranslation) {
  const Pose p = Pose::look_at({10, 0, 2}, {0, 0, 2});
  EXPECT_TRUE(is_rotation(p.rotation));
  const Eigen::Vector3d ahead = p.to_camera({0, 0, 2});
  EXPECT_NEAR(ahead.x(), 0, 1e-12);
  EXPECT_NEAR(ahead.z(), 10, 1e-12);
  const Pose back = Pose::from_rt(p.rotation, p.translation());
  EXPECT_NEAR((back.center - p.center).norm(), 0, 1e-12);
}
