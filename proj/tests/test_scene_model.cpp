#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>

#include "test_util.hpp"

using namespace hsc;

namespace {

SceneModel tiny_scene() {
  std::vector<CameraRecord> cams{testutil::camera(3), testutil::camera(7)};
  std::vector<PointRecord> pts(2);
  pts[0].id = 10;
  pts[0].position = {1, 2, 3};
  pts[0].descriptor = filled_descriptor(5);
  pts[0].observations = {{7, {10.5, 20.25}}, {3, {0.0, 0.0}}};
  pts[1].id = 11;
  pts[1].position = {-1, 0.5, 2};
  pts[1].descriptor = filled_descriptor(200);
  pts[1].observations = {{3, {639.5, 479.5}}};
  return SceneModel(cams, pts);
}

}  // namespace

TEST(Descriptor, MeanOfSingletonIsIdentity) {
  Rng rng(3);
  const Descriptor d = testutil::random_descriptor(rng);
  const std::vector<Descriptor> one{d};
  EXPECT_EQ(mean_descriptor(one), d);
}

TEST(Descriptor, MeanRoundsHalfUp) {
  const std::vector<Descriptor> two{filled_descriptor(0), filled_descriptor(2)};
  EXPECT_EQ(mean_descriptor(two), filled_descriptor(1));
  const std::vector<Descriptor> three{filled_descriptor(0), filled_descriptor(1), filled_descriptor(2)};
  EXPECT_EQ(mean_descriptor(three), filled_descriptor(1));
  const std::vector<Descriptor> half{filled_descriptor(0), filled_descriptor(1)};
  EXPECT_EQ(mean_descriptor(half), filled_descriptor(1));  // 0.5 rounds up
  const std::vector<Descriptor> top{filled_descriptor(255), filled_descriptor(254)};
  EXPECT_EQ(mean_descriptor(top), filled_descriptor(255));
}

TEST(Descriptor, MeanOfEmptyThrows) {
  EXPECT_THROW(mean_descriptor(std::vector<Descriptor>{}), std::invalid_argument);
}

TEST(Descriptor, SquaredDistanceMatchesNaiveSum) {
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    const Descriptor a = testutil::random_descriptor(rng), b = testutil::random_descriptor(rng);
    std::int64_t expect = 0;
    for (std::size_t i = 0; i < kDescriptorDim; ++i) expect += (int{a[i]} - int{b[i]}) * (int{a[i]} - int{b[i]});
    EXPECT_EQ(squared_distance(a, b), expect);
  }
  EXPECT_EQ(squared_distance(filled_descriptor(0), filled_descriptor(255)), 128LL * 255 * 255);
}

TEST(SceneModel, EmptySceneIsValid) {
  const SceneModel m({}, {});
  EXPECT_TRUE(m.empty());
  EXPECT_EQ(m.visibility().edge_count(), 0u);
}

TEST(SceneModel, VisibilityMatchesObservations) {
  const SceneModel m = tiny_scene();
  const auto c0 = m.visibility().cameras_of(0);
  ASSERT_EQ(c0.size(), 2u);
  EXPECT_EQ(c0[0], 3u);
  EXPECT_EQ(c0[1], 7u);
  EXPECT_TRUE(m.visibility().observes(3, 1));
  EXPECT_FALSE(m.visibility().observes(7, 1));
  EXPECT_EQ(m.visibility().points_of(3).size(), 2u);
  EXPECT_EQ(m.visibility().points_of(7).size(), 1u);
  EXPECT_EQ(m.visibility().edge_count(), 3u);
}

TEST(SceneModel, RejectsDanglingCameraNamingPoint) {
  std::vector<PointRecord> pts(1);
  pts[0].id = 42;
  pts[0].observations = {{99, {1, 1}}};
  try {
    SceneModel m({testutil::camera(0)}, pts);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("id 42"), std::string::npos) << msg;
    EXPECT_NE(msg.find("99"), std::string::npos) << msg;
  }
}

TEST(SceneModel, RejectsInvalidRecords) {
  std::vector<PointRecord> pts(1);
  pts[0].id = 1;
  pts[0].observations = {{0, {640.0, 10.0}}};  // x == width is outside [0, w)
  EXPECT_THROW(SceneModel({testutil::camera(0)}, pts), ValidationError);

  pts[0].observations = {};
  EXPECT_THROW(SceneModel({testutil::camera(0)}, pts), ValidationError);

  pts[0].observations = {{0, {1, 1}}, {0, {2, 2}}};
  EXPECT_THROW(SceneModel({testutil::camera(0)}, pts), ValidationError);

  EXPECT_THROW(SceneModel({testutil::camera(0), testutil::camera(0)}, {}), ValidationError);

  CameraRecord bad = testutil::camera(1);
  bad.pose.rotation(0, 0) = 1.0 + 1e-6;
  EXPECT_THROW(SceneModel({bad}, {}), ValidationError);

  CameraRecord no_focal = testutil::camera(2);
  no_focal.intrinsics.focal = 0.0;
  EXPECT_THROW(SceneModel({no_focal}, {}), ValidationError);
}

TEST(SceneModel, SortedIntersects) {
  const std::vector<CameraId> a{1, 4, 9}, b{2, 3, 9}, c{0, 2, 5};
  EXPECT_TRUE(sorted_intersects(a, b));
  EXPECT_FALSE(sorted_intersects(a, c));
  EXPECT_FALSE(sorted_intersects(a, std::vector<CameraId>{}));
}

TEST(SceneIo, EmptyBinarySceneIs24Bytes) {
  const SceneModel m({}, {});
  const auto dir = testutil::temp_dir("empty");
  EXPECT_EQ(save_scene(m, dir / "e.hsc", SceneFormat::kBinary), 24u);
  EXPECT_EQ(std::filesystem::file_size(dir / "e.hsc"), 24u);
  EXPECT_TRUE(load_scene(dir / "e.hsc", SceneFormat::kBinary).empty());
}

TEST(SceneIo, BinarySizeMatchesLayoutFormula) {
  const SceneModel m = tiny_scene();
  // header + 2 cameras + (point with 2 observations) + (point with 1).
  const std::uint64_t expect = 24 + 2 * 132 + (160 + 2 * 20) + (160 + 1 * 20);
  EXPECT_EQ(scene_binary_size(m), expect);
  EXPECT_EQ(serialize_scene_binary(m).size(), expect);
}

TEST(SceneIo, BinaryFixpointAndEquality) {
  Rng rng(11);
  const SceneModel m = testutil::random_cover_scene(rng, 40, 6);
  const auto bytes = serialize_scene_binary(m);
  const SceneModel back = parse_scene_binary(bytes);
  EXPECT_EQ(back, m);
  EXPECT_EQ(serialize_scene_binary(back), bytes);
}

TEST(SceneIo, JsonFixpointAndSchema) {
  Rng rng(12);
  const SceneModel m = testutil::random_cover_scene(rng, 25, 4);
  const auto dir = testutil::temp_dir("json");
  const auto n = save_scene(m, dir / "s.json", SceneFormat::kJson);
  EXPECT_EQ(n, std::filesystem::file_size(dir / "s.json"));
  const SceneModel back = load_scene(dir / "s.json", SceneFormat::kJson);
  EXPECT_EQ(back, m);
  save_scene(back, dir / "t.json", SceneFormat::kJson);
  EXPECT_EQ(read_file_text(dir / "s.json"), read_file_text(dir / "t.json"));

  const auto j = nlohmann::json::parse(read_file_text(dir / "s.json"));
  ASSERT_EQ(j.at("points").size(), 25u);
  for (const auto& p : j.at("points")) EXPECT_EQ(p.at("descriptor").size(), 128u);
}

TEST(SceneIo, FileRoundTripThroughDisk) {
  Rng rng(13);
  const SceneModel m = testutil::random_cover_scene(rng, 30, 5);
  const auto dir = testutil::temp_dir("disk");
  const auto n = save_scene(m, dir / "a.hsc", SceneFormat::kBinary);
  EXPECT_EQ(n, scene_binary_size(m));
  const SceneModel back = load_scene(dir / "a.hsc", SceneFormat::kBinary);
  save_scene(back, dir / "b.hsc", SceneFormat::kBinary);
  EXPECT_EQ(read_file_bytes(dir / "a.hsc"), read_file_bytes(dir / "b.hsc"));
}

TEST(SceneIo, MalformedBinaryIsRejected) {
  auto bytes = serialize_scene_binary(tiny_scene());
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(parse_scene_binary(bad_magic), FormatError);
  auto truncated = bytes;
  truncated.resize(truncated.size() - 5);
  EXPECT_THROW(parse_scene_binary(truncated), FormatError);
  auto trailing = bytes;
  trailing.push_back(0);
  EXPECT_THROW(parse_scene_binary(trailing), FormatError);
  EXPECT_THROW(load_scene("/nonexistent/dir/x.hsc", SceneFormat::kBinary), Error);
}

TEST(SceneIo, QueriesRoundTrip) {
  const auto gen = generate_synthetic_scene(testutil::small_spec(2));
  const auto dir = testutil::temp_dir("queries");
  save_queries(gen.queries, dir / "q.json");
  const auto back = load_queries(dir / "q.json");
  EXPECT_EQ(back, gen.queries);
}

TEST(Synthetic, DeterministicForSeed) {
  const auto a = generate_synthetic_scene(testutil::small_spec(5));
  const auto b = generate_synthetic_scene(testutil::small_spec(5));
  EXPECT_EQ(serialize_scene_binary(a.scene), serialize_scene_binary(b.scene));
  EXPECT_EQ(a.queries, b.queries);
  const auto c = generate_synthetic_scene(testutil::small_spec(6));
  EXPECT_NE(serialize_scene_binary(a.scene), serialize_scene_binary(c.scene));
}

TEST(Synthetic, StandardSceneInvariants) {
  const auto gen = generate_synthetic_scene(testutil::standard_spec(1));
  EXPECT_EQ(gen.scene.points().size(), 10000u);
  EXPECT_EQ(gen.scene.cameras().size(), 50u);
  EXPECT_EQ(gen.queries.size(), 20u);
  for (const auto& c : gen.scene.cameras()) EXPECT_GE(gen.scene.visibility().points_of(c.id).size(), 50u);
  for (const auto& p : gen.scene.points()) EXPECT_GE(p.observations.size(), 2u);
  std::size_t off_grid = 0;
  for (const auto& p : gen.scene.points()) {
    for (int i = 0; i < 3; ++i) off_grid += static_cast<double>(static_cast<float>(p.position[i])) != p.position[i];
  }
  EXPECT_EQ(off_grid, 0u) << "positions must survive float storage exactly";
  for (const auto& q : gen.queries) {
    ASSERT_TRUE(q.ground_truth.has_value());
    for (const auto& f : q.features) EXPECT_TRUE(q.intrinsics.contains(f.pixel));
  }
}

TEST(Synthetic, NoiselessQueriesReprojectExactly) {
  auto spec = testutil::small_spec(7);
  spec.noise_px = 0.0;
  const auto gen = generate_synthetic_scene(spec);
  std::size_t checked = 0;
  for (const auto& q : gen.queries) {
    for (const auto& f : q.features) {
      if (f.true_point < 0) continue;
      const auto& p = gen.scene.points()[static_cast<std::size_t>(f.true_point)];
      EXPECT_LT(reprojection_error(*q.ground_truth, q.intrinsics, f.pixel, p.position), 1e-9);
      ++checked;
    }
  }
  EXPECT_GT(checked, 100u);
}

TEST(Synthetic, ObservationsReprojectInDatabaseCameras) {
  const auto gen = generate_synthetic_scene(testutil::small_spec(8));
  for (const auto& p : gen.scene.points()) {
    for (const auto& o : p.observations) {
      const auto& c = gen.scene.camera(o.camera);
      EXPECT_LT(reprojection_error(c.pose, c.intrinsics, o.pixel, p.position), 1e-6);
    }
  }
}

TEST(Synthetic, InfeasibleSpecFailsWithDiagnostics) {
  auto spec = testutil::small_spec(9);
  spec.min_points_per_camera = 100000;
  spec.n_points = 200;
  spec.max_retries = 2;
  try {
    generate_synthetic_scene(spec);
    FAIL() << "expected failure";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("after 2 attempts"), std::string::npos) << e.what();
  }
  spec.n_cameras = 1;
  EXPECT_THROW(generate_synthetic_scene(spec), std::invalid_argument);
}
