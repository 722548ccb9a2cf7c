#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hsc/binary_io.hpp"
#include "hsc/scene_model.hpp"

namespace hsc {

enum class SceneFormat { kBinary, kJson };

inline SceneFormat parse_scene_format(std::string_view name) {
  if (name == "binary" || name == "bin") return SceneFormat::kBinary;
  if (name == "json") return SceneFormat::kJson;
  throw std::invalid_argument("unknown scene format '" + std::string(name) + "'");
}

// HSC1 binary layout (little-endian):
//   header  : "HSC1" | version u32 | camera count u64 | point count u64   (24 B)
//   camera  : id u32 | focal, cx, cy f64 | width, height u32 |
//             rotation 9 x f64 (row-major) | center 3 x f64                 (132 B)
//   point   : id u32 | position 3 x f64 | descriptor 128 B | obs count u32 |
//             obs count x (camera u32 | x f64 | y f64)                      (160 + 20 n B)
inline constexpr std::uint32_t kSceneFormatVersion = 1;
inline constexpr std::uint64_t kSceneHeaderBytes = 24;
inline constexpr std::uint64_t kSceneCameraBytes = 132;
inline constexpr std::uint64_t kScenePointBaseBytes = 160;
inline constexpr std::uint64_t kSceneObservationBytes = 20;

/// Analytic HSC1 file size.
inline std::uint64_t scene_binary_size(const SceneModel& m) {
  std::uint64_t n = kSceneHeaderBytes + kSceneCameraBytes * m.cameras().size();
  for (const PointRecord& p : m.points()) {
    n += kScenePointBaseBytes + kSceneObservationBytes * p.observations.size();
  }
  return n;
}

inline std::vector<std::uint8_t> serialize_scene_binary(const SceneModel& m) {
  ByteWriter w;
  w.magic("HSC1");
  w.u32(kSceneFormatVersion);
  w.u64(m.cameras().size());
  w.u64(m.points().size());
  for (const CameraRecord& c : m.cameras()) {
    w.u32(c.id);
    w.f64(c.intrinsics.focal);
    w.f64(c.intrinsics.cx);
    w.f64(c.intrinsics.cy);
    w.u32(c.intrinsics.width);
    w.u32(c.intrinsics.height);
    for (int r = 0; r < 3; ++r)
      for (int k = 0; k < 3; ++k) w.f64(c.pose.rotation(r, k));
    for (int k = 0; k < 3; ++k) w.f64(c.pose.center[k]);
  }
  for (const PointRecord& p : m.points()) {
    w.u32(p.id);
    for (int k = 0; k < 3; ++k) w.f64(p.position[k]);
    w.bytes(p.descriptor);
    w.u32(static_cast<std::uint32_t>(p.observations.size()));
    for (const Observation& o : p.observations) {
      w.u32(o.camera);
      w.f64(o.pixel.x());
      w.f64(o.pixel.y());
    }
  }
  return w.release();
}

inline SceneModel parse_scene_binary(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("HSC1");
  const std::uint32_t version = r.u32();
  if (version != kSceneFormatVersion) {
    throw FormatError("unsupported HSC1 version " + std::to_string(version));
  }
  const std::uint64_t n_cameras = r.u64();
  const std::uint64_t n_points = r.u64();
  if (n_cameras > r.remaining() / kSceneCameraBytes) throw FormatError("camera count exceeds file size");
  std::vector<CameraRecord> cameras(n_cameras);
  for (std::uint64_t i = 0; i < n_cameras; ++i) {
    CameraRecord& c = cameras[i];
    c.id = r.u32();
    c.intrinsics.focal = r.f64();
    c.intrinsics.cx = r.f64();
    c.intrinsics.cy = r.f64();
    c.intrinsics.width = r.u32();
    c.intrinsics.height = r.u32();
    for (int a = 0; a < 3; ++a)
      for (int k = 0; k < 3; ++k) c.pose.rotation(a, k) = r.f64();
    for (int k = 0; k < 3; ++k) c.pose.center[k] = r.f64();
  }
  if (n_points > r.remaining() / kScenePointBaseBytes) throw FormatError("point count exceeds file size");
  std::vector<PointRecord> points(n_points);
  for (std::uint64_t i = 0; i < n_points; ++i) {
    PointRecord& p = points[i];
    try {
      p.id = r.u32();
      for (int k = 0; k < 3; ++k) p.position[k] = r.f64();
      r.bytes(p.descriptor);
      const std::uint32_t n_obs = r.u32();
      if (n_obs > r.remaining() / kSceneObservationBytes) throw FormatError("observation count exceeds file size");
      p.observations.resize(n_obs);
      for (Observation& o : p.observations) {
        o.camera = r.u32();
        o.pixel.x() = r.f64();
        o.pixel.y() = r.f64();
      }
    } catch (const FormatError& e) {
      throw FormatError("point record " + std::to_string(i) + ": " + e.what());
    }
  }
  if (!r.at_end()) throw FormatError("trailing bytes after point records");
  return SceneModel(std::move(cameras), std::move(points));
}

// ---------------------------------------------------------------------------
// JSON (fixtures and debugging)

namespace json_detail {

using nlohmann::json;

inline json pose_to_json(const Pose& p) {
  json rot = json::array();
  for (int r = 0; r < 3; ++r)
    for (int k = 0; k < 3; ++k) rot.push_back(p.rotation(r, k));
  return {{"rotation", rot}, {"center", {p.center.x(), p.center.y(), p.center.z()}}};
}

inline Pose pose_from_json(const json& j) {
  Pose p;
  const auto& rot = j.at("rotation");
  if (rot.size() != 9) throw FormatError("rotation must have 9 entries");
  for (int r = 0; r < 3; ++r)
    for (int k = 0; k < 3; ++k) p.rotation(r, k) = rot.at(static_cast<std::size_t>(3 * r + k)).get<double>();
  const auto& c = j.at("center");
  for (int k = 0; k < 3; ++k) p.center[k] = c.at(static_cast<std::size_t>(k)).get<double>();
  return p;
}

inline void intrinsics_to_json(const Intrinsics& k, json& out) {
  out["focal"] = k.focal;
  out["cx"] = k.cx;
  out["cy"] = k.cy;
  out["width"] = k.width;
  out["height"] = k.height;
}

inline Intrinsics intrinsics_from_json(const json& j) {
  Intrinsics k;
  k.focal = j.at("focal").get<double>();
  k.cx = j.at("cx").get<double>();
  k.cy = j.at("cy").get<double>();
  k.width = j.at("width").get<std::uint32_t>();
  k.height = j.at("height").get<std::uint32_t>();
  return k;
}

inline json descriptor_to_json(const Descriptor& d) { return json(std::vector<int>(d.begin(), d.end())); }

inline Descriptor descriptor_from_json(const json& j) {
  if (!j.is_array() || j.size() != kDescriptorDim) throw FormatError("descriptor must have 128 entries");
  Descriptor d{};
  for (std::size_t i = 0; i < kDescriptorDim; ++i) {
    const int v = j[i].get<int>();
    if (v < 0 || v > 255) throw FormatError("descriptor entry out of [0, 255]");
    d[i] = static_cast<std::uint8_t>(v);
  }
  return d;
}

inline json query_to_json(const QueryImage& q) {
  json j;
  j["id"] = q.id;
  intrinsics_to_json(q.intrinsics, j);
  json feats = json::array();
  for (const Feature& f : q.features) {
    feats.push_back({{"x", f.pixel.x()},
                     {"y", f.pixel.y()},
                     {"descriptor", descriptor_to_json(f.descriptor)},
                     {"true_point", f.true_point}});
  }
  j["features"] = std::move(feats);
  j["ground_truth"] = q.ground_truth ? pose_to_json(*q.ground_truth) : json(nullptr);
  return j;
}

inline QueryImage query_from_json(const json& j) {
  QueryImage q;
  q.id = j.at("id").get<std::uint32_t>();
  q.intrinsics = intrinsics_from_json(j);
  if (!q.intrinsics.valid()) throw ValidationError("invalid intrinsics");
  const auto& feats = j.at("features");
  q.features.reserve(feats.size());
  for (std::size_t i = 0; i < feats.size(); ++i) {
    const auto& fj = feats[i];
    Feature f;
    f.pixel = {fj.at("x").get<double>(), fj.at("y").get<double>()};
    f.descriptor = descriptor_from_json(fj.at("descriptor"));
    f.true_point = fj.value("true_point", std::int64_t{-1});
    if (!q.intrinsics.contains(f.pixel)) {
      throw ValidationError("feature " + std::to_string(i) + " outside image bounds");
    }
    q.features.push_back(f);
  }
  const auto gt = j.find("ground_truth");
  if (gt != j.end() && !gt->is_null()) q.ground_truth = pose_from_json(*gt);
  return q;
}

}  // namespace json_detail

inline nlohmann::json scene_to_json(const SceneModel& m, std::span<const QueryImage> queries = {}) {
  using nlohmann::json;
  using namespace json_detail;
  json cams = json::array();
  for (const CameraRecord& c : m.cameras()) {
    json j;
    j["id"] = c.id;
    intrinsics_to_json(c.intrinsics, j);
    j["pose"] = pose_to_json(c.pose);
    cams.push_back(std::move(j));
  }
  json pts = json::array();
  for (const PointRecord& p : m.points()) {
    json obs = json::array();
    for (const Observation& o : p.observations) obs.push_back({o.camera, o.pixel.x(), o.pixel.y()});
    pts.push_back({{"id", p.id},
                   {"position", {p.position.x(), p.position.y(), p.position.z()}},
                   {"descriptor", descriptor_to_json(p.descriptor)},
                   {"observations", std::move(obs)}});
  }
  json qs = json::array();
  for (const QueryImage& q : queries) qs.push_back(query_to_json(q));
  return {{"cameras", std::move(cams)}, {"points", std::move(pts)}, {"queries", std::move(qs)}};
}

inline SceneModel scene_from_json(const nlohmann::json& j) {
  using namespace json_detail;
  std::vector<CameraRecord> cameras;
  const auto& cams = j.at("cameras");
  for (std::size_t i = 0; i < cams.size(); ++i) {
    try {
      CameraRecord c;
      c.id = cams[i].at("id").get<CameraId>();
      c.intrinsics = intrinsics_from_json(cams[i]);
      c.pose = pose_from_json(cams[i].at("pose"));
      cameras.push_back(std::move(c));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("camera record " + std::to_string(i) + ": " + e.what());
    }
  }
  std::vector<PointRecord> points;
  const auto& pts = j.at("points");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    try {
      const auto& pj = pts[i];
      PointRecord p;
      p.id = pj.at("id").get<PointId>();
      const auto& pos = pj.at("position");
      for (int k = 0; k < 3; ++k) p.position[k] = pos.at(static_cast<std::size_t>(k)).get<double>();
      p.descriptor = descriptor_from_json(pj.at("descriptor"));
      for (const auto& oj : pj.at("observations")) {
        p.observations.push_back({oj.at(0).get<CameraId>(), {oj.at(1).get<double>(), oj.at(2).get<double>()}});
      }
      points.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("point record " + std::to_string(i) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError("point record " + std::to_string(i) + ": " + e.what());
    }
  }
  return SceneModel(std::move(cameras), std::move(points));
}

inline nlohmann::json parse_json_text(std::string_view text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("malformed JSON: ") + e.what());
  }
}

/// Writes the scene; returns the number of bytes written.
inline std::uint64_t save_scene(const SceneModel& m, const std::filesystem::path& path, SceneFormat format,
                                std::span<const QueryImage> queries = {}) {
  if (format == SceneFormat::kBinary) return write_file_bytes(path, serialize_scene_binary(m));
  return write_file_text(path, scene_to_json(m, queries).dump());
}

inline SceneModel load_scene(const std::filesystem::path& path, SceneFormat format) {
  if (format == SceneFormat::kBinary) return parse_scene_binary(read_file_bytes(path));
  return scene_from_json(parse_json_text(read_file_text(path)));
}

/// Picks the format from the file extension (".json" or anything else = binary).
inline SceneFormat scene_format_for(const std::filesystem::path& path) {
  return path.extension() == ".json" ? SceneFormat::kJson : SceneFormat::kBinary;
}

inline std::uint64_t save_queries(std::span<const QueryImage> queries, const std::filesystem::path& path) {
  nlohmann::json qs = nlohmann::json::array();
  for (const QueryImage& q : queries) qs.push_back(json_detail::query_to_json(q));
  return write_file_text(path, nlohmann::json{{"queries", std::move(qs)}}.dump());
}

/// Reads the `queries` array of a queries file or a JSON scene file.
inline std::vector<QueryImage> load_queries(const std::filesystem::path& path) {
  const nlohmann::json j = parse_json_text(read_file_text(path));
  std::vector<QueryImage> out;
  const auto& qs = j.at("queries");
  for (std::size_t i = 0; i < qs.size(); ++i) {
    try {
      out.push_back(json_detail::query_from_json(qs[i]));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("query record " + std::to_string(i) + ": " + e.what());
    } catch (const Error& e) {
      throw FormatError("query record " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

inline std::uint64_t scene_hash(const SceneModel& m) { return fnv1a64(serialize_scene_binary(m)); }

}  // namespace hsc
