#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iterator>
#include <limits>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hsc/binary_io.hpp"
#include "hsc/scene_io.hpp"
#include "hsc/scene_model.hpp"
#include "hsc/vocabulary.hpp"

namespace hsc {

/// Selection parameters. `grid` is the per-axis cell count g, so each image
/// holds q = g * g cells and each cell must be seen by ceil(K / q) points.
struct CoverConfig {
  std::uint32_t cover_k = 100;
  std::uint32_t grid = 2;
  std::uint32_t beta = 10;
  std::uint64_t budget_bytes = 0;
  double full_fraction = 0.75;

  [[nodiscard]] std::uint32_t cells_per_image() const { return grid * grid; }
  [[nodiscard]] std::uint32_t cell_target() const {
    const std::uint32_t q = cells_per_image();
    return (cover_k + q - 1) / q;
  }
  void validate() const {
    if (cover_k < 1) throw std::invalid_argument("cover K must be >= 1");
    if (grid < 1) throw std::invalid_argument("grid must be >= 1");
    if (beta < 1) throw std::invalid_argument("beta must be >= 1");
    if (!(full_fraction > 0.0 && full_fraction <= 1.0)) {
      throw std::invalid_argument("full_fraction must be in (0, 1]");
    }
  }

  bool operator==(const CoverConfig&) const = default;
};

// ---------------------------------------------------------------------------
// Memory accounting

inline constexpr std::uint64_t kCompressedPointBytes = 16;  // 3 x f32 position + u32 word
inline constexpr std::uint64_t kHybridHeaderBytes = 56;

/// Position (3 x f32) + mean descriptor + one u32 per observing camera.
inline constexpr std::uint64_t bytes_per_full_point(std::size_t camera_count) {
  return 12 + kDescriptorDim + 4 * static_cast<std::uint64_t>(camera_count);
}
inline std::uint64_t bytes_per_full_point(const PointRecord& p) { return bytes_per_full_point(p.observations.size()); }
inline constexpr std::uint64_t bytes_per_compressed_point() { return kCompressedPointBytes; }

struct BudgetSplit {
  std::uint64_t header = kHybridHeaderBytes;
  std::uint64_t full = 0;        // bytes available to P'
  std::uint64_t compressed = 0;  // bytes available to P''
};

/// The file header is charged first; the remaining payload is split by
/// `full_fraction` (floored) with the complement going to compressed points.
inline BudgetSplit split_budget(const CoverConfig& config) {
  BudgetSplit s;
  if (config.budget_bytes <= s.header) return s;
  const std::uint64_t payload = config.budget_bytes - s.header;
  s.full = static_cast<std::uint64_t>(std::floor(config.full_fraction * static_cast<double>(payload)));
  s.full = std::min(s.full, payload);
  s.compressed = payload - s.full;
  return s;
}

// ---------------------------------------------------------------------------
// Weighted grid K-cover

/// Distinctiveness weight 1 - |P'_w| / beta, clamped at zero once the word
/// holds beta or more selected points.
inline double alpha_weight(std::uint64_t word_count, std::uint32_t beta) {
  return std::max(0.0, 1.0 - static_cast<double>(word_count) / static_cast<double>(beta));
}

/// Cell of an observation in a g x g grid: floor(x g / w) + g floor(y g / h).
inline std::uint32_t cell_index(const Eigen::Vector2d& px, const Intrinsics& k, std::uint32_t grid) {
  const auto col = std::min<std::uint32_t>(
      grid - 1, static_cast<std::uint32_t>(std::floor(px.x() * grid / static_cast<double>(k.width))));
  const auto row = std::min<std::uint32_t>(
      grid - 1, static_cast<std::uint32_t>(std::floor(px.y() * grid / static_cast<double>(k.height))));
  return col + grid * row;
}

/// Flattened cover instance: for every point the (camera, cell) elements it
/// observes, its word, id and full-point byte cost.
struct CoverProblem {
  std::vector<std::vector<std::uint32_t>> point_cells;  // global cell ids, one per observation
  std::vector<std::vector<std::uint32_t>> cell_points;  // observers per global cell
  std::vector<WordId> words;
  std::vector<PointId> ids;
  std::vector<std::uint64_t> full_bytes;
  std::size_t vocab_size = 0;
  std::uint32_t cell_target = 1;
  std::uint32_t beta = 10;

  [[nodiscard]] std::size_t size() const { return ids.size(); }
  [[nodiscard]] std::size_t cell_count() const { return cell_points.size(); }
};

inline CoverProblem build_cover_problem(const SceneModel& scene, std::span<const WordId> words,
                                        std::size_t vocab_size, const CoverConfig& config) {
  config.validate();
  if (words.size() != scene.points().size()) throw std::invalid_argument("one word per point required");
  CoverProblem pb;
  const std::uint32_t q = config.cells_per_image();
  pb.vocab_size = vocab_size;
  pb.cell_target = config.cell_target();
  pb.beta = config.beta;
  pb.words.assign(words.begin(), words.end());
  pb.cell_points.resize(scene.cameras().size() * q);
  pb.point_cells.resize(scene.points().size());
  pb.ids.resize(scene.points().size());
  pb.full_bytes.resize(scene.points().size());
  for (std::size_t p = 0; p < scene.points().size(); ++p) {
    const PointRecord& pt = scene.points()[p];
    if (words[p] >= vocab_size) throw std::invalid_argument("word id outside vocabulary");
    pb.ids[p] = pt.id;
    pb.full_bytes[p] = bytes_per_full_point(pt);
    for (const Observation& o : pt.observations) {
      const std::size_t cam = scene.camera_index(o.camera);
      const auto cell = static_cast<std::uint32_t>(cam * q + cell_index(o.pixel, scene.camera(o.camera).intrinsics, config.grid));
      pb.point_cells[p].push_back(cell);
      pb.cell_points[cell].push_back(static_cast<std::uint32_t>(p));
    }
    std::sort(pb.point_cells[p].begin(), pb.point_cells[p].end());
  }
  return pb;
}

/// Mutable greedy state: remaining need per cell in the current round,
/// selected counts per word, and selection flags.
class GainState {
 public:
  explicit GainState(const CoverProblem& pb)
      : pb_(&pb), need_(pb.cell_count(), pb.cell_target), word_counts_(pb.vocab_size), selected_(pb.size(), false) {}

  /// alpha(word) x number of distinct still-uncovered cells observing `p`.
  [[nodiscard]] double gain(std::size_t p) const {
    std::uint32_t open = 0;
    for (std::uint32_t c : pb_->point_cells[p]) open += need_[c] > 0 ? 1u : 0u;
    if (open == 0) return 0.0;
    return alpha_weight(word_counts_.count(pb_->words[p]), pb_->beta) * open;
  }

  void select(std::size_t p) {
    selected_[p] = true;
    for (std::uint32_t c : pb_->point_cells[p]) {
      if (need_[c] > 0) --need_[c];
    }
    word_counts_.add(pb_->words[p]);
  }

  /// Starts a new cover round: every cell needs ceil(K/q) fresh observers.
  void reset_round() {
    std::fill(need_.begin(), need_.end(), pb_->cell_target);
    ++round_;
  }

  /// Some unselected point still has a positive distinctiveness weight.
  [[nodiscard]] bool has_weighted_candidate() const {
    for (std::size_t p = 0; p < selected_.size(); ++p) {
      if (!selected_[p] && alpha_weight(word_counts_.count(pb_->words[p]), pb_->beta) > 0.0) return true;
    }
    return false;
  }

  [[nodiscard]] bool selected(std::size_t p) const { return selected_[p]; }
  [[nodiscard]] std::uint32_t need(std::size_t cell) const { return need_[cell]; }
  [[nodiscard]] const WordHistogram& word_counts() const { return word_counts_; }
  [[nodiscard]] int round() const { return round_; }

 private:
  const CoverProblem* pb_;
  std::vector<std::uint32_t> need_;
  WordHistogram word_counts_;
  std::vector<bool> selected_;
  int round_ = 1;
};

inline double point_gain(const GainState& state, std::size_t point_index) { return state.gain(point_index); }

enum class SelectionStop { kBudget, kNoGain, kExhausted };

inline const char* to_string(SelectionStop s) {
  switch (s) {
    case SelectionStop::kBudget: return "budget";
    case SelectionStop::kNoGain: return "no-gain";
    case SelectionStop::kExhausted: return "exhausted";
  }
  return "?";
}

struct FullSelection {
  std::vector<std::size_t> indices;  // point indices in selection order
  std::vector<PointId> ids;
  std::uint64_t bytes = 0;
  int rounds = 1;
  SelectionStop stop = SelectionStop::kExhausted;
};

/// Observer hook for tests: called after each pick with the state after the update.
using SelectionObserver = std::function<void(std::size_t picked, const GainState&)>;

/// Lazy greedy weighted K-cover over image cells. Heap entries hold stale
/// upper bounds of each point's gain; the popped top is re-evaluated and kept
/// only if it still dominates the next entry under (gain desc, id asc).
inline FullSelection select_full_points(const CoverProblem& pb, std::uint64_t budget,
                                        const SelectionObserver& observer = {}) {
  struct Entry {
    double gain;
    PointId id;
    std::uint32_t index;
  };
  // Max by gain, then min by id.
  auto worse = [](const Entry& a, const Entry& b) { return a.gain < b.gain || (a.gain == b.gain && a.id > b.id); };
  using Heap = std::priority_queue<Entry, std::vector<Entry>, decltype(worse)>;

  GainState state(pb);
  FullSelection out;
  std::uint64_t remaining = budget;

  auto rebuild = [&] {
    std::vector<Entry> entries;
    entries.reserve(pb.size());
    for (std::size_t p = 0; p < pb.size(); ++p) {
      if (!state.selected(p)) entries.push_back({state.gain(p), pb.ids[p], static_cast<std::uint32_t>(p)});
    }
    return Heap(worse, std::move(entries));
  };
  Heap heap = rebuild();

  while (true) {
    if (heap.empty()) {
      out.stop = SelectionStop::kExhausted;
      break;
    }
    Entry top = heap.top();
    heap.pop();
    top.gain = state.gain(top.index);
    if (!heap.empty() && worse(top, heap.top())) {
      heap.push(top);
      continue;
    }
    if (top.gain <= 0.0) {
      // Every reachable cell is covered; start another round if any point
      // can still contribute, otherwise stop.
      if (!state.has_weighted_candidate()) {
        out.stop = SelectionStop::kNoGain;
        break;
      }
      state.reset_round();
      heap = rebuild();
      continue;
    }
    const std::uint64_t cost = pb.full_bytes[top.index];
    if (cost > remaining) {
      out.stop = SelectionStop::kBudget;
      break;
    }
    remaining -= cost;
    out.bytes += cost;
    state.select(top.index);
    out.indices.push_back(top.index);
    out.ids.push_back(top.id);
    if (observer) observer(top.index, state);
  }
  out.rounds = state.round();
  return out;
}

/// Convenience overload: assigns words and charges full_fraction of the budget.
inline FullSelection select_full_points(const SceneModel& scene, const Vocabulary& vocab, const CoverConfig& config) {
  if (scene.points().empty()) throw std::invalid_argument("select_full_points: empty scene");
  std::vector<Descriptor> descs;
  descs.reserve(scene.points().size());
  for (const PointRecord& p : scene.points()) descs.push_back(p.descriptor);
  const auto words = vocab.assign_all(descs);
  const CoverProblem pb = build_cover_problem(scene, words, vocab.size(), config);
  return select_full_points(pb, split_budget(config).full);
}

// ---------------------------------------------------------------------------
// Compressed point selection

struct CompressedSelection {
  std::size_t index;
  PointId id;
  WordId word;
};

/// Occupancy score 1 / (1 + pool occupancy of the point's word).
inline double compressed_score(std::uint64_t pool_occupancy) { return 1.0 / (1.0 + static_cast<double>(pool_occupancy)); }

/// Ranks P \ P' once by pool word occupancy (low first), then visibility
/// (high first), then id, and keeps the prefix that fits `budget`.
inline std::vector<CompressedSelection> select_compressed_points(const CoverProblem& pb,
                                                                 std::span<const std::size_t> selected_full,
                                                                 std::uint64_t budget) {
  std::vector<bool> in_full(pb.size(), false);
  for (std::size_t p : selected_full) in_full[p] = true;
  WordHistogram pool(pb.vocab_size);
  std::vector<std::size_t> candidates;
  for (std::size_t p = 0; p < pb.size(); ++p) {
    if (in_full[p]) continue;
    pool.add(pb.words[p]);
    candidates.push_back(p);
  }
  const std::size_t take = std::min<std::size_t>(candidates.size(), budget / kCompressedPointBytes);
  auto better = [&](std::size_t a, std::size_t b) {
    const auto oa = pool.count(pb.words[a]);
    const auto ob = pool.count(pb.words[b]);
    if (oa != ob) return oa < ob;
    const auto va = pb.point_cells[a].size();
    const auto vb = pb.point_cells[b].size();
    if (va != vb) return va > vb;
    return pb.ids[a] < pb.ids[b];
  };
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take), candidates.end(), better);
  std::vector<CompressedSelection> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t p = candidates[i];
    out.push_back({p, pb.ids[p], pb.words[p]});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hybrid model

struct FullPoint {
  PointId id = 0;
  Eigen::Vector3f position = Eigen::Vector3f::Zero();
  Descriptor descriptor{};
  WordId word = 0;
  std::vector<CameraId> cameras;  // sorted

  bool operator==(const FullPoint&) const = default;
};

struct CompressedPoint {
  PointId id = 0;
  Eigen::Vector3f position = Eigen::Vector3f::Zero();
  WordId word = 0;

  bool operator==(const CompressedPoint&) const = default;
};

/// Compressed scene: P' (full descriptors + camera lists) and P'' (position +
/// word only), both ordered by source point id, plus a word -> member index.
/// Member lists store positions in `full` / `compressed`.
class HybridModel {
 public:
  CoverConfig config;
  std::uint64_t scene_hash = 0;
  std::uint32_t vocab_size = 0;
  std::vector<FullPoint> full;
  std::vector<CompressedPoint> compressed;
  bool budget_warning = false;  // budget could not hold a single full point
  int cover_rounds = 0;
  SelectionStop full_stop = SelectionStop::kExhausted;

  void build_index() {
    full_by_word_.assign(vocab_size, {});
    compressed_by_word_.assign(vocab_size, {});
    for (std::size_t i = 0; i < full.size(); ++i) full_by_word_.at(full[i].word).push_back(static_cast<std::uint32_t>(i));
    for (std::size_t i = 0; i < compressed.size(); ++i) {
      compressed_by_word_.at(compressed[i].word).push_back(static_cast<std::uint32_t>(i));
    }
  }

  [[nodiscard]] std::span<const std::uint32_t> full_in_word(WordId w) const { return full_by_word_.at(w); }
  [[nodiscard]] std::span<const std::uint32_t> compressed_in_word(WordId w) const { return compressed_by_word_.at(w); }

  [[nodiscard]] std::uint64_t full_bytes() const {
    std::uint64_t n = 0;
    for (const FullPoint& p : full) n += bytes_per_full_point(p.cameras.size());
    return n;
  }
  [[nodiscard]] std::uint64_t serialized_size() const {
    return kHybridHeaderBytes + full_bytes() + kCompressedPointBytes * compressed.size();
  }
  /// Average full-point size over the compressed-point size for this model.
  [[nodiscard]] double full_to_compressed_ratio() const {
    if (full.empty()) return 0.0;
    return static_cast<double>(full_bytes()) / static_cast<double>(full.size()) / kCompressedPointBytes;
  }

  /// Checks index consistency and sortedness; disjointness is checked by compress().
  void validate() const {
    for (std::size_t i = 0; i < full.size(); ++i) {
      if (full[i].word >= vocab_size) throw ValidationError("full point " + std::to_string(i) + ": word out of range");
      if (full[i].cameras.empty()) throw ValidationError("full point " + std::to_string(i) + ": empty camera list");
      if (!std::is_sorted(full[i].cameras.begin(), full[i].cameras.end())) {
        throw ValidationError("full point " + std::to_string(i) + ": camera list not sorted");
      }
      if (i > 0 && full[i - 1].id >= full[i].id) throw ValidationError("full points not ordered by id");
    }
    for (std::size_t i = 0; i < compressed.size(); ++i) {
      if (compressed[i].word >= vocab_size) {
        throw ValidationError("compressed point " + std::to_string(i) + ": word out of range");
      }
      if (i > 0 && compressed[i - 1].id >= compressed[i].id) throw ValidationError("compressed points not ordered by id");
    }
    std::size_t nf = 0, nc = 0;
    for (const auto& l : full_by_word_) nf += l.size();
    for (const auto& l : compressed_by_word_) nc += l.size();
    if (nf != full.size() || nc != compressed.size()) throw ValidationError("word index out of sync");
  }

 private:
  std::vector<std::vector<std::uint32_t>> full_by_word_;
  std::vector<std::vector<std::uint32_t>> compressed_by_word_;
};

// HSCZ layout (little-endian):
//   "HSCZ" | version u32 | cover_k u32 | grid u32 | beta u32 | full_fraction f64 |
//   budget_bytes u64 | scene_hash u64 | vocab k u32 | full count u32 |
//   compressed count u32                                                  (56 B)
//   full point       : position 3 x f32 | descriptor 128 B | camera ids u32...
//                      (the last camera id carries bit 31 as terminator)   (140 + 4 n B)
//   compressed point : position 3 x f32 | word u32                        (16 B)
// Source point ids are not stored; a loaded model numbers points by position.
inline constexpr std::uint32_t kHybridFormatVersion = 1;
inline constexpr std::uint32_t kLastCameraFlag = 0x80000000u;

inline std::vector<std::uint8_t> serialize_hybrid(const HybridModel& m) {
  ByteWriter w;
  w.magic("HSCZ");
  w.u32(kHybridFormatVersion);
  w.u32(m.config.cover_k);
  w.u32(m.config.grid);
  w.u32(m.config.beta);
  w.f64(m.config.full_fraction);
  w.u64(m.config.budget_bytes);
  w.u64(m.scene_hash);
  w.u32(m.vocab_size);
  w.u32(static_cast<std::uint32_t>(m.full.size()));
  w.u32(static_cast<std::uint32_t>(m.compressed.size()));
  for (const FullPoint& p : m.full) {
    for (int k = 0; k < 3; ++k) w.f32(p.position[k]);
    w.bytes(p.descriptor);
    for (std::size_t c = 0; c < p.cameras.size(); ++c) {
      if (p.cameras[c] & kLastCameraFlag) throw std::invalid_argument("camera id too large for HSCZ");
      w.u32(p.cameras[c] | (c + 1 == p.cameras.size() ? kLastCameraFlag : 0u));
    }
  }
  for (const CompressedPoint& p : m.compressed) {
    for (int k = 0; k < 3; ++k) w.f32(p.position[k]);
    w.u32(p.word);
  }
  return w.release();
}

/// Parses an HSCZ file. Full-point words are recomputed with `vocab`, which
/// must be the vocabulary the model was built with.
inline HybridModel parse_hybrid(std::span<const std::uint8_t> bytes, const Vocabulary& vocab) {
  ByteReader r(bytes);
  r.expect_magic("HSCZ");
  const std::uint32_t version = r.u32();
  if (version != kHybridFormatVersion) throw FormatError("unsupported HSCZ version " + std::to_string(version));
  HybridModel m;
  m.config.cover_k = r.u32();
  m.config.grid = r.u32();
  m.config.beta = r.u32();
  m.config.full_fraction = r.f64();
  m.config.budget_bytes = r.u64();
  m.scene_hash = r.u64();
  m.vocab_size = r.u32();
  if (m.vocab_size != vocab.size()) {
    throw FormatError("model built for a " + std::to_string(m.vocab_size) + "-word vocabulary, got " +
                      std::to_string(vocab.size()));
  }
  const std::uint32_t n_full = r.u32();
  const std::uint32_t n_comp = r.u32();
  m.full.resize(n_full);
  for (std::uint32_t i = 0; i < n_full; ++i) {
    FullPoint& p = m.full[i];
    p.id = i;
    for (int k = 0; k < 3; ++k) p.position[k] = r.f32();
    r.bytes(p.descriptor);
    while (true) {
      const std::uint32_t c = r.u32();
      p.cameras.push_back(c & ~kLastCameraFlag);
      if (c & kLastCameraFlag) break;
    }
    p.word = vocab.assign(p.descriptor);
  }
  m.compressed.resize(n_comp);
  for (std::uint32_t i = 0; i < n_comp; ++i) {
    CompressedPoint& p = m.compressed[i];
    p.id = n_full + i;
    for (int k = 0; k < 3; ++k) p.position[k] = r.f32();
    p.word = r.u32();
  }
  if (!r.at_end()) throw FormatError("trailing bytes in HSCZ file");
  m.build_index();
  m.validate();
  return m;
}

inline std::uint64_t save_hybrid(const HybridModel& m, const std::filesystem::path& path) {
  return write_file_bytes(path, serialize_hybrid(m));
}

inline HybridModel load_hybrid(const std::filesystem::path& path, const Vocabulary& vocab) {
  return parse_hybrid(read_file_bytes(path), vocab);
}

/// Budget in bytes for a compression rate given in percent of the
/// uncompressed HSC1 scene size.
inline std::uint64_t budget_for_rate(const SceneModel& scene, double rate_percent) {
  if (!(rate_percent > 0.0)) throw std::invalid_argument("compression rate must be positive");
  return static_cast<std::uint64_t>(std::floor(rate_percent / 100.0 * static_cast<double>(scene_binary_size(scene))));
}

/// Full pipeline: word assignment, weighted grid K-cover for P', occupancy
/// ranking for P'', then word index, disjointness and budget checks.
inline HybridModel compress(const SceneModel& scene, const Vocabulary& vocab, const CoverConfig& config) {
  config.validate();
  HybridModel m;
  m.config = config;
  m.scene_hash = scene_hash(scene);
  m.vocab_size = static_cast<std::uint32_t>(vocab.size());

  std::uint64_t smallest_full = std::numeric_limits<std::uint64_t>::max();
  for (const PointRecord& p : scene.points()) smallest_full = std::min(smallest_full, bytes_per_full_point(p));
  if (scene.points().empty() || config.budget_bytes < kHybridHeaderBytes + smallest_full) {
    m.budget_warning = true;
    m.build_index();
    return m;
  }

  std::vector<Descriptor> descs;
  descs.reserve(scene.points().size());
  for (const PointRecord& p : scene.points()) descs.push_back(p.descriptor);
  const std::vector<WordId> words = vocab.assign_all(descs);
  const CoverProblem pb = build_cover_problem(scene, words, vocab.size(), config);
  const BudgetSplit split = split_budget(config);

  const FullSelection sel = select_full_points(pb, split.full);
  // Bytes the cover left unspent roll over to the compressed set, unless the
  // split reserves nothing for it (full-points-only models stay pure).
  const std::uint64_t rollover = config.full_fraction < 1.0 ? split.full - sel.bytes : 0;
  const auto comp = select_compressed_points(pb, sel.indices, split.compressed + rollover);
  m.cover_rounds = sel.rounds;
  m.full_stop = sel.stop;

  std::vector<std::size_t> full_idx = sel.indices;
  std::sort(full_idx.begin(), full_idx.end(), [&](auto a, auto b) { return pb.ids[a] < pb.ids[b]; });
  for (std::size_t p : full_idx) {
    const PointRecord& pt = scene.points()[p];
    FullPoint fp;
    fp.id = pt.id;
    fp.position = pt.position.cast<float>();
    fp.descriptor = pt.descriptor;
    fp.word = words[p];
    const auto cams = scene.visibility().cameras_of(p);
    fp.cameras.assign(cams.begin(), cams.end());
    m.full.push_back(std::move(fp));
  }
  std::vector<CompressedSelection> comp_sorted = comp;
  std::sort(comp_sorted.begin(), comp_sorted.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (const CompressedSelection& c : comp_sorted) {
    m.compressed.push_back({c.id, scene.points()[c.index].position.cast<float>(), c.word});
  }
  m.build_index();
  m.validate();

  std::vector<PointId> a, b;
  for (const auto& p : m.full) a.push_back(p.id);
  for (const auto& p : m.compressed) b.push_back(p.id);
  std::vector<PointId> both;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
  if (!both.empty()) throw std::logic_error("compress: full and compressed sets overlap");
  if (m.serialized_size() > config.budget_bytes) throw std::logic_error("compress: model exceeds byte budget");
  return m;
}

}  // namespace hsc
