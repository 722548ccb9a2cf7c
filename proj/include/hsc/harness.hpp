#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "hsc/compressor.hpp"
#include "hsc/geometry.hpp"
#include "hsc/matcher.hpp"
#include "hsc/random.hpp"
#include "hsc/ransac.hpp"
#include "hsc/scene_io.hpp"
#include "hsc/scene_model.hpp"
#include "hsc/vocabulary.hpp"

namespace hsc {

/// Failure inside one pipeline stage; what() is prefixed with "[stage]".
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message)
      : Error("[" + stage + "] " + message), stage_(std::move(stage)) {}
  [[nodiscard]] const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

template <typename F>
auto run_stage(const std::string& stage, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

struct PipelineConfig {
  CoverConfig cover;                  // cover.budget_bytes is used when rate_percent is unset
  std::optional<double> rate_percent = 1.5;
  std::size_t vocab_words = 6000;
  MatcherConfig matcher;
  RansacConfig ransac;
  std::uint64_t seed = 1;
  unsigned threads = 0;               // 0: hardware concurrency
};

inline std::uint64_t vocab_seed(std::uint64_t seed) { return derive_seed(seed, 0x766f636162ULL); }

inline unsigned worker_count(unsigned requested, std::size_t jobs) {
  unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(n, jobs)));
}

/// Runs fn(i) for i in [0, n) on a small pool. Each index is processed
/// exactly once; the first exception is rethrown after all workers join.
inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  const unsigned workers = worker_count(threads, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

/// Queries with their feature words precomputed for one vocabulary.
struct PreparedQueries {
  std::vector<QueryImage> queries;
  std::vector<std::vector<WordId>> words;
};

inline PreparedQueries prepare_queries(std::vector<QueryImage> queries, const Vocabulary& vocab, unsigned threads = 0) {
  PreparedQueries pq;
  pq.words.resize(queries.size());
  parallel_for(queries.size(), threads, [&](std::size_t i) { pq.words[i] = assign_feature_words(queries[i], vocab); });
  pq.queries = std::move(queries);
  return pq;
}

struct QueryRecord {
  std::uint32_t id = 0;
  bool registered = false;
  std::uint32_t features = 0;
  std::uint32_t unique_matches = 0;
  std::uint32_t multi_matches = 0;
  InlierCount inliers;
  std::uint32_t iterations = 0;
  std::uint32_t samples_dropped = 0;
  std::uint64_t multi_evaluations = 0;
  std::optional<Pose> pose;
  std::optional<PoseError> error;  // registered queries with ground truth
  std::string diagnostics;
  double query_ms = 0.0;   // matching + RANSAC
  double ransac_ms = 0.0;
};

using Clock = std::chrono::steady_clock;

inline double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

inline QueryRecord localize_query(const QueryImage& query, std::span<const WordId> words, const HybridModel& model,
                                  const MatcherConfig& matcher, const RansacConfig& ransac, std::uint64_t seed) {
  QueryRecord rec;
  const auto t0 = Clock::now();
  rec.id = query.id;
  rec.features = static_cast<std::uint32_t>(query.features.size());
  const MatchSet matches = match_query(query, words, model, matcher);
  rec.unique_matches = static_cast<std::uint32_t>(matches.unique.size());
  rec.multi_matches = static_cast<std::uint32_t>(matches.multi.size());
  const auto t1 = Clock::now();
  const RansacResult r = run_ransac(matches, model, query.intrinsics, ransac, derive_seed(seed, query.id));
  rec.ransac_ms = elapsed_ms(t1);
  rec.registered = r.registered;
  rec.inliers = r.inliers;
  rec.iterations = r.iterations;
  rec.samples_dropped = r.samples_dropped;
  rec.multi_evaluations = r.multi_evaluations;
  rec.diagnostics = r.diagnostics;
  if (r.registered) {
    rec.pose = r.pose;
    if (query.ground_truth) rec.error = pose_error(*r.pose, *query.ground_truth);
  }
  rec.query_ms = elapsed_ms(t0);
  return rec;
}

/// Localizes every query in parallel; output is ordered by query id.
inline std::vector<QueryRecord> localize_queries(const HybridModel& model, const PreparedQueries& pq,
                                                 const MatcherConfig& matcher, const RansacConfig& ransac,
                                                 std::uint64_t seed, unsigned threads = 0) {
  ransac.validate();
  std::vector<QueryRecord> out(pq.queries.size());
  parallel_for(pq.queries.size(), threads, [&](std::size_t i) {
    out[i] = localize_query(pq.queries[i], pq.words[i], model, matcher, ransac, seed);
  });
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

/// Lower middle element for even counts; nullopt for an empty list.
inline std::optional<double> lower_median(std::vector<double> v) {
  if (v.empty()) return std::nullopt;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>((v.size() - 1) / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

struct Aggregates {
  std::uint32_t total = 0;
  std::uint32_t registered = 0;
  double registration_rate = 0.0;  // percent
  std::optional<double> median_position_m;
  std::optional<double> median_rotation_deg;
  std::optional<double> median_query_ms;
  std::optional<double> median_ransac_ms;

  bool operator==(const Aggregates&) const = default;
};

inline Aggregates aggregate(std::span<const QueryRecord> records) {
  Aggregates a;
  a.total = static_cast<std::uint32_t>(records.size());
  std::vector<double> pos, rot, qms, rms;
  for (const QueryRecord& r : records) {
    if (r.registered) ++a.registered;
    if (r.error) {
      pos.push_back(r.error->position_m);
      rot.push_back(r.error->rotation_deg);
    }
    qms.push_back(r.query_ms);
    rms.push_back(r.ransac_ms);
  }
  a.registration_rate = a.total ? 100.0 * a.registered / a.total : 0.0;
  a.median_position_m = lower_median(pos);
  a.median_rotation_deg = lower_median(rot);
  a.median_query_ms = lower_median(qms);
  a.median_ransac_ms = lower_median(rms);
  return a;
}

struct ModelSummary {
  std::uint64_t budget_bytes = 0;
  std::uint64_t size_bytes = 0;
  std::uint64_t scene_bytes = 0;
  std::size_t full_points = 0;
  std::size_t compressed_points = 0;
  bool budget_warning = false;
  int cover_rounds = 0;
  std::string full_stop;
  [[nodiscard]] double compression_rate() const {
    return scene_bytes ? 100.0 * static_cast<double>(size_bytes) / static_cast<double>(scene_bytes) : 0.0;
  }
};

inline ModelSummary summarize_model(const HybridModel& m, const SceneModel& scene) {
  return {m.config.budget_bytes, m.serialized_size(), scene_binary_size(scene), m.full.size(), m.compressed.size(),
          m.budget_warning, m.cover_rounds, to_string(m.full_stop)};
}

struct EvaluationReport {
  PipelineConfig config;
  std::size_t vocab_words = 0;
  bool vocab_trained_on_scene = true;
  ModelSummary model;
  std::vector<QueryRecord> queries;
  Aggregates aggregates;
  double vocab_seconds = 0.0;
  double compression_seconds = 0.0;
  double localization_seconds = 0.0;
  std::vector<std::string> notes;
};

inline std::vector<std::string> protocol_notes(bool vocab_on_scene) {
  std::vector<std::string> n{
      "calibrated P3P with known query intrinsics; no unknown-focal solver",
      "median of an even-length list is the lower middle element",
      "pose errors are reported for registered queries with ground truth",
  };
  if (vocab_on_scene) n.insert(n.begin(), "vocabulary trained on the scene's own point descriptors");
  return n;
}

/// Matches, RANSAC and aggregates for a built model.
inline EvaluationReport evaluate_model(const HybridModel& model, const SceneModel& scene, const PreparedQueries& pq,
                                       const PipelineConfig& config) {
  EvaluationReport rep;
  rep.config = config;
  rep.config.cover = model.config;
  rep.vocab_words = model.vocab_size;
  rep.model = summarize_model(model, scene);
  const auto t0 = Clock::now();
  rep.queries = run_stage("localize", [&] {
    return localize_queries(model, pq, config.matcher, config.ransac, config.seed, config.threads);
  });
  rep.localization_seconds = elapsed_ms(t0) / 1000.0;
  rep.aggregates = aggregate(rep.queries);
  rep.notes = protocol_notes(true);
  return rep;
}

inline CoverConfig resolved_cover(const SceneModel& scene, const PipelineConfig& config) {
  CoverConfig c = config.cover;
  if (config.rate_percent) c.budget_bytes = budget_for_rate(scene, *config.rate_percent);
  return c;
}

/// vocab -> compress -> per-query match + RANSAC -> report. When `vocab` is
/// null one is trained on the scene's point descriptors.
inline EvaluationReport run_pipeline(const SceneModel& scene, std::vector<QueryImage> queries,
                                     const PipelineConfig& config, const Vocabulary* vocab = nullptr) {
  const auto t_vocab = Clock::now();
  Vocabulary trained;
  if (!vocab) {
    trained = run_stage("vocab", [&] {
      std::vector<Descriptor> descs;
      descs.reserve(scene.points().size());
      for (const PointRecord& p : scene.points()) descs.push_back(p.descriptor);
      return train_vocabulary(descs, config.vocab_words, vocab_seed(config.seed));
    });
    vocab = &trained;
  }
  const double vocab_seconds = elapsed_ms(t_vocab) / 1000.0;

  const auto t_comp = Clock::now();
  const HybridModel model = run_stage("compress", [&] { return compress(scene, *vocab, resolved_cover(scene, config)); });
  const double compression_seconds = elapsed_ms(t_comp) / 1000.0;

  const PreparedQueries pq = run_stage("match", [&] { return prepare_queries(std::move(queries), *vocab, config.threads); });
  EvaluationReport rep = evaluate_model(model, scene, pq, config);
  rep.vocab_seconds = vocab_seconds;
  rep.compression_seconds = compression_seconds;
  rep.vocab_trained_on_scene = trained.size() > 0;
  rep.notes = protocol_notes(rep.vocab_trained_on_scene);
  return rep;
}

inline EvaluationReport run_pipeline(const std::filesystem::path& scene_path, const std::filesystem::path& queries_path,
                                     const PipelineConfig& config) {
  const SceneModel scene = run_stage("load", [&] { return load_scene(scene_path, scene_format_for(scene_path)); });
  auto queries = run_stage("load", [&] { return load_queries(queries_path); });
  return run_pipeline(scene, std::move(queries), config);
}

// ---------------------------------------------------------------------------
// Report emission. The JSON report holds no wall-clock values so repeated
// runs are byte-identical; timings go to a separate document.

using ojson = nlohmann::ordered_json;

inline ojson optional_json(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

inline ojson config_to_json(const PipelineConfig& c) {
  ojson j;
  j["seed"] = c.seed;
  j["vocab_words"] = c.vocab_words;
  j["rate_percent"] = optional_json(c.rate_percent);
  j["budget_bytes"] = c.cover.budget_bytes;
  j["full_fraction"] = c.cover.full_fraction;
  j["cover_k"] = c.cover.cover_k;
  j["grid"] = c.cover.grid;
  j["cells_per_image"] = c.cover.cells_per_image();
  j["beta"] = c.cover.beta;
  j["ratio"] = c.matcher.ratio;
  j["multi_cap"] = c.matcher.multi_cap;
  j["sigma"] = c.ransac.sigma;
  j["max_iters"] = c.ransac.max_iterations;
  j["sample_trials"] = c.ransac.sample_trials;
  j["min_inliers"] = c.ransac.min_inliers;
  j["confidence"] = c.ransac.confidence;
  j["multi_match_ransac"] = c.ransac.use_multi;
  return j;
}

inline ojson pose_json(const Pose& p) {
  ojson j;
  j["rotation"] = std::vector<double>(p.rotation.data(), p.rotation.data() + 9);
  j["center"] = std::vector<double>{p.center.x(), p.center.y(), p.center.z()};
  return j;
}

inline ojson record_to_json(const QueryRecord& r) {
  ojson j;
  j["id"] = r.id;
  j["registered"] = r.registered;
  j["features"] = r.features;
  j["unique_matches"] = r.unique_matches;
  j["multi_matches"] = r.multi_matches;
  j["inliers"] = r.inliers.total();
  j["unique_inliers"] = r.inliers.unique;
  j["multi_inliers"] = r.inliers.multi;
  j["iterations"] = r.iterations;
  j["samples_dropped"] = r.samples_dropped;
  j["multi_evaluations"] = r.multi_evaluations;
  j["position_error_m"] = r.error ? ojson(r.error->position_m) : ojson(nullptr);
  j["rotation_error_deg"] = r.error ? ojson(r.error->rotation_deg) : ojson(nullptr);
  j["pose"] = r.pose ? pose_json(*r.pose) : ojson(nullptr);
  if (!r.diagnostics.empty()) j["diagnostics"] = r.diagnostics;
  return j;
}

/// Throws if the stored aggregates disagree with the per-query records.
inline void check_consistency(const EvaluationReport& r) {
  Aggregates again = aggregate(r.queries);
  Aggregates stored = r.aggregates;
  // Timing medians are not part of the deterministic report.
  again.median_query_ms = stored.median_query_ms;
  again.median_ransac_ms = stored.median_ransac_ms;
  if (!(again == stored)) throw std::logic_error("report aggregates do not match per-query records");
}

inline ojson report_to_json(const EvaluationReport& r) {
  check_consistency(r);
  ojson j;
  j["config"] = config_to_json(r.config);
  ojson vocab;
  vocab["words"] = r.vocab_words;
  vocab["trained_on_scene"] = r.vocab_trained_on_scene;
  j["vocabulary"] = vocab;
  ojson m;
  m["budget_bytes"] = r.model.budget_bytes;
  m["size_bytes"] = r.model.size_bytes;
  m["scene_bytes"] = r.model.scene_bytes;
  m["compression_rate_percent"] = r.model.scene_bytes ? ojson(r.model.compression_rate()) : ojson(nullptr);
  m["full_points"] = r.model.full_points;
  m["compressed_points"] = r.model.compressed_points;
  m["budget_warning"] = r.model.budget_warning;
  m["cover_rounds"] = r.model.cover_rounds;
  m["full_selection_stop"] = r.model.full_stop;
  j["model"] = m;
  ojson a;
  a["queries"] = r.aggregates.total;
  a["registered"] = r.aggregates.registered;
  a["registration_rate_percent"] = r.aggregates.registration_rate;
  a["median_position_error_m"] = optional_json(r.aggregates.median_position_m);
  a["median_rotation_error_deg"] = optional_json(r.aggregates.median_rotation_deg);
  a["median_rule"] = "lower";
  j["aggregates"] = a;
  ojson qs = ojson::array();
  for (const QueryRecord& q : r.queries) qs.push_back(record_to_json(q));
  j["queries"] = qs;
  j["notes"] = r.notes;
  return j;
}

inline ojson report_timing_json(const EvaluationReport& r) {
  ojson j;
  j["vocab_seconds"] = r.vocab_seconds;
  j["compression_seconds"] = r.compression_seconds;
  j["localization_seconds"] = r.localization_seconds;
  j["median_query_ms"] = optional_json(r.aggregates.median_query_ms);
  j["median_ransac_ms"] = optional_json(r.aggregates.median_ransac_ms);
  ojson qs = ojson::array();
  for (const QueryRecord& q : r.queries) qs.push_back({{"id", q.id}, {"query_ms", q.query_ms}, {"ransac_ms", q.ransac_ms}});
  j["queries"] = qs;
  return j;
}

inline std::string fmt_opt(const std::optional<double>& v, int precision = 4) {
  if (!v) return "n/a";
  std::ostringstream os;
  os.precision(precision);
  os << *v;
  return os.str();
}

inline std::string report_markdown(const EvaluationReport& r) {
  std::ostringstream os;
  os << "# Localization report\n\n";
  os << "| metric | value |\n|---|---|\n";
  os << "| queries | " << r.aggregates.total << " |\n";
  os << "| registered | " << r.aggregates.registered << " (" << fmt_opt(r.aggregates.registration_rate) << " %) |\n";
  os << "| median position error (m) | " << fmt_opt(r.aggregates.median_position_m) << " |\n";
  os << "| median rotation error (deg) | " << fmt_opt(r.aggregates.median_rotation_deg) << " |\n";
  os << "| median query time (ms) | " << fmt_opt(r.aggregates.median_query_ms) << " |\n";
  os << "| median RANSAC time (ms) | " << fmt_opt(r.aggregates.median_ransac_ms) << " |\n";
  os << "| model size (bytes) | " << r.model.size_bytes << " of budget " << r.model.budget_bytes << " |\n";
  os << "| compression rate (%) | " << fmt_opt(r.model.compression_rate()) << " |\n";
  os << "| full / compressed points | " << r.model.full_points << " / " << r.model.compressed_points << " |\n";
  os << "| vocabulary training (s) | " << fmt_opt(r.vocab_seconds) << " |\n";
  os << "| compression (s) | " << fmt_opt(r.compression_seconds) << " |\n";
  os << "\n## Queries\n\n| id | registered | unique | multi | inliers (U+W) | pos err (m) | rot err (deg) |\n";
  os << "|---|---|---|---|---|---|---|\n";
  for (const QueryRecord& q : r.queries) {
    os << "| " << q.id << " | " << (q.registered ? "yes" : "no") << " | " << q.unique_matches << " | " << q.multi_matches
       << " | " << q.inliers.unique << "+" << q.inliers.multi << " | "
       << fmt_opt(q.error ? std::optional<double>(q.error->position_m) : std::nullopt) << " | "
       << fmt_opt(q.error ? std::optional<double>(q.error->rotation_deg) : std::nullopt) << " |\n";
  }
  os << "\n## Notes\n\n";
  for (const std::string& n : r.notes) os << "- " << n << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Ablation, rate sweep and baseline comparison

struct AblationSpec {
  std::uint32_t grid = 2;              // per-axis cells when the grid toggle is on
  std::vector<double> rates;           // optional compression-rate sweep (percent)
};

struct AblationRow {
  bool grid = false;
  bool multi = false;
  EvaluationReport report;
};

struct SweepRow {
  double rate_percent = 0.0;
  EvaluationReport report;
};

struct AblationTable {
  std::vector<AblationRow> rows;  // {-,-}, {Grid,-}, {-,MR}, {Grid,MR}
  std::vector<SweepRow> sweep;
};

/// Everything that can be shared across configurations of one scene.
struct Workspace {
  const SceneModel* scene = nullptr;
  Vocabulary vocab;
  PreparedQueries queries;
  double vocab_seconds = 0.0;
};

inline Workspace make_workspace(const SceneModel& scene, std::vector<QueryImage> queries, const PipelineConfig& config,
                                const Vocabulary* vocab = nullptr) {
  Workspace ws;
  ws.scene = &scene;
  const auto t0 = Clock::now();
  if (vocab) {
    ws.vocab = *vocab;
  } else {
    ws.vocab = run_stage("vocab", [&] {
      std::vector<Descriptor> descs;
      for (const PointRecord& p : scene.points()) descs.push_back(p.descriptor);
      return train_vocabulary(descs, config.vocab_words, vocab_seed(config.seed));
    });
  }
  ws.vocab_seconds = elapsed_ms(t0) / 1000.0;
  ws.queries = run_stage("match", [&] { return prepare_queries(std::move(queries), ws.vocab, config.threads); });
  return ws;
}

inline EvaluationReport run_configuration(const Workspace& ws, const PipelineConfig& config) {
  const auto t0 = Clock::now();
  const HybridModel model =
      run_stage("compress", [&] { return compress(*ws.scene, ws.vocab, resolved_cover(*ws.scene, config)); });
  const double comp_s = elapsed_ms(t0) / 1000.0;
  EvaluationReport rep = evaluate_model(model, *ws.scene, ws.queries, config);
  rep.vocab_seconds = ws.vocab_seconds;
  rep.compression_seconds = comp_s;
  return rep;
}

inline AblationTable run_ablation(const AblationSpec& spec, const Workspace& ws, const PipelineConfig& base) {
  if (spec.grid < 2) throw std::invalid_argument("ablation grid must be >= 2 so the toggle changes q");
  AblationTable t;
  for (bool grid : {false, true}) {
    PipelineConfig c = base;
    c.cover.grid = grid ? spec.grid : 1;
    const auto t0 = Clock::now();
    const HybridModel model = run_stage("compress", [&] { return compress(*ws.scene, ws.vocab, resolved_cover(*ws.scene, c)); });
    const double comp_s = elapsed_ms(t0) / 1000.0;
    for (bool multi : {false, true}) {
      c.ransac.use_multi = multi;
      AblationRow row{grid, multi, evaluate_model(model, *ws.scene, ws.queries, c)};
      row.report.vocab_seconds = ws.vocab_seconds;
      row.report.compression_seconds = comp_s;
      t.rows.push_back(std::move(row));
    }
  }
  // Paper-style row order: {-,-}, {Grid,-}, {-,MR}, {Grid,MR}.
  std::swap(t.rows[1], t.rows[2]);
  for (double rate : spec.rates) {
    PipelineConfig c = base;
    c.cover.grid = spec.grid;
    c.ransac.use_multi = true;
    c.rate_percent = rate;
    t.sweep.push_back({rate, run_configuration(ws, c)});
  }
  return t;
}

inline std::string variant_name(bool grid, bool multi) {
  return std::string("{") + (grid ? "Grid" : "-") + "," + (multi ? "MR" : "-") + "}";
}

inline ojson ablation_to_json(const AblationTable& t) {
  ojson j;
  ojson rows = ojson::array();
  for (const AblationRow& r : t.rows) {
    ojson row;
    row["variant"] = variant_name(r.grid, r.multi);
    row["grid"] = r.grid;
    row["multi_match_ransac"] = r.multi;
    std::uint64_t evals = 0;
    for (const QueryRecord& q : r.report.queries) evals += q.multi_evaluations;
    row["multi_evaluations"] = evals;
    row["report"] = report_to_json(r.report);
    rows.push_back(row);
  }
  j["rows"] = rows;
  ojson sweep = ojson::array();
  for (const SweepRow& s : t.sweep) sweep.push_back({{"rate_percent", s.rate_percent}, {"report", report_to_json(s.report)}});
  j["sweep"] = sweep;
  return j;
}

inline std::string ablation_markdown(const AblationTable& t) {
  std::ostringstream os;
  os << "# Ablation\n\n| variant | q | registered (%) | median pos err (m) | median rot err (deg) | model bytes |\n";
  os << "|---|---|---|---|---|---|\n";
  for (const AblationRow& r : t.rows) {
    os << "| " << variant_name(r.grid, r.multi) << " | " << r.report.config.cover.cells_per_image() << " | "
       << fmt_opt(r.report.aggregates.registration_rate) << " | " << fmt_opt(r.report.aggregates.median_position_m)
       << " | " << fmt_opt(r.report.aggregates.median_rotation_deg) << " | " << r.report.model.size_bytes << " |\n";
  }
  if (!t.sweep.empty()) {
    os << "\n## Compression-rate sweep\n\n| rate (%) | registered (%) | median pos err (m) | model bytes |\n";
    os << "|---|---|---|---|\n";
    for (const SweepRow& s : t.sweep) {
      os << "| " << s.rate_percent << " | " << fmt_opt(s.report.aggregates.registration_rate) << " | "
         << fmt_opt(s.report.aggregates.median_position_m) << " | " << s.report.model.size_bytes << " |\n";
    }
  }
  return os.str();
}

struct Comparison {
  EvaluationReport hybrid;
  EvaluationReport full_only;
  [[nodiscard]] double delta() const {
    return hybrid.aggregates.registration_rate - full_only.aggregates.registration_rate;
  }
};

/// Hybrid split (config.cover.full_fraction) against spending the whole
/// budget on full points, with identical budget, vocabulary and seeds.
inline Comparison compare_baseline(const Workspace& ws, const PipelineConfig& config) {
  PipelineConfig full_only = config;
  full_only.cover.full_fraction = 1.0;
  return {run_configuration(ws, config), run_configuration(ws, full_only)};
}

inline ojson comparison_to_json(const Comparison& c) {
  ojson j;
  j["hybrid"] = report_to_json(c.hybrid);
  j["full_only"] = report_to_json(c.full_only);
  j["registration_rate_delta"] = c.delta();
  j["hybrid_size_bytes"] = c.hybrid.model.size_bytes;
  j["full_only_size_bytes"] = c.full_only.model.size_bytes;
  return j;
}

inline std::string comparison_markdown(const Comparison& c) {
  std::ostringstream os;
  os << "# Hybrid vs full-only\n\n| configuration | full fraction | registered (%) | median pos err (m) | model bytes | "
        "full / compressed |\n|---|---|---|---|---|---|\n";
  for (const auto* r : {&c.hybrid, &c.full_only}) {
    os << "| " << (r == &c.hybrid ? "hybrid" : "full-only") << " | " << r->config.cover.full_fraction << " | "
       << fmt_opt(r->aggregates.registration_rate) << " | " << fmt_opt(r->aggregates.median_position_m) << " | "
       << r->model.size_bytes << " | " << r->model.full_points << " / " << r->model.compressed_points << " |\n";
  }
  os << "\nRegistration-rate delta: " << fmt_opt(c.delta()) << " percentage points\n";
  return os.str();
}

inline std::string dump_json(const ojson& j) { return j.dump(2) + "\n"; }

}  // namespace hsc
