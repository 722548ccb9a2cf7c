// hsc: command-line front end for synthetic scene generation, vocabulary
// training, hybrid compression, localization and evaluation runs.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hsc/hsc.hpp"

namespace fs = std::filesystem;

namespace {

int verbosity() {
  const char* v = std::getenv("HSC_LOG");
  if (!v) return 1;
  const std::string s(v);
  if (s == "quiet" || s == "0") return 0;
  if (s == "debug" || s == "2") return 2;
  return 1;
}

void log(int level, const std::string& msg) {
  if (verbosity() >= level) std::cerr << msg << "\n";
}

struct CoverFlags {
  std::optional<double> rate;
  std::optional<std::uint64_t> budget_bytes;
  double full_fraction = 0.75;
  std::uint32_t grid = 2;
  std::uint32_t cover_k = 100;
  std::uint32_t beta = 10;

  void add(CLI::App* app) {
    auto* r = app->add_option("--rate", rate, "Budget as percent of the uncompressed scene size");
    auto* b = app->add_option("--budget-bytes", budget_bytes, "Budget in bytes");
    r->excludes(b);
    app->add_option("--full-fraction", full_fraction, "Share of the budget for full-descriptor points")
        ->capture_default_str();
    app->add_option("--grid", grid, "Grid cells per image axis (q = grid^2)")->capture_default_str();
    app->add_option("--cover-k", cover_k, "Cover target K per image")->capture_default_str();
    app->add_option("--beta", beta, "Maximum selected points per word")->capture_default_str();
  }

  void apply(hsc::PipelineConfig& c) const {
    c.cover.full_fraction = full_fraction;
    c.cover.grid = grid;
    c.cover.cover_k = cover_k;
    c.cover.beta = beta;
    if (budget_bytes) {
      c.cover.budget_bytes = *budget_bytes;
      c.rate_percent.reset();
    } else {
      c.rate_percent = rate.value_or(1.5);
    }
  }
};

struct LocalizeFlags {
  hsc::MatcherConfig matcher;
  hsc::RansacConfig ransac;
  bool no_multi = false;

  void add(CLI::App* app) {
    app->add_option("--ratio", matcher.ratio, "Ratio-test threshold")->capture_default_str();
    app->add_option("--multi-cap", matcher.multi_cap, "Candidates kept per multi-match")->capture_default_str();
    app->add_option("--sigma", ransac.sigma, "Inlier threshold in pixels")->capture_default_str();
    app->add_option("--max-iters", ransac.max_iterations, "RANSAC iteration cap")->capture_default_str();
    app->add_option("--sample-trials", ransac.sample_trials, "Failed co-visibility draws before a sample is dropped")
        ->capture_default_str();
    app->add_option("--min-inliers", ransac.min_inliers, "Inliers needed to register a query")->capture_default_str();
    app->add_option("--confidence", ransac.confidence, "Early-exit confidence")->capture_default_str();
    app->add_flag("--no-multi", no_multi, "Score hypotheses with unique matches only");
  }

  void apply(hsc::PipelineConfig& c) const {
    c.matcher = matcher;
    c.ransac = ransac;
    c.ransac.use_multi = !no_multi;
  }
};

struct ReportFlags {
  std::string json_path;
  std::string markdown_path;

  void add(CLI::App* app) {
    app->add_option("--report", json_path, "JSON report path")->required();
    app->add_option("--markdown", markdown_path, "Markdown report path");
  }

  /// The JSON report stays deterministic; wall-clock numbers go next to it.
  void write(const hsc::ojson& report, const hsc::ojson& timing, const std::string& markdown) const {
    hsc::write_file_text(json_path, hsc::dump_json(report));
    hsc::write_file_text(json_path + ".timing.json", hsc::dump_json(timing));
    if (!markdown_path.empty()) hsc::write_file_text(markdown_path, markdown);
  }
};

std::string summary_line(const hsc::EvaluationReport& r) {
  return "registered " + std::to_string(r.aggregates.registered) + "/" + std::to_string(r.aggregates.total) +
         " (" + hsc::fmt_opt(r.aggregates.registration_rate) + " %), median error " +
         hsc::fmt_opt(r.aggregates.median_position_m) + " m / " + hsc::fmt_opt(r.aggregates.median_rotation_deg) +
         " deg";
}

hsc::SceneModel load_scene_any(const std::string& path) {
  return hsc::run_stage("load", [&] { return hsc::load_scene(path, hsc::scene_format_for(path)); });
}

std::vector<hsc::QueryImage> load_queries_any(const std::string& path) {
  return hsc::run_stage("load", [&] { return hsc::load_queries(path); });
}

std::optional<hsc::Vocabulary> load_vocab_opt(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return hsc::run_stage("load", [&] { return hsc::load_vocabulary(path); });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid scene compression and localization toolkit"};
  app.require_subcommand(1);
  unsigned threads = 0;
  std::uint64_t seed = 1;
  app.add_option("--threads", threads, "Worker threads (0: all cores)");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic scene and query set");
  hsc::SyntheticSpec spec;
  std::string synth_scene, synth_queries;
  synth->add_option("--points", spec.n_points, "3D points")->capture_default_str();
  synth->add_option("--cameras", spec.n_cameras, "Database cameras")->capture_default_str();
  synth->add_option("--queries", spec.n_queries, "Query images")->capture_default_str();
  synth->add_option("--noise", spec.noise_px, "Query keypoint noise (pixels)")->capture_default_str();
  synth->add_option("--clutter", spec.clutter_ratio, "Clutter features per true feature")->capture_default_str();
  synth->add_option("--seed", spec.seed, "Generator seed")->capture_default_str();
  synth->add_option("--out", synth_scene, "Scene file (.hsc binary or .json)")->required();
  synth->add_option("--queries-out", synth_queries, "Query file (.json)")->required();

  // vocab-train
  auto* vt = app.add_subcommand("vocab-train", "Train a k-means vocabulary on scene point descriptors");
  std::string vt_scene, vt_out;
  std::size_t words = 6000;
  vt->add_option("--scene", vt_scene, "Scene file")->required();
  vt->add_option("--words", words, "Vocabulary size k")->capture_default_str();
  vt->add_option("--seed", seed, "Training seed")->capture_default_str();
  vt->add_option("--out", vt_out, "Vocabulary file")->required();

  // compress
  auto* comp = app.add_subcommand("compress", "Build a hybrid compressed model");
  std::string comp_scene, comp_vocab, comp_out;
  CoverFlags comp_cover;
  comp->add_option("--scene", comp_scene, "Scene file")->required();
  comp->add_option("--vocab", comp_vocab, "Vocabulary file")->required();
  comp->add_option("--out", comp_out, "Model file")->required();
  comp_cover.add(comp);

  // localize
  auto* loc = app.add_subcommand("localize", "Localize queries against a compressed model");
  std::string loc_model, loc_vocab, loc_queries, loc_dump;
  LocalizeFlags loc_flags;
  ReportFlags loc_report;
  loc->add_option("--model", loc_model, "Model file")->required();
  loc->add_option("--vocab", loc_vocab, "Vocabulary the model was built with")->required();
  loc->add_option("--queries", loc_queries, "Query file")->required();
  loc->add_option("--seed", seed, "RANSAC seed")->capture_default_str();
  loc->add_option("--dump-matches", loc_dump, "Write per-query matches as JSON");
  loc_flags.add(loc);
  loc_report.add(loc);

  // evaluate / ablate / compare share scene, queries and all science flags.
  struct RunFlags {
    std::string scene, queries, vocab;
    std::size_t words = 6000;
    CoverFlags cover;
    LocalizeFlags localize;
    ReportFlags report;
  };
  auto add_run = [&](CLI::App* sub, RunFlags& f) {
    sub->add_option("--scene", f.scene, "Scene file")->required();
    sub->add_option("--queries", f.queries, "Query file")->required();
    sub->add_option("--vocab", f.vocab, "Vocabulary file (trained on the scene when omitted)");
    sub->add_option("--words", f.words, "Vocabulary size when training")->capture_default_str();
    sub->add_option("--seed", seed, "Global seed")->capture_default_str();
    f.cover.add(sub);
    f.localize.add(sub);
    f.report.add(sub);
  };
  auto* eval = app.add_subcommand("evaluate", "Run the full pipeline and report");
  RunFlags eval_flags;
  add_run(eval, eval_flags);

  auto* abl = app.add_subcommand("ablate", "Grid x multi-match ablation plus optional rate sweep");
  RunFlags abl_flags;
  std::vector<double> rates;
  add_run(abl, abl_flags);
  abl->add_option("--rates", rates, "Compression rates (percent) to sweep");

  auto* cmp = app.add_subcommand("compare", "Hybrid split vs full-points-only at the same budget");
  RunFlags cmp_flags;
  add_run(cmp, cmp_flags);

  CLI11_PARSE(app, argc, argv);

  auto pipeline_config = [&](const RunFlags& f) {
    hsc::PipelineConfig c;
    c.seed = seed;
    c.threads = threads;
    c.vocab_words = f.words;
    f.cover.apply(c);
    f.localize.apply(c);
    return c;
  };

  try {
    if (*synth) {
      const auto gen = hsc::run_stage("synth", [&] { return hsc::generate_synthetic_scene(spec); });
      for (const auto& d : gen.diagnostics) log(2, "synth: " + d);
      const auto bytes = hsc::run_stage("write", [&] {
        return hsc::save_scene(gen.scene, synth_scene, hsc::scene_format_for(synth_scene));
      });
      hsc::run_stage("write", [&] { return hsc::save_queries(gen.queries, synth_queries); });
      log(1, "synth: " + std::to_string(gen.scene.points().size()) + " points, " +
                 std::to_string(gen.scene.cameras().size()) + " cameras, " + std::to_string(gen.queries.size()) +
                 " queries, scene " + std::to_string(bytes) + " bytes");
    } else if (*vt) {
      const hsc::SceneModel scene = load_scene_any(vt_scene);
      const hsc::Vocabulary v = hsc::run_stage("vocab", [&] {
        std::vector<hsc::Descriptor> descs;
        for (const auto& p : scene.points()) descs.push_back(p.descriptor);
        return hsc::train_vocabulary(descs, words, seed);
      });
      hsc::run_stage("write", [&] { return hsc::save_vocabulary(v, vt_out); });
      log(1, "vocab-train: " + std::to_string(v.size()) + " words");
    } else if (*comp) {
      const hsc::SceneModel scene = load_scene_any(comp_scene);
      const hsc::Vocabulary v = *load_vocab_opt(comp_vocab);
      hsc::PipelineConfig c;
      comp_cover.apply(c);
      const hsc::HybridModel m =
          hsc::run_stage("compress", [&] { return hsc::compress(scene, v, hsc::resolved_cover(scene, c)); });
      if (m.budget_warning) log(0, "compress: warning: budget cannot hold a single full point; model is empty");
      hsc::run_stage("write", [&] { return hsc::save_hybrid(m, comp_out); });
      log(1, "compress: " + std::to_string(m.full.size()) + " full + " + std::to_string(m.compressed.size()) +
                 " compressed points, " + std::to_string(m.serialized_size()) + " of " +
                 std::to_string(m.config.budget_bytes) + " bytes");
    } else if (*loc) {
      const hsc::Vocabulary v = *load_vocab_opt(loc_vocab);
      const hsc::HybridModel m = hsc::run_stage("load", [&] { return hsc::load_hybrid(loc_model, v); });
      auto queries = load_queries_any(loc_queries);
      hsc::PipelineConfig c;
      c.seed = seed;
      c.threads = threads;
      c.rate_percent.reset();
      c.vocab_words = v.size();
      loc_flags.apply(c);
      const auto pq = hsc::run_stage("match", [&] { return hsc::prepare_queries(std::move(queries), v, threads); });
      if (!loc_dump.empty()) {
        hsc::ojson dump = hsc::ojson::array();
        for (std::size_t i = 0; i < pq.queries.size(); ++i) {
          const auto ms = hsc::match_query(pq.queries[i], pq.words[i], m, c.matcher);
          hsc::ojson q;
          q["id"] = pq.queries[i].id;
          hsc::ojson u = hsc::ojson::array();
          for (const auto& x : ms.unique) u.push_back({{"feature", x.feature}, {"point", m.full[x.point].id}, {"distance", x.distance}});
          hsc::ojson w = hsc::ojson::array();
          for (const auto& x : ms.multi) {
            std::vector<std::uint32_t> ids;
            for (auto p : x.points) ids.push_back(m.compressed[p].id);
            w.push_back({{"feature", x.feature}, {"word", x.word}, {"points", ids}});
          }
          q["unique"] = u;
          q["multi"] = w;
          dump.push_back(q);
        }
        hsc::write_file_text(loc_dump, hsc::dump_json(dump));
      }
      hsc::EvaluationReport rep;
      rep.config = c;
      rep.config.cover = m.config;
      rep.vocab_words = v.size();
      rep.vocab_trained_on_scene = false;
      rep.model = {m.config.budget_bytes, m.serialized_size(), 0, m.full.size(), m.compressed.size(), m.budget_warning,
                   m.cover_rounds, hsc::to_string(m.full_stop)};
      const auto t0 = hsc::Clock::now();
      rep.queries = hsc::run_stage("localize", [&] {
        return hsc::localize_queries(m, pq, c.matcher, c.ransac, c.seed, threads);
      });
      rep.localization_seconds = hsc::elapsed_ms(t0) / 1000.0;
      rep.aggregates = hsc::aggregate(rep.queries);
      rep.notes = hsc::protocol_notes(false);
      loc_report.write(hsc::report_to_json(rep), hsc::report_timing_json(rep), hsc::report_markdown(rep));
      log(1, "localize: " + summary_line(rep));
    } else if (*eval) {
      const hsc::SceneModel scene = load_scene_any(eval_flags.scene);
      auto queries = load_queries_any(eval_flags.queries);
      const auto v = load_vocab_opt(eval_flags.vocab);
      const auto rep = hsc::run_pipeline(scene, std::move(queries), pipeline_config(eval_flags), v ? &*v : nullptr);
      eval_flags.report.write(hsc::report_to_json(rep), hsc::report_timing_json(rep), hsc::report_markdown(rep));
      log(1, "evaluate: " + summary_line(rep));
    } else if (*abl) {
      const hsc::SceneModel scene = load_scene_any(abl_flags.scene);
      const auto config = pipeline_config(abl_flags);
      const auto v = load_vocab_opt(abl_flags.vocab);
      const auto ws = hsc::make_workspace(scene, load_queries_any(abl_flags.queries), config, v ? &*v : nullptr);
      hsc::AblationSpec as;
      as.grid = std::max<std::uint32_t>(2, abl_flags.cover.grid);
      as.rates = rates;
      const auto table = hsc::run_ablation(as, ws, config);
      hsc::ojson timing = hsc::ojson::array();
      for (const auto& r : table.rows) timing.push_back(hsc::report_timing_json(r.report));
      for (const auto& s : table.sweep) timing.push_back(hsc::report_timing_json(s.report));
      abl_flags.report.write(hsc::ablation_to_json(table), timing, hsc::ablation_markdown(table));
      for (const auto& r : table.rows) log(1, "ablate " + hsc::variant_name(r.grid, r.multi) + ": " + summary_line(r.report));
    } else if (*cmp) {
      const hsc::SceneModel scene = load_scene_any(cmp_flags.scene);
      const auto config = pipeline_config(cmp_flags);
      const auto v = load_vocab_opt(cmp_flags.vocab);
      const auto ws = hsc::make_workspace(scene, load_queries_any(cmp_flags.queries), config, v ? &*v : nullptr);
      const auto c = hsc::compare_baseline(ws, config);
      hsc::ojson timing;
      timing["hybrid"] = hsc::report_timing_json(c.hybrid);
      timing["full_only"] = hsc::report_timing_json(c.full_only);
      cmp_flags.report.write(hsc::comparison_to_json(c), timing, hsc::comparison_markdown(c));
      log(1, "compare: hybrid " + summary_line(c.hybrid));
      log(1, "compare: full-only " + summary_line(c.full_only));
    }
  } catch (const hsc::StageError& e) {
    std::cerr << "hsc: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "hsc: [" << app.get_subcommands().front()->get_name() << "] " << e.what() << "\n";
    return 1;
  }
  return 0;
}
