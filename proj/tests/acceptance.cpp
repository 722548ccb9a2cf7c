// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "test_util.hpp"

using namespace hsc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int precision = 3) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

// 1. Lazy greedy selection equals exhaustive per-iteration recomputation.
Outcome greedy_oracle() {
  Rng rng(101);
  int mismatches = 0, multi_round = 0, q1 = 0, q4 = 0;
  for (int i = 0; i < 50; ++i) {
    const auto in = testutil::random_cover_instance(rng);
    const CoverProblem pb = build_cover_problem(in.scene, in.words, in.vocab_size, in.config);
    const auto lazy = select_full_points(pb, in.budget);
    const auto ref = testutil::exhaustive_greedy(pb, in.budget);
    mismatches += lazy.indices != ref.picks;
    multi_round += ref.rounds > 1;
    (in.config.cells_per_image() == 1 ? q1 : q4)++;
  }
  return {mismatches == 0, "50 instances (q=1: " + std::to_string(q1) + ", q=4: " + std::to_string(q4) +
                               ", multi-round: " + std::to_string(multi_round) + "), mismatches " +
                               std::to_string(mismatches)};
}

// 2. Closed forms of the distinctiveness weight and the point gain.
Outcome closed_forms() {
  struct AlphaRow {
    std::uint64_t count;
    std::uint32_t beta;
    double expect;
  };
  const AlphaRow alpha_rows[] = {{0, 10, 1.0}, {10, 10, 0.0}, {5, 10, 0.5}, {1, 2, 0.5},
                                 {2, 2, 0.0},  {12, 10, 0.0}, {3, 2, 0.0},  {1, 4, 0.75}};
  int wrong = 0, rows = 0;
  for (const auto& r : alpha_rows) {
    ++rows;
    wrong += alpha_weight(r.count, r.beta) != r.expect;
  }
  // Two cameras with four cells each. Points 0 and 1 share word 0 (beta 2).
  CoverProblem pb;
  pb.point_cells = {{0, 1, 2}, {3}, {0, 4}, {5, 6}};
  pb.cell_points.resize(8);
  for (std::uint32_t p = 0; p < pb.point_cells.size(); ++p)
    for (std::uint32_t c : pb.point_cells[p]) pb.cell_points[c].push_back(p);
  pb.words = {0, 0, 1, 0};
  pb.ids = {0, 1, 2, 3};
  pb.full_bytes = {148, 144, 148, 148};
  pb.vocab_size = 2;
  pb.cell_target = 1;
  pb.beta = 2;
  struct GainRow {
    std::vector<std::size_t> selected;
    std::size_t point;
    double expect;
  };
  const GainRow gain_rows[] = {
      {{}, 0, 3.0},        // alpha 1, three open cells
      {{1}, 0, 1.5},       // alpha 0.5, three open cells
      {{1, 2}, 0, 1.0},    // cell 0 now covered
      {{1, 0}, 3, 0.0},    // word 0 holds beta points: clamped
      {{2}, 2, 0.0},       // not reached: selected points are never scored
  };
  for (const auto& r : gain_rows) {
    if (r.point == 2) continue;
    ++rows;
    GainState st(pb);
    for (std::size_t s : r.selected) st.select(s);
    wrong += point_gain(st, r.point) != r.expect;
  }
  CoverProblem covered = pb;
  covered.point_cells[0] = {0};
  GainState st(covered);
  st.select(2);
  ++rows;
  wrong += point_gain(st, 0) != 0.0;
  return {wrong == 0, std::to_string(rows) + " fixture rows, " + std::to_string(wrong) + " wrong"};
}

// 3. P3P recovers the ground truth on noiseless random configurations.
Outcome p3p_round_trip() {
  Rng rng(103);
  int missed = 0, bad_residual = 0;
  double worst_center = 0, worst_rot = 0, worst_residual = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto c = testutil::random_p3p_case(rng);
    const P3PResult r = solve_p3p(c.corrs, c.intrinsics);
    double best_center = 1e300, best_rot = 1e300;
    for (const Pose& p : r.poses) {
      for (const auto& corr : c.corrs) {
        const double e = reprojection_error(p, c.intrinsics, corr.pixel, corr.point);
        worst_residual = std::max(worst_residual, e);
        bad_residual += !(e < 1e-6);
      }
      const PoseError e = pose_error(p, c.truth);
      if (e.position_m < best_center) {
        best_center = e.position_m;
        best_rot = e.rotation_deg;
      }
    }
    if (!(best_center < 1e-6 && best_rot < 1e-6)) {
      ++missed;
    } else {
      worst_center = std::max(worst_center, best_center);
      worst_rot = std::max(worst_rot, best_rot);
    }
  }
  return {missed == 0 && bad_residual == 0,
          "1000 trials, missed " + std::to_string(missed) + ", residuals >= 1e-6 px: " + std::to_string(bad_residual) +
              ", worst center " + fmt(worst_center) + " m, rotation " + fmt(worst_rot) + " deg, residual " +
              fmt(worst_residual) + " px"};
}

struct StandardScene {
  SyntheticScene gen;
  Vocabulary vocab;
};

// 4. Co-visibility sampler never accepts a pair without a shared camera.
Outcome sampler_soundness(const StandardScene& s) {
  const HybridModel m = compress(s.gen.scene, s.vocab, {.budget_bytes = budget_for_rate(s.gen.scene, 1.5)});
  Rng rng(104);
  SamplerStats st;
  std::uint64_t completed = 0, calls = 0;
  double busy = 0;
  for (std::size_t round = 0; completed < 10000 && round < 1000; ++round) {
    for (const QueryImage& q : s.gen.queries) {
      const MatchSet ms = match_query(q, assign_feature_words(q, s.vocab), m, {});
      if (ms.unique.size() < 3) continue;
      const auto t0 = Clock::now();
      for (int i = 0; i < 100; ++i) {
        completed += sample_covisible(ms.unique, m, 10, rng, &st).has_value();
        ++calls;
      }
      busy += seconds_since(t0);
    }
  }
  const double per_call_us = 1e6 * busy / static_cast<double>(calls);
  return {completed >= 10000 && st.violations == 0 && per_call_us < 1000.0,
          std::to_string(completed) + " samples, " + std::to_string(st.accepted_pairs) + " accepted pairs, " +
              std::to_string(st.violations) + " violations, " + fmt(per_call_us) + " us per sample"};
}

// 5. Adding multi-matches never lowers a pose's inlier count; one vote per feature.
Outcome multi_monotone(const StandardScene& s) {
  const HybridModel m = compress(s.gen.scene, s.vocab, {.budget_bytes = budget_for_rate(s.gen.scene, 1.5)});
  Rng rng(105);
  int poses = 0, violations = 0;
  std::uint64_t multi_votes = 0;
  for (const QueryImage& q : s.gen.queries) {
    const MatchSet ms = match_query(q, assign_feature_words(q, s.vocab), m, {});
    for (int level = 0; level < 5; ++level) {
      Pose p = *q.ground_truth;
      const double spread = 0.25 * level;
      p.center += Eigen::Vector3d(normal(rng, 0, spread), normal(rng, 0, spread), normal(rng, 0, spread));
      const InlierCount u = evaluate_pose(p, ms.unique, {}, m, q.intrinsics, 4.0);
      const InlierCount uw = evaluate_pose(p, ms.unique, ms.multi, m, q.intrinsics, 4.0);
      std::uint32_t per_feature_sum = 0;
      for (std::size_t i = 0; i < ms.multi.size(); ++i) {
        const auto one = evaluate_pose(p, {}, std::span(ms.multi).subspan(i, 1), m, q.intrinsics, 4.0);
        violations += one.multi > 1;
        per_feature_sum += one.multi;
      }
      violations += uw.total() < u.total();
      violations += per_feature_sum != uw.multi;
      multi_votes += uw.multi;
      ++poses;
    }
  }
  return {poses == 100 && violations == 0, std::to_string(poses) + " poses, " + std::to_string(violations) +
                                               " violations, " + std::to_string(multi_votes) + " multi-match votes"};
}

// 6. Serialized model size sits within one full point plus one compressed point of the budget.
Outcome budget_contract(const StandardScene& s) {
  std::uint64_t largest = 0;
  for (const auto& p : s.gen.scene.points()) largest = std::max(largest, bytes_per_full_point(p));
  bool ok = true;
  std::string detail;
  for (double rate : {0.5, 1.5, 5.0}) {
    const std::uint64_t budget = budget_for_rate(s.gen.scene, rate);
    const HybridModel m = compress(s.gen.scene, s.vocab, {.budget_bytes = budget});
    const std::uint64_t size = serialize_hybrid(m).size();
    const bool in = size <= budget && size + largest + kCompressedPointBytes >= budget;
    ok = ok && in;
    detail += (detail.empty() ? "" : "; ") + fmt(rate) + "%: " + std::to_string(size) + "/" + std::to_string(budget) + " B";
  }
  return {ok, detail + " (slack allowed " + std::to_string(largest + kCompressedPointBytes) + " B)"};
}

struct SeedRun {
  double rows[4] = {};  // {-,-}, {Grid,-}, {-,MR}, {Grid,MR}
  double full_only = 0;
};

PipelineConfig benchmark_config(std::uint64_t seed) {
  PipelineConfig c;
  c.seed = seed;
  c.vocab_words = 1024;
  c.rate_percent = 1.5;
  return c;
}

std::vector<SeedRun> benchmark_sweep(const StandardScene& first) {
  std::vector<SeedRun> runs;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const PipelineConfig c = benchmark_config(seed);
    SyntheticScene other;
    const SyntheticScene* gen = &first.gen;
    if (seed != 1) {
      other = generate_synthetic_scene(testutil::standard_spec(seed));
      gen = &other;
    }
    const Workspace ws = make_workspace(gen->scene, gen->queries, c, seed == 1 ? &first.vocab : nullptr);
    const AblationTable t = run_ablation({.grid = 2, .rates = {}}, ws, c);
    SeedRun r;
    for (int i = 0; i < 4; ++i) r.rows[i] = t.rows[static_cast<std::size_t>(i)].report.aggregates.registration_rate;
    PipelineConfig full_only = c;
    full_only.cover.full_fraction = 1.0;
    r.full_only = run_configuration(ws, full_only).aggregates.registration_rate;
    std::cout << "  seed " << seed << ": {-,-} " << r.rows[0] << ", {Grid,-} " << r.rows[1] << ", {-,MR} " << r.rows[2]
              << ", {Grid,MR} " << r.rows[3] << ", full-only " << r.full_only << "\n";
    runs.push_back(r);
  }
  return runs;
}

double mean_of(const std::vector<SeedRun>& runs, const std::function<double(const SeedRun&)>& f) {
  double s = 0;
  for (const auto& r : runs) s += f(r);
  return s / static_cast<double>(runs.size());
}

// 7. Hybrid beats or ties the full-points-only baseline at 1.5 %.
Outcome hybrid_vs_full(const std::vector<SeedRun>& runs) {
  int wins = 0;
  for (const auto& r : runs) wins += r.rows[3] >= r.full_only;
  const double hybrid = mean_of(runs, [](const SeedRun& r) { return r.rows[3]; });
  const double full = mean_of(runs, [](const SeedRun& r) { return r.full_only; });
  return {hybrid >= full && wins >= 8, "mean hybrid " + fmt(hybrid) + "% vs full-only " + fmt(full) +
                                           "%, hybrid wins or ties " + std::to_string(wins) + "/10 seeds"};
}

// 8. Ablation ordering: {Grid,MR} >= each single toggle >= {-,-}.
Outcome ablation_order(const std::vector<SeedRun>& runs) {
  const std::pair<int, int> pairs[] = {{3, 1}, {3, 2}, {1, 0}, {2, 0}};
  const char* names[] = {"{-,-}", "{Grid,-}", "{-,MR}", "{Grid,MR}"};
  bool ok = true;
  std::string detail;
  for (auto [hi, lo] : pairs) {
    int inversions = 0;
    for (const auto& r : runs) inversions += r.rows[hi] < r.rows[lo];
    const double mh = mean_of(runs, [hi](const SeedRun& r) { return r.rows[hi]; });
    const double ml = mean_of(runs, [lo](const SeedRun& r) { return r.rows[lo]; });
    ok = ok && mh >= ml && inversions <= 1;
    detail += std::string(detail.empty() ? "" : "; ") + names[hi] + " " + fmt(mh) + " >= " + names[lo] + " " + fmt(ml) +
              " (" + std::to_string(inversions) + " inversions)";
  }
  return {ok, detail};
}

// 9. Every CLI subcommand is byte-reproducible.
std::string read_all(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome cli_determinism() {
  const std::string cli = HSC_CLI_PATH;
  const auto root = testutil::temp_dir("acceptance_cli");
  const std::vector<std::string> steps = {
      "synth --points 3000 --cameras 20 --queries 10 --seed 5 --out scene.hsc --queries-out queries.json",
      "vocab-train --scene scene.hsc --words 128 --seed 3 --out vocab.hvc",
      "compress --scene scene.hsc --vocab vocab.hvc --rate 2 --out model.hscz",
      "localize --model model.hscz --vocab vocab.hvc --queries queries.json --seed 4 --report localize.json "
      "--dump-matches matches.json",
      "evaluate --scene scene.hsc --queries queries.json --words 128 --rate 2 --seed 6 --report evaluate.json",
      "ablate --scene scene.hsc --queries queries.json --vocab vocab.hvc --rates 1 2 --report ablate.json",
      "compare --scene scene.hsc --queries queries.json --vocab vocab.hvc --rate 2 --report compare.json",
  };
  for (const char* run : {"a", "b"}) {
    const auto dir = root / run;
    std::filesystem::create_directories(dir);
    for (const auto& step : steps) {
      const std::string cmd = "cd '" + dir.string() + "' && HSC_LOG=quiet '" + cli + "' " + step;
      if (std::system(cmd.c_str()) != 0) return {false, "command failed: " + step};
    }
  }
  int compared = 0, differing = 0;
  std::string diff_names;
  for (const auto& e : std::filesystem::directory_iterator(root / "a")) {
    const std::string name = e.path().filename().string();
    if (name.ends_with(".timing.json")) continue;  // wall-clock sidecars
    ++compared;
    if (read_all(e.path()) != read_all(root / "b" / name)) {
      ++differing;
      diff_names += " " + name;
    }
  }
  return {compared >= 9 && differing == 0, std::to_string(compared) + " artifacts from " + std::to_string(steps.size()) +
                                               " subcommands, " + std::to_string(differing) + " differ" + diff_names};
}

// 10. Noiseless scene at full budget localizes every query exactly.
Outcome noiseless_sanity() {
  auto spec = testutil::standard_spec(7);
  spec.noise_px = 0.0;
  const auto gen = generate_synthetic_scene(spec);
  PipelineConfig c = benchmark_config(7);
  c.rate_percent = 100.0;
  const EvaluationReport r = run_pipeline(gen.scene, gen.queries, c);
  const auto& a = r.aggregates;
  const bool ok = a.registered == a.total && a.total > 0 && a.median_position_m && *a.median_position_m < 1e-6 &&
                  a.median_rotation_deg && *a.median_rotation_deg < 1e-6;
  return {ok, std::to_string(a.registered) + "/" + std::to_string(a.total) + " registered, median error " +
                  fmt(a.median_position_m.value_or(-1)) + " m / " + fmt(a.median_rotation_deg.value_or(-1)) + " deg"};
}

}  // namespace

int main() {
  const auto start = Clock::now();
  int failed = 0;
  auto report = [&](int id, const std::string& title, const Outcome& o) {
    std::cout << "criterion " << id << " " << (o.pass ? "PASS" : "FAIL") << ": " << title << " [" << o.detail << "]"
              << std::endl;
    failed += !o.pass;
  };

  report(1, "lazy greedy equals exhaustive greedy", greedy_oracle());
  report(2, "alpha weight and point gain closed forms", closed_forms());
  report(3, "P3P noiseless round trip", p3p_round_trip());

  StandardScene standard{generate_synthetic_scene(testutil::standard_spec(1)), {}};
  standard.vocab = train_vocabulary(testutil::point_descriptors(standard.gen.scene), 1024, vocab_seed(1));
  report(4, "co-visibility sampler soundness and cost", sampler_soundness(standard));
  report(5, "multi-match inlier monotonicity", multi_monotone(standard));
  report(6, "byte budget contract", budget_contract(standard));

  std::cout << "benchmark sweep (registration %, 10 seeds, 1.5% budget):" << std::endl;
  const auto runs = benchmark_sweep(standard);
  report(7, "hybrid vs full-points-only", hybrid_vs_full(runs));
  report(8, "ablation ordering", ablation_order(runs));
  report(9, "CLI determinism", cli_determinism());
  report(10, "noiseless end-to-end sanity", noiseless_sanity());

  std::cout << "total " << fmt(seconds_since(start), 4) << " s, " << failed << " failing" << std::endl;
  return failed == 0 ? 0 : 1;
}
