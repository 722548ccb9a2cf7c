#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hsc/compressor.hpp"
#include "hsc/geometry.hpp"
#include "hsc/matcher.hpp"
#include "hsc/p3p.hpp"
#include "hsc/random.hpp"
#include "hsc/scene_model.hpp"

namespace hsc {

struct RansacConfig {
  std::size_t sample_size = 3;
  std::uint32_t sample_trials = 10;   // failed co-visibility draws before a sample is dropped
  std::uint32_t max_iterations = 5000;
  double sigma = 4.0;                 // inlier threshold, pixels
  std::uint32_t min_inliers = 12;
  double confidence = 0.99;
  bool use_multi = true;              // score hypotheses with W as well as U

  void validate() const {
    if (sample_size != 3) throw std::invalid_argument("sample size must be 3 (P3P)");
    if (sample_trials < 1) throw std::invalid_argument("sample trials must be >= 1");
    if (max_iterations < 1) throw std::invalid_argument("max iterations must be >= 1");
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    if (min_inliers < sample_size + 1) throw std::invalid_argument("min inliers must be >= 4");
    if (!(confidence > 0.0 && confidence < 1.0)) throw std::invalid_argument("confidence must be in (0, 1)");
  }

  bool operator==(const RansacConfig&) const = default;
};

struct InlierCount {
  std::uint32_t unique = 0;
  std::uint32_t multi = 0;
  [[nodiscard]] std::uint32_t total() const { return unique + multi; }
  bool operator==(const InlierCount&) const = default;
};

struct RansacResult {
  std::optional<Pose> pose;
  InlierCount inliers;
  std::uint32_t iterations = 0;
  std::uint32_t samples_completed = 0;
  std::uint32_t samples_dropped = 0;
  std::uint32_t hypotheses = 0;
  std::uint64_t multi_evaluations = 0;  // MultiMatch tests performed
  bool registered = false;
  bool early_exit = false;
  std::string diagnostics;
};

/// Sampling counters; `violations` counts accepted pairs that share no
/// camera with the first point and must stay zero.
struct SamplerStats {
  std::uint64_t draws = 0;
  std::uint64_t accepted_pairs = 0;
  std::uint64_t violations = 0;
};

/// Draws a minimal sample from U. The first match is uniform; each further
/// candidate is uniform over the matches not yet in the sample and is kept
/// only if its point shares a camera with the first point. After `trials`
/// rejected draws in total the sample is dropped (nullopt).
inline std::optional<std::array<std::uint32_t, 3>> sample_covisible(std::span<const UniqueMatch> unique,
                                                                    const HybridModel& model, std::uint32_t trials,
                                                                    Rng& rng, SamplerStats* stats = nullptr) {
  if (unique.size() < 3) throw std::invalid_argument("sample_covisible needs at least 3 unique matches");
  std::array<std::uint32_t, 3> s{};
  s[0] = static_cast<std::uint32_t>(uniform_index(rng, unique.size()));
  const std::span<const CameraId> first = model.full[unique[s[0]].point].cameras;
  std::size_t size = 1;
  std::uint32_t failed = 0;
  while (size < 3 && failed < trials) {
    // Uniform over U \ S: draw a rank among the remaining, then skip taken slots.
    auto pick = static_cast<std::uint32_t>(uniform_index(rng, unique.size() - size));
    std::array<std::uint32_t, 3> taken = s;
    std::sort(taken.begin(), taken.begin() + static_cast<std::ptrdiff_t>(size));
    for (std::size_t i = 0; i < size; ++i) {
      if (pick >= taken[i]) ++pick;
    }
    if (stats) ++stats->draws;
    const std::span<const CameraId> cams = model.full[unique[pick].point].cameras;
    if (sorted_intersects(first, cams)) {
      s[size++] = pick;
      if (stats) {
        ++stats->accepted_pairs;
        // Independent recheck for instrumentation.
        bool shared = false;
        for (CameraId a : first)
          for (CameraId b : cams) shared = shared || a == b;
        if (!shared) ++stats->violations;
      }
    } else {
      ++failed;
    }
  }
  if (size < 3) return std::nullopt;
  return s;
}

namespace ransac_detail {

inline bool within(const Eigen::Matrix3d& r, const Eigen::Vector3d& center, const Intrinsics& k,
                   const Eigen::Vector3d& x, const Eigen::Vector2d& pixel, double sigma_sq) {
  const Eigen::Vector3d y = r * (x - center);
  if (!(y.z() > 0.0)) return false;
  const double u = k.focal * y.x() / y.z() + k.cx - pixel.x();
  const double v = k.focal * y.y() / y.z() + k.cy - pixel.y();
  return u * u + v * v < sigma_sq;
}

}  // namespace ransac_detail

/// Inlier count of a pose: one per unique match within sigma, plus one per
/// multi-match with at least one candidate within sigma.
inline InlierCount evaluate_pose(const Pose& pose, std::span<const UniqueMatch> unique,
                                 std::span<const MultiMatch> multi, const HybridModel& model, const Intrinsics& k,
                                 double sigma, std::uint64_t* multi_evaluations = nullptr) {
  const double sigma_sq = sigma * sigma;
  InlierCount c;
  for (const UniqueMatch& m : unique) {
    if (ransac_detail::within(pose.rotation, pose.center, k, model.full[m.point].position.cast<double>(), m.pixel,
                              sigma_sq)) {
      ++c.unique;
    }
  }
  for (const MultiMatch& m : multi) {
    if (multi_evaluations) ++*multi_evaluations;
    for (std::uint32_t p : m.points) {
      if (ransac_detail::within(pose.rotation, pose.center, k, model.compressed[p].position.cast<double>(), m.pixel,
                                sigma_sq)) {
        ++c.multi;
        break;
      }
    }
  }
  return c;
}

/// Iterations needed so that an all-inlier sample is drawn with the given
/// confidence at inlier ratio `ratio`.
inline double required_iterations(double ratio, double confidence, std::size_t sample_size) {
  if (!(ratio > 0.0)) return std::numeric_limits<double>::infinity();
  const double all_in = std::pow(ratio, static_cast<double>(sample_size));
  if (all_in >= 1.0) return 1.0;
  return std::log(1.0 - confidence) / std::log(1.0 - all_in);
}

/// Multi-match RANSAC. Samples come from U only (co-visibility guided);
/// every P3P solution is scored on U, and on W when enabled. The best pose
/// is the first to reach the highest total. Early exit uses the best
/// unique-only inlier ratio seen so far.
inline RansacResult run_ransac(const MatchSet& matches, const HybridModel& model, const Intrinsics& k,
                               const RansacConfig& config, std::uint64_t seed) {
  config.validate();
  RansacResult out;
  const std::span<const UniqueMatch> unique = matches.unique;
  const std::span<const MultiMatch> multi =
      config.use_multi ? std::span<const MultiMatch>(matches.multi) : std::span<const MultiMatch>();
  if (unique.size() < config.sample_size) {
    out.diagnostics = "fewer than 3 unique matches (" + std::to_string(unique.size()) + ")";
    return out;
  }

  Rng rng(seed);
  std::uint32_t best_unique = 0;
  bool have_best = false;
  for (std::uint32_t it = 0; it < config.max_iterations; ++it) {
    out.iterations = it + 1;
    const auto sample = sample_covisible(unique, model, config.sample_trials, rng);
    if (!sample) {
      ++out.samples_dropped;
      continue;
    }
    ++out.samples_completed;
    std::array<Correspondence, 3> corr;
    for (int i = 0; i < 3; ++i) {
      const UniqueMatch& m = unique[(*sample)[static_cast<std::size_t>(i)]];
      corr[static_cast<std::size_t>(i)] = {m.pixel, model.full[m.point].position.cast<double>(), m.point};
    }
    const P3PResult solved = solve_p3p(corr, k);
    for (const Pose& pose : solved.poses) {
      ++out.hypotheses;
      const InlierCount c = evaluate_pose(pose, unique, multi, model, k, config.sigma, &out.multi_evaluations);
      best_unique = std::max(best_unique, c.unique);
      if (!have_best || c.total() > out.inliers.total()) {
        have_best = true;
        out.pose = pose;
        out.inliers = c;
      }
    }
    const double ratio = static_cast<double>(best_unique) / static_cast<double>(unique.size());
    if (static_cast<double>(out.iterations) >= required_iterations(ratio, config.confidence, config.sample_size)) {
      out.early_exit = true;
      break;
    }
  }
  out.registered = have_best && out.inliers.total() >= config.min_inliers;
  if (out.samples_completed == 0) {
    out.diagnostics = "no co-visible sample completed in " + std::to_string(out.iterations) + " iterations";
  } else if (!have_best) {
    out.diagnostics = "no P3P solution from " + std::to_string(out.samples_completed) + " samples";
  }
  return out;
}

}  // namespace hsc
