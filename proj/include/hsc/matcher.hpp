#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "hsc/compressor.hpp"
#include "hsc/scene_model.hpp"
#include "hsc/vocabulary.hpp"

namespace hsc {

struct MatcherConfig {
  double ratio = 0.7;
  std::size_t multi_cap = 5;
};

/// Feature -> one full point (index into HybridModel::full).
struct UniqueMatch {
  std::uint32_t feature = 0;
  Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
  std::uint32_t point = 0;
  std::int64_t distance = 0;
  std::optional<std::int64_t> runner_up;

  bool operator==(const UniqueMatch&) const = default;
};

/// Feature -> every compressed point sharing its word (indices into
/// HybridModel::compressed), truncated to the per-feature cap.
struct MultiMatch {
  std::uint32_t feature = 0;
  Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
  std::vector<std::uint32_t> points;
  WordId word = 0;

  bool operator==(const MultiMatch&) const = default;
};

struct MatchSet {
  std::vector<UniqueMatch> unique;
  std::vector<MultiMatch> multi;
};

inline std::vector<WordId> assign_feature_words(const QueryImage& query, const Vocabulary& vocab) {
  std::vector<WordId> words(query.features.size());
  for (std::size_t i = 0; i < query.features.size(); ++i) words[i] = vocab.assign(query.features[i].descriptor);
  return words;
}

/// Within-word nearest neighbour against P' with a squared-domain ratio test
/// (d1 < ratio^2 * d2). A lone word member is accepted without the test.
/// When several features hit one point the closest survives (ties: lower
/// feature index). Output is ordered by feature index.
inline std::vector<UniqueMatch> match_unique(const QueryImage& query, std::span<const WordId> words,
                                             const HybridModel& model, double ratio) {
  const double ratio_sq = ratio * ratio;
  std::vector<UniqueMatch> candidates;
  for (std::size_t f = 0; f < query.features.size(); ++f) {
    const auto members = model.full_in_word(words[f]);
    if (members.empty()) continue;
    const Descriptor& d = query.features[f].descriptor;
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    std::int64_t second = std::numeric_limits<std::int64_t>::max();
    std::uint32_t best_point = 0;
    for (std::uint32_t m : members) {
      const std::int64_t dist = squared_distance(d, model.full[m].descriptor);
      if (dist < best) {
        second = best;
        best = dist;
        best_point = m;
      } else if (dist < second) {
        second = dist;
      }
    }
    UniqueMatch um{static_cast<std::uint32_t>(f), query.features[f].pixel, best_point, best, std::nullopt};
    if (members.size() > 1) {
      um.runner_up = second;
      if (!(static_cast<double>(best) < ratio_sq * static_cast<double>(second))) continue;
    }
    candidates.push_back(um);
  }
  // Keep one feature per point.
  std::vector<std::optional<std::size_t>> owner(model.full.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    auto& o = owner[candidates[i].point];
    if (!o || candidates[i].distance < candidates[*o].distance) o = i;
  }
  std::vector<UniqueMatch> out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (owner[candidates[i].point] == i) out.push_back(candidates[i]);
  }
  return out;
}

inline std::vector<UniqueMatch> match_unique(const QueryImage& query, const Vocabulary& vocab,
                                             const HybridModel& model, double ratio) {
  return match_unique(query, assign_feature_words(query, vocab), model, ratio);
}

/// All P'' members of each feature's word, lowest indices first, capped.
inline std::vector<MultiMatch> match_multi(const QueryImage& query, std::span<const WordId> words,
                                           const HybridModel& model, std::size_t cap) {
  std::vector<MultiMatch> out;
  for (std::size_t f = 0; f < query.features.size(); ++f) {
    const auto members = model.compressed_in_word(words[f]);
    if (members.empty() || cap == 0) continue;
    MultiMatch mm;
    mm.feature = static_cast<std::uint32_t>(f);
    mm.pixel = query.features[f].pixel;
    mm.word = words[f];
    const std::size_t n = std::min(cap, members.size());
    mm.points.assign(members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n));
    out.push_back(std::move(mm));
  }
  return out;
}

inline std::vector<MultiMatch> match_multi(const QueryImage& query, const Vocabulary& vocab, const HybridModel& model,
                                           std::size_t cap) {
  return match_multi(query, assign_feature_words(query, vocab), model, cap);
}

inline MatchSet match_query(const QueryImage& query, std::span<const WordId> words, const HybridModel& model,
                            const MatcherConfig& config) {
  return {match_unique(query, words, model, config.ratio), match_multi(query, words, model, config.multi_cap)};
}

}  // namespace hsc
