#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hsc/binary_io.hpp"
#include "hsc/descriptor.hpp"
#include "hsc/random.hpp"

namespace hsc {

using WordId = std::uint32_t;

struct VocabularyTrainOptions {
  int max_iterations = 25;
};

struct VocabularyTrainStats {
  int iterations = 0;
  bool converged = false;            // assignment fixpoint reached
  std::vector<double> energy;        // quantization energy after each Lloyd step
  std::size_t reseeded_clusters = 0;
};

/// Flat k-means visual vocabulary over 128-d descriptors. Immutable once
/// trained; assign() is a pure exhaustive nearest-centroid scan.
class Vocabulary {
 public:
  using Centroids = Eigen::Matrix<float, kDescriptorDim, Eigen::Dynamic>;

  Vocabulary() = default;
  explicit Vocabulary(Centroids centroids, std::uint64_t trained_on = 0, std::uint64_t seed = 0)
      : centroids_(std::move(centroids)), trained_on_(trained_on), seed_(seed) {
    if (centroids_.cols() < 1) throw std::invalid_argument("vocabulary needs k >= 1");
    if (!centroids_.allFinite()) throw std::invalid_argument("vocabulary centroids must be finite");
  }

  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(centroids_.cols()); }
  [[nodiscard]] const Centroids& centroids() const { return centroids_; }
  [[nodiscard]] std::uint64_t trained_on() const { return trained_on_; }
  [[nodiscard]] std::uint64_t seed() const { return seed_; }

  /// Nearest centroid by squared Euclidean distance; ties go to the lowest id.
  [[nodiscard]] WordId assign(const Descriptor& d) const {
    const Eigen::Matrix<float, kDescriptorDim, 1> v = to_vector(d);
    WordId best = 0;
    float best_dist = std::numeric_limits<float>::infinity();
    for (Eigen::Index w = 0; w < centroids_.cols(); ++w) {
      const float dist = (centroids_.col(w) - v).squaredNorm();
      if (dist < best_dist) {
        best_dist = dist;
        best = static_cast<WordId>(w);
      }
    }
    return best;
  }

  [[nodiscard]] std::vector<WordId> assign_all(std::span<const Descriptor> ds) const {
    std::vector<WordId> out(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) out[i] = assign(ds[i]);
    return out;
  }

  [[nodiscard]] float distance(WordId w, const Descriptor& d) const {
    return (centroids_.col(w) - to_vector(d)).squaredNorm();
  }

  static Eigen::Matrix<float, kDescriptorDim, 1> to_vector(const Descriptor& d) {
    Eigen::Matrix<float, kDescriptorDim, 1> v;
    for (std::size_t i = 0; i < kDescriptorDim; ++i) v[static_cast<Eigen::Index>(i)] = d[i];
    return v;
  }

  /// k-means++ seeding followed by Lloyd iterations until the assignment
  /// stops changing or `max_iterations` is hit. Empty clusters are reseeded
  /// with the descriptor farthest from its current centroid.
  static Vocabulary train(std::span<const Descriptor> descriptors, std::size_t k, std::uint64_t seed,
                          const VocabularyTrainOptions& options = {}, VocabularyTrainStats* stats = nullptr);

 private:
  Centroids centroids_;
  std::uint64_t trained_on_ = 0;
  std::uint64_t seed_ = 0;
};

/// Per-word counters (|P'_w| during selection, pool occupancy afterwards).
class WordHistogram {
 public:
  explicit WordHistogram(std::size_t k = 0) : counts_(k, 0) {}

  void add(WordId w, std::uint64_t n = 1) {
    check(w);
    counts_[w] += n;
    total_ += n;
  }
  [[nodiscard]] std::uint64_t count(WordId w) const {
    check(w);
    return counts_[w];
  }
  [[nodiscard]] std::uint64_t total() const { return total_; }
  [[nodiscard]] std::size_t size() const { return counts_.size(); }
  [[nodiscard]] std::span<const std::uint64_t> counts() const { return counts_; }

 private:
  void check(WordId w) const {
    if (w >= counts_.size()) {
      throw std::out_of_range("word id " + std::to_string(w) + " outside vocabulary of " +
                              std::to_string(counts_.size()));
    }
  }

  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

inline std::uint64_t occupancy(const WordHistogram& hist, WordId w) { return hist.count(w); }

// ---------------------------------------------------------------------------

inline Vocabulary Vocabulary::train(std::span<const Descriptor> descriptors, std::size_t k, std::uint64_t seed,
                                    const VocabularyTrainOptions& options, VocabularyTrainStats* stats) {
  const std::size_t n = descriptors.size();
  if (n == 0) throw std::invalid_argument("train_vocabulary: no descriptors");
  if (k < 1) throw std::invalid_argument("train_vocabulary: k must be >= 1");
  if (k > n) {
    throw std::invalid_argument("train_vocabulary: k = " + std::to_string(k) + " exceeds descriptor count " +
                                std::to_string(n));
  }
  constexpr auto dim = static_cast<Eigen::Index>(kDescriptorDim);
  const auto kk = static_cast<Eigen::Index>(k);
  const auto nn = static_cast<Eigen::Index>(n);

  // Training runs in double; distances use |x|^2 - 2 c.x + |c|^2 so the
  // assignment step is a single matrix product.
  Eigen::MatrixXd data(dim, nn);
  for (Eigen::Index j = 0; j < nn; ++j)
    for (Eigen::Index i = 0; i < dim; ++i) data(i, j) = descriptors[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
  const Eigen::VectorXd data_sq = data.colwise().squaredNorm().transpose();

  Rng rng(seed);
  Eigen::MatrixXd centers(dim, kk);
  Eigen::VectorXd nearest_sq(nn);
  {
    std::size_t first = uniform_index(rng, n);
    centers.col(0) = data.col(static_cast<Eigen::Index>(first));
    for (Eigen::Index j = 0; j < nn; ++j) nearest_sq[j] = (data.col(j) - centers.col(0)).squaredNorm();
    for (Eigen::Index c = 1; c < kk; ++c) {
      const double total = nearest_sq.sum();
      Eigen::Index chosen = 0;
      if (total > 0.0) {
        double r = uniform_real(rng, 0.0, total);
        chosen = nn - 1;
        for (Eigen::Index j = 0; j < nn; ++j) {
          r -= nearest_sq[j];
          if (r < 0.0) {
            chosen = j;
            break;
          }
        }
        // Never pick a descriptor already used as a center.
        while (nearest_sq[chosen] <= 0.0) chosen = (chosen + 1) % nn;
      } else {
        chosen = static_cast<Eigen::Index>(uniform_index(rng, n));
      }
      centers.col(c) = data.col(chosen);
      for (Eigen::Index j = 0; j < nn; ++j) {
        nearest_sq[j] = std::min(nearest_sq[j], (data.col(j) - centers.col(c)).squaredNorm());
      }
    }
  }

  std::vector<Eigen::Index> label(static_cast<std::size_t>(nn), -1);
  Eigen::VectorXd label_dist(nn);
  VocabularyTrainStats local;
  VocabularyTrainStats& st = stats ? *stats : local;
  st = {};

  auto assign_step = [&]() {
    const Eigen::VectorXd centers_sq = centers.colwise().squaredNorm().transpose();
    const Eigen::MatrixXd cross = centers.transpose() * data;  // k x n
    bool changed = false;
    for (Eigen::Index j = 0; j < nn; ++j) {
      Eigen::Index best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (Eigen::Index c = 0; c < kk; ++c) {
        const double d = centers_sq[c] - 2.0 * cross(c, j) + data_sq[j];
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (label[static_cast<std::size_t>(j)] != best) changed = true;
      label[static_cast<std::size_t>(j)] = best;
      label_dist[j] = (data.col(j) - centers.col(best)).squaredNorm();
    }
    return changed;
  };

  bool changed = assign_step();
  for (int it = 0; it < options.max_iterations; ++it) {
    // Update step.
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(dim, kk);
    std::vector<std::size_t> counts(k, 0);
    for (Eigen::Index j = 0; j < nn; ++j) {
      sums.col(label[static_cast<std::size_t>(j)]) += data.col(j);
      ++counts[static_cast<std::size_t>(label[static_cast<std::size_t>(j)])];
    }
    std::vector<bool> taken(static_cast<std::size_t>(nn), false);
    for (Eigen::Index c = 0; c < kk; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centers.col(c) = sums.col(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        continue;
      }
      // Empty cluster: move it onto the worst-fit descriptor.
      Eigen::Index far = -1;
      for (Eigen::Index j = 0; j < nn; ++j) {
        if (taken[static_cast<std::size_t>(j)]) continue;
        if (far < 0 || label_dist[j] > label_dist[far]) far = j;
      }
      taken[static_cast<std::size_t>(far)] = true;
      centers.col(c) = data.col(far);
      ++st.reseeded_clusters;
    }
    changed = assign_step();
    st.iterations = it + 1;
    st.energy.push_back(label_dist.sum());
    if (!changed) {
      st.converged = true;
      break;
    }
  }

  return Vocabulary(centers.cast<float>(), n, seed);
}

inline Vocabulary train_vocabulary(std::span<const Descriptor> descriptors, std::size_t k, std::uint64_t seed,
                                   const VocabularyTrainOptions& options = {},
                                   VocabularyTrainStats* stats = nullptr) {
  return Vocabulary::train(descriptors, k, seed, options, stats);
}

// HVC1 layout: "HVC1" | k u32 | dim u32 (=128) | k x 128 f32, little-endian.
inline std::vector<std::uint8_t> serialize_vocabulary(const Vocabulary& v) {
  ByteWriter w;
  w.magic("HVC1");
  w.u32(static_cast<std::uint32_t>(v.size()));
  w.u32(static_cast<std::uint32_t>(kDescriptorDim));
  const auto& c = v.centroids();
  for (Eigen::Index col = 0; col < c.cols(); ++col)
    for (Eigen::Index i = 0; i < c.rows(); ++i) w.f32(c(i, col));
  return w.release();
}

inline Vocabulary parse_vocabulary(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("HVC1");
  const std::uint32_t k = r.u32();
  const std::uint32_t dim = r.u32();
  if (dim != kDescriptorDim) throw FormatError("vocabulary dimension " + std::to_string(dim) + " != 128");
  if (k == 0) throw FormatError("vocabulary with k = 0");
  if (r.remaining() != std::uint64_t{k} * kDescriptorDim * 4) throw FormatError("vocabulary size mismatch");
  Vocabulary::Centroids c(kDescriptorDim, k);
  for (Eigen::Index col = 0; col < c.cols(); ++col)
    for (Eigen::Index i = 0; i < c.rows(); ++i) c(i, col) = r.f32();
  if (!c.allFinite()) throw FormatError("vocabulary contains non-finite centroid");
  return Vocabulary(std::move(c));
}

inline std::uint64_t save_vocabulary(const Vocabulary& v, const std::filesystem::path& path) {
  return write_file_bytes(path, serialize_vocabulary(v));
}

inline Vocabulary load_vocabulary(const std::filesystem::path& path) { return parse_vocabulary(read_file_bytes(path)); }

}  // namespace hsc
