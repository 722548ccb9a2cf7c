#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>

namespace hsc {

inline constexpr std::size_t kDescriptorDim = 128;

/// SIFT-convention appearance descriptor: 128 unsigned bytes.
using Descriptor = std::array<std::uint8_t, kDescriptorDim>;

/// Squared Euclidean distance. Per-element products fit in 32 bits; the sum
/// is carried in 64 bits so matching is exact and platform independent.
inline std::int64_t squared_distance(const Descriptor& a, const Descriptor& b) {
  std::int64_t sum = 0;
  for (std::size_t i = 0; i < kDescriptorDim; ++i) {
    const std::int32_t d = std::int32_t{a[i]} - std::int32_t{b[i]};
    sum += d * d;
  }
  return sum;
}

/// Per-dimension arithmetic mean, rounded half-up. No renormalization.
inline Descriptor mean_descriptor(std::span<const Descriptor> raw) {
  if (raw.empty()) throw std::invalid_argument("mean_descriptor: empty input");
  std::array<std::uint64_t, kDescriptorDim> sum{};
  for (const Descriptor& d : raw) {
    for (std::size_t i = 0; i < kDescriptorDim; ++i) sum[i] += d[i];
  }
  const std::uint64_t n = raw.size();
  Descriptor out{};
  for (std::size_t i = 0; i < kDescriptorDim; ++i) {
    // floor(sum / n + 1/2) in integers
    const std::uint64_t rounded = (2 * sum[i] + n) / (2 * n);
    out[i] = static_cast<std::uint8_t>(rounded > 255 ? 255 : rounded);
  }
  return out;
}

inline Descriptor filled_descriptor(std::uint8_t value) {
  Descriptor d;
  d.fill(value);
  return d;
}

}  // namespace hsc
