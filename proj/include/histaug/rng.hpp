// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

namespace histaug {

/// The four-part key that names a random stream.
struct RngKey {
  std::uint64_t seed = 42;
  std::uint64_t epoch = 0;
  std::uint64_t sample_id = 0;
  std::string stage_tag;

  friend bool operator==(const RngKey&, const RngKey&) = default;
};

/// Counter-based generator. The key is hashed once into a 64-bit stream
/// identifier; draw i is a SplitMix64 finalization of (id + (i+1)*gamma), so
/// the sequence depends only on the key and the draw index.
///
/// Normal draws use Box-Muller on two uniforms and never cache the second
/// variate, so every draw method advances the counter by a fixed amount.
class RngStream {
 public:
  explicit RngStream(RngKey key);

  const RngKey& key() const noexcept { return key_; }
  std::uint64_t draws() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() noexcept;
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) noexcept;
  /// Uniform integer on the closed interval [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) noexcept;
  /// Standard normal variate.
  double normal() noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }

 private:
  RngKey key_;
  std::uint64_t stream_id_;
  std::uint64_t counter_ = 0;
};

RngStream make_rng(std::uint64_t seed, std::uint64_t epoch, std::uint64_t sample_id,
                   std::string stage_tag);

}  // namespace histaug
