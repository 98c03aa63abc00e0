// SPDX-License-Identifier: Apache-2.0
#include "histaug/rng.hpp"

#include <cmath>
#include <numbers>

namespace histaug {
namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(const std::string& s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::uint64_t hash_key(const RngKey& key) noexcept {
  std::uint64_t h = mix64(key.seed + kGamma);
  h = mix64(h ^ (key.epoch + 2 * kGamma));
  h = mix64(h ^ (key.sample_id + 3 * kGamma));
  h = mix64(h ^ fnv1a(key.stage_tag));
  return h;
}

}  // namespace

RngStream::RngStream(RngKey key) : key_(std::move(key)), stream_id_(hash_key(key_)) {}

std::uint64_t RngStream::next_u64() noexcept {
  ++counter_;
  return mix64(stream_id_ + counter_ * kGamma);
}

double RngStream::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) noexcept {
  return lo + (hi - lo) * uniform();
}

std::int64_t RngStream::uniform_int(std::int64_t lo, std::int64_t hi) noexcept {
  if (hi <= lo) {
    next_u64();
    return lo;
  }
  const auto span = static_cast<double>(hi - lo + 1);
  auto offset = static_cast<std::int64_t>(std::floor(uniform() * span));
  if (offset > hi - lo) offset = hi - lo;
  return lo + offset;
}

double RngStream::normal() noexcept {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

RngStream make_rng(std::uint64_t seed, std::uint64_t epoch, std::uint64_t sample_id,
                   std::string stage_tag) {
  return RngStream(RngKey{seed, epoch, sample_id, std::move(stage_tag)});
}

}  // namespace histaug
