// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "histaug/image.hpp"
#include "histaug/rng.hpp"

namespace histaug {

using json = nlohmann::json;

enum class GateMode { one_of, all_independent };

/// Closed sampling interval. A scalar parameter has lo == hi.
struct ParamRange {
  double lo = 0.0;
  double hi = 0.0;

  friend bool operator==(const ParamRange&, const ParamRange&) = default;
};

struct MemberSpec {
  std::string id;
  /// Firing probability in all_independent mode, selection weight in one_of.
  double probability = 1.0;
  std::map<std::string, ParamRange> params;

  friend bool operator==(const MemberSpec&, const MemberSpec&) = default;
};

/// One probability-gated transform group. The gate fires with `probability`;
/// inside it, one_of picks a single member by weight and all_independent
/// fires every member on its own coin.
struct GateSpec {
  std::string group;
  double probability = 1.0;
  GateMode mode = GateMode::all_independent;
  std::vector<MemberSpec> members;

  friend bool operator==(const GateSpec&, const GateSpec&) = default;
};

/// Ordered gates followed by the fixed final stage (center crop 60, bilinear
/// resize to 224, ImageNet normalization).
struct PipelineSpec {
  std::uint64_t seed = 42;
  std::vector<GateSpec> gates;

  const GateSpec* find_gate(const std::string& group) const;
  friend bool operator==(const PipelineSpec&, const PipelineSpec&) = default;
};

inline constexpr const char* kGroupOrder[] = {"geometric", "advanced_geometric", "color",
                                              "channel", "blur_noise"};

/// Defaults, then `overrides` merged in. Overrides either mirror the
/// serialized PipelineSpec (gates as an array) or address gates and members by name:
///   {"seed": 7, "gates": {"blur_noise": {"members": {"gauss_noise":
///     {"probability": 0.5, "params": {"std": [5, 20]}}}}}}
/// Throws ParameterError naming the offending path.
PipelineSpec build_training_pipeline(const json& overrides = json::object());

/// No gates; final stage only.
PipelineSpec build_validation_pipeline(std::uint64_t seed = 42);

json to_json(const PipelineSpec& spec);

/// One applied transform with fully resolved parameters. Transforms that
/// consume per-pixel randomness carry the key of their private stream.
struct AppliedTransform {
  std::string group;
  std::string id;
  json params = json::object();
  std::optional<RngKey> rng;
};

struct GateDecision {
  std::string group;
  bool fired = false;
};

struct AuditRecord {
  std::uint64_t seed = 42;
  std::uint64_t epoch = 0;
  std::uint64_t sample_id = 0;
  std::string source;
  std::vector<GateDecision> gates;
  std::vector<AppliedTransform> transforms;
};

json to_json(const AuditRecord& audit);
AuditRecord audit_from_json(const json& doc);

/// Applies one resolved transform. Throws ParameterError for unknown ids or
/// parameters outside their legal bounds.
Patch apply_transform(const AppliedTransform& transform, const Patch& src);

struct AugmentResult {
  Patch augmented;  // before the final stage
  AuditRecord audit;
};

struct PipelineOutput {
  NormalizedTensor tensor;
  AuditRecord audit;
};

/// Evaluates the gates for one sample. Gate g draws from
/// make_rng(seed, epoch, sample_id, g.group).
AugmentResult augment(const PipelineSpec& spec, const Patch& src, std::uint64_t epoch,
                      std::uint64_t sample_id);

/// augment followed by the final stage. Requires src of at least 60x60.
PipelineOutput apply(const PipelineSpec& spec, const Patch& src, std::uint64_t epoch,
                     std::uint64_t sample_id);

/// Re-applies the recorded transforms and the final stage.
NormalizedTensor replay(const AuditRecord& audit, const Patch& src);

/// apply() over many samples on `workers` threads. Results are indexed like
/// the inputs and do not depend on the worker count.
std::vector<PipelineOutput> apply_batch(const PipelineSpec& spec, std::span<const Patch> sources,
                                        std::uint64_t epoch,
                                        std::span<const std::uint64_t> sample_ids,
                                        unsigned workers);

}  // namespace histaug
