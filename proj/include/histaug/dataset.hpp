// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "histaug/rng.hpp"

namespace histaug {

inline constexpr int kNmf = 0;
inline constexpr int kAmf = 1;

/// Dataset tags accepted in a manifest. "AtNorM-MD" is accepted alongside
/// "MIDOG++" since both names are used for the multi-domain set.
inline constexpr const char* kDatasets[] = {"AMi-Br", "AtNorM-Br", "MIDOG++", "AtNorM-MD",
                                            "OMG-Octo"};

struct ManifestRecord {
  std::string id;
  std::string image_path;
  std::string dataset;
  std::string domain;
  std::string group_id;
  std::string raw_label;
  std::optional<int> label;  // kNmf / kAmf, or excluded from the binary task
};

/// AMF -> 1, NMF -> 0 (case-insensitive; "atypical"/"normal" also accepted).
/// OMG-Octo "apoptotic", "noise" and "uncertain" map to nullopt. Anything else
/// throws DataError.
std::optional<int> map_label(std::string_view raw_label, std::string_view dataset);

/// Manifest CSV, header exactly `id,image_path,dataset,domain,group_id,raw_label`.
/// Errors carry the file name and line number.
std::vector<ManifestRecord> load_manifest(const std::filesystem::path& path);
std::vector<ManifestRecord> parse_manifest(std::istream& in, const std::string& source);
std::string format_manifest(const std::vector<ManifestRecord>& records);

struct ClassCounts {
  std::size_t total = 0;
  std::size_t amf = 0;
  std::size_t nmf = 0;
  std::size_t excluded = 0;

  double amf_fraction() const {
    return amf + nmf == 0 ? 0.0 : static_cast<double>(amf) / static_cast<double>(amf + nmf);
  }
};

std::map<std::string, ClassCounts> count_by_dataset(const std::vector<ManifestRecord>& records);
ClassCounts count_classes(const std::vector<ManifestRecord>& records);

// ---------------------------------------------------------------------------
// Grouped stratified k-fold

struct FoldAssignment {
  int k = 5;
  std::uint64_t seed = 42;
  std::map<std::string, int> fold_of;            // record id -> fold
  std::vector<std::vector<std::string>> folds;   // ids per fold, sorted
  std::vector<ClassCounts> fold_counts;
};

/// Greedy assignment of whole groups. Labeled records are sorted by id and
/// grouped by group_id; groups are visited by size (descending, ties by id)
/// and each goes to the fold that minimizes the class-count imbalance (the
/// chi-square statistic of the fold x class table against an even split),
/// then the fold size. Folds still tied after both
/// criteria are separated by a draw from make_rng(seed, 0, 0, "kfold").
/// Throws DataError when there are fewer groups than folds.
FoldAssignment grouped_stratified_kfold(const std::vector<ManifestRecord>& records, int k = 5,
                                        std::uint64_t seed = 42);

nlohmann::json to_json(const FoldAssignment& folds);
FoldAssignment fold_assignment_from_json(const nlohmann::json& doc);

/// Labeled records outside `fold_index` (the training side of that fold).
std::vector<ManifestRecord> training_split(const std::vector<ManifestRecord>& records,
                                           const FoldAssignment& folds, int fold_index);

// ---------------------------------------------------------------------------
// Balanced sampling

/// Parallel arrays in canonical (id) order.
struct SampleWeights {
  std::vector<std::string> ids;
  std::vector<int> labels;
  std::vector<double> weights;

  /// Expected fraction of AMF draws under these weights.
  double expected_amf_fraction() const;
};

/// weight = 1 / count(class of record). Excluded records are skipped. Throws
/// DataError when either class is absent.
SampleWeights inverse_frequency_weights(const std::vector<ManifestRecord>& records);

/// n independent draws with replacement, probability proportional to weight.
std::vector<std::string> weighted_sample(const SampleWeights& weights, std::size_t n,
                                         RngStream& rng);

struct BatchPlan {
  int epoch = 0;
  int batch = 0;
  std::vector<std::string> ids;
};

/// Per epoch, draws as many ids as there are weighted records from
/// make_rng(seed, epoch, 0, "sampler") and cuts them into batches.
std::vector<BatchPlan> sample_plan(const SampleWeights& weights, int epochs, int batch_size,
                                   std::uint64_t seed);

}  // namespace histaug
