// SPDX-License-Identifier: Apache-2.0
// Shared helpers for the test binaries.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "histaug/dataset.hpp"
#include "histaug/image.hpp"
#include "histaug/rng.hpp"

namespace histaug::test {

inline Patch random_patch(int width, int height, std::uint64_t seed) {
  auto rng = make_rng(seed, 0, 0, "test-patch");
  Patch p(width, height);
  for (auto& v : p.data()) v = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
  return p;
}

/// Random patch with smooth structure, closer to tissue than white noise.
inline Patch blob_patch(int width, int height, std::uint64_t seed) {
  auto rng = make_rng(seed, 0, 0, "test-blob");
  const double cx = rng.uniform(0.2, 0.8) * width;
  const double cy = rng.uniform(0.2, 0.8) * height;
  const double r = rng.uniform(0.15, 0.4) * std::min(width, height);
  Patch p(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double d = std::hypot(x - cx, y - cy) / r;
      const double t = d < 1.0 ? 1.0 - d : 0.0;
      p.set_pixel(x, y, to_u8(230 - 120 * t + rng.uniform(-8, 8)),
                  to_u8(200 - 150 * t + rng.uniform(-8, 8)), to_u8(220 - 40 * t + rng.uniform(-8, 8)));
    }
  }
  return p;
}

/// Unique scratch directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& name) {
    path_ = std::filesystem::temp_directory_path() /
            ("histaug-" + name + "-" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Builder for manifest CSV text. Records get sequential ids and are spread
/// over groups of `group_size` consecutive records.
class ManifestBuilder {
 public:
  ManifestBuilder& add(const std::string& dataset, const std::string& raw_label, int count,
                       const std::string& domain = "d0", int group_size = 20) {
    for (int i = 0; i < count; ++i) {
      const int n = next_++;
      const std::string id = dataset + "_" + std::to_string(n);
      text_ << id << ",img/" << id << ".png," << dataset << ',' << domain << ",g"
            << dataset << "_" << (n / group_size) << ',' << raw_label << '\n';
    }
    return *this;
  }

  std::string str() const { return "id,image_path,dataset,domain,group_id,raw_label\n" + text_.str(); }

  std::vector<ManifestRecord> records() const {
    std::istringstream in(str());
    return parse_manifest(in, "fixture.csv");
  }

 private:
  std::ostringstream text_;
  int next_ = 0;
};

/// AMi-Br sized fixture: 3,720 records, 832 atypical.
inline ManifestBuilder ami_br_fixture() {
  ManifestBuilder b;
  b.add("AMi-Br", "AMF", 832).add("AMi-Br", "NMF", 3720 - 832);
  return b;
}

/// OMG-Octo sized fixture: 1,378 atypical, 379 normal, 1,255 outside the
/// binary task.
inline ManifestBuilder omg_octo_fixture() {
  ManifestBuilder b;
  b.add("OMG-Octo", "AMF", 1378)
      .add("OMG-Octo", "NMF", 379)
      .add("OMG-Octo", "apoptotic", 394)
      .add("OMG-Octo", "noise", 399)
      .add("OMG-Octo", "uncertain", 462);
  return b;
}

}  // namespace histaug::test

// ---------------------------------------------------------------------------
// Fold-split fixtures and the exhaustive oracle

namespace histaug::test {

/// 200 records in 23 groups (16 of 9, 7 of 8) with per-group AMF rates
/// between 0.1 and 0.5.
inline std::vector<ManifestRecord> twenty_three_group_records() {
  std::ostringstream text;
  text << "id,image_path,dataset,domain,group_id,raw_label\n";
  auto rng = make_rng(5, 0, 0, "fixture");
  int id = 0;
  for (int g = 0; g < 23; ++g) {
    const int size = g < 16 ? 9 : 8;
    const double p_amf = rng.uniform(0.1, 0.5);
    for (int i = 0; i < size; ++i) {
      text << "r" << id << ",x.png,MIDOG++,dom" << g % 4 << ",case" << g << ','
           << (rng.uniform() < p_amf ? "AMF" : "NMF") << '\n';
      ++id;
    }
  }
  std::istringstream in(text.str());
  return parse_manifest(in, "twenty-three-groups");
}

struct GroupCounts {
  int amf;
  int nmf;
};

/// Seven groups with uneven sizes and AMF rates from 0.12 to 0.33.
inline const std::vector<GroupCounts> kSevenGroups = {{9, 31}, {4, 30}, {8, 20}, {3, 22},
                                                      {6, 14}, {2, 13}, {4, 8}};

/// Records "m<g>_<i>" in group "grp<g>".
inline std::vector<ManifestRecord> records_from_groups(const std::vector<GroupCounts>& groups) {
  std::ostringstream text;
  text << "id,image_path,dataset,domain,group_id,raw_label\n";
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (int i = 0; i < groups[g].amf + groups[g].nmf; ++i) {
      text << "m" << g << "_" << i << ",x.png,AMi-Br,d,grp" << g << ','
           << (i < groups[g].amf ? "AMF" : "NMF") << '\n';
    }
  }
  std::istringstream in(text.str());
  return parse_manifest(in, "groups");
}

inline std::vector<int> group_folds(const FoldAssignment& folds, std::size_t n_groups) {
  std::vector<int> out(n_groups);
  for (std::size_t g = 0; g < n_groups; ++g) out[g] = folds.fold_of.at("m" + std::to_string(g) + "_0");
  return out;
}

struct FoldTotals {
  std::vector<double> amf;
  std::vector<double> all;
  double total_amf = 0;
  double total = 0;
};

inline FoldTotals fold_totals(const std::vector<GroupCounts>& groups, const std::vector<int>& fold_of,
                              int k) {
  FoldTotals t{std::vector<double>(k), std::vector<double>(k)};
  for (std::size_t g = 0; g < groups.size(); ++g) {
    t.amf[fold_of[g]] += groups[g].amf;
    t.all[fold_of[g]] += groups[g].amf + groups[g].nmf;
    t.total_amf += groups[g].amf;
    t.total += groups[g].amf + groups[g].nmf;
  }
  return t;
}

/// Largest distance of any fold's AMF fraction from the global fraction;
/// infinite when a fold is empty.
inline double max_deviation(const std::vector<GroupCounts>& groups, const std::vector<int>& fold_of,
                            int k) {
  const auto t = fold_totals(groups, fold_of, k);
  double worst = 0.0;
  for (int f = 0; f < k; ++f) {
    if (t.all[f] == 0) return INFINITY;
    worst = std::max(worst, std::abs(t.amf[f] / t.all[f] - t.total_amf / t.total));
  }
  return worst;
}

/// Chi-square of the fold x class table against an even split across folds.
inline double class_spread(const std::vector<GroupCounts>& groups, const std::vector<int>& fold_of,
                           int k) {
  const auto t = fold_totals(groups, fold_of, k);
  const double e_amf = t.total_amf / k;
  const double e_nmf = (t.total - t.total_amf) / k;
  double chi2 = 0.0;
  for (int f = 0; f < k; ++f) {
    const double nmf = t.all[f] - t.amf[f];
    chi2 += (t.amf[f] - e_amf) * (t.amf[f] - e_amf) / e_amf + (nmf - e_nmf) * (nmf - e_nmf) / e_nmf;
  }
  return chi2;
}

struct OracleResult {
  double best_spread = INFINITY;
  double best_deviation = INFINITY;
};

/// Enumerates all k^n assignments that leave no fold empty.
inline OracleResult exhaustive_oracle(const std::vector<GroupCounts>& groups, int k) {
  OracleResult best;
  std::size_t count = 1;
  for (std::size_t g = 0; g < groups.size(); ++g) count *= static_cast<std::size_t>(k);
  std::vector<int> assign(groups.size(), 0);
  for (std::size_t code = 0; code < count; ++code) {
    std::size_t c = code;
    for (auto& a : assign) {
      a = static_cast<int>(c % k);
      c /= k;
    }
    const double dev = max_deviation(groups, assign, k);
    if (!std::isfinite(dev)) continue;
    best.best_deviation = std::min(best.best_deviation, dev);
    best.best_spread = std::min(best.best_spread, class_spread(groups, assign, k));
  }
  return best;
}

}  // namespace histaug::test
