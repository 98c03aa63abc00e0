// SPDX-License-Identifier: Apache-2.0
#include "histaug/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "histaug/csv.hpp"
#include "histaug/error.hpp"

namespace histaug {
namespace {

const std::vector<std::string> kManifestHeader = {"id",       "image_path", "dataset",
                                                  "domain",   "group_id",   "raw_label"};

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

bool known_dataset(std::string_view name) {
  for (const char* d : kDatasets) {
    if (name == d) return true;
  }
  return false;
}

}  // namespace

std::optional<int> map_label(std::string_view raw_label, std::string_view dataset) {
  const std::string label = lower(raw_label);
  if (label == "amf" || label == "atypical") return kAmf;
  if (label == "nmf" || label == "normal") return kNmf;
  if (dataset == "OMG-Octo" && (label == "apoptotic" || label == "noise" || label == "uncertain")) {
    return std::nullopt;
  }
  throw DataError("unknown label '" + std::string(raw_label) + "' for dataset '" +
                  std::string(dataset) + "'");
}

std::vector<ManifestRecord> parse_manifest(std::istream& in, const std::string& source) {
  const auto rows = csv::read_table(in, kManifestHeader, source);
  std::vector<ManifestRecord> records;
  records.reserve(rows.size());
  std::map<std::string, std::size_t> first_seen;
  for (const auto& row : rows) {
    ManifestRecord r{row.fields[0], row.fields[1], row.fields[2], row.fields[3],
                     row.fields[4], row.fields[5], std::nullopt};
    if (r.id.empty()) throw DataError("empty id", source, row.line);
    if (r.group_id.empty()) throw DataError("empty group_id for '" + r.id + "'", source, row.line);
    if (!known_dataset(r.dataset)) {
      throw DataError("unknown dataset '" + r.dataset + "'", source, row.line);
    }
    const auto [it, inserted] = first_seen.emplace(r.id, row.line);
    if (!inserted) {
      throw DataError("duplicate id '" + r.id + "' (first seen on line " +
                          std::to_string(it->second) + ")",
                      source, row.line);
    }
    try {
      r.label = map_label(r.raw_label, r.dataset);
    } catch (const DataError& e) {
      throw DataError(e.what(), source, row.line);
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<ManifestRecord> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  return parse_manifest(in, path.string());
}

std::string format_manifest(const std::vector<ManifestRecord>& records) {
  std::ostringstream out;
  out << "id,image_path,dataset,domain,group_id,raw_label\n";
  for (const auto& r : records) {
    out << csv::escape(r.id) << ',' << csv::escape(r.image_path) << ',' << csv::escape(r.dataset)
        << ',' << csv::escape(r.domain) << ',' << csv::escape(r.group_id) << ','
        << csv::escape(r.raw_label) << '\n';
  }
  return out.str();
}

ClassCounts count_classes(const std::vector<ManifestRecord>& records) {
  ClassCounts c;
  for (const auto& r : records) {
    ++c.total;
    if (!r.label) {
      ++c.excluded;
    } else if (*r.label == kAmf) {
      ++c.amf;
    } else {
      ++c.nmf;
    }
  }
  return c;
}

std::map<std::string, ClassCounts> count_by_dataset(const std::vector<ManifestRecord>& records) {
  std::map<std::string, std::vector<ManifestRecord>> by;
  for (const auto& r : records) by[r.dataset].push_back(r);
  std::map<std::string, ClassCounts> out;
  for (const auto& [name, rs] : by) out[name] = count_classes(rs);
  return out;
}

FoldAssignment grouped_stratified_kfold(const std::vector<ManifestRecord>& records, int k,
                                        std::uint64_t seed) {
  if (k < 2) throw ParameterError("k-fold needs k >= 2");

  std::vector<const ManifestRecord*> labeled;
  for (const auto& r : records) {
    if (r.label) labeled.push_back(&r);
  }
  std::sort(labeled.begin(), labeled.end(),
            [](const auto* a, const auto* b) { return a->id < b->id; });

  struct Group {
    std::string id;
    std::vector<std::string> members;
    long long amf = 0;
    long long nmf = 0;
    std::size_t size() const { return members.size(); }
  };
  std::map<std::string, Group> by_id;
  long long total_amf = 0;
  long long total_nmf = 0;
  for (const auto* r : labeled) {
    auto& g = by_id[r->group_id];
    g.id = r->group_id;
    g.members.push_back(r->id);
    if (*r->label == kAmf) {
      ++g.amf;
      ++total_amf;
    } else {
      ++g.nmf;
      ++total_nmf;
    }
  }
  if (by_id.size() < static_cast<std::size_t>(k)) {
    throw DataError("need at least " + std::to_string(k) + " distinct groups, found " +
                    std::to_string(by_id.size()));
  }

  std::vector<const Group*> order;
  for (const auto& [id, g] : by_id) order.push_back(&g);
  std::stable_sort(order.begin(), order.end(),
                   [](const Group* a, const Group* b) { return a->size() > b->size(); });

  // Class-count imbalance is the chi-square statistic of the fold x class
  // table against an even split, sum_c sum_f (n_cf - N_c/k)^2 / (N_c/k).
  // Adding group g to fold f raises it by (2 g_c n_cf + g_c^2) k / N_c, so the
  // best fold minimizes sum_c g_c n_cf / N_c; scaled by N_amf * N_nmf this is
  // exact integer arithmetic.
  const bool both = total_amf > 0 && total_nmf > 0;
  const __int128 w_amf = both ? total_nmf : 1;
  const __int128 w_nmf = both ? total_amf : 1;

  FoldAssignment out;
  out.k = k;
  out.seed = seed;
  out.folds.assign(static_cast<std::size_t>(k), {});
  out.fold_counts.assign(static_cast<std::size_t>(k), {});
  auto tie_rng = make_rng(seed, 0, 0, "kfold");

  for (const Group* g : order) {
    std::vector<int> best;
    __int128 best_class = 0;
    std::size_t best_size = 0;
    for (int f = 0; f < k; ++f) {
      const auto& c = out.fold_counts[static_cast<std::size_t>(f)];
      const __int128 class_cost =
          static_cast<__int128>(g->amf) * static_cast<long long>(c.amf) * w_amf +
          static_cast<__int128>(g->nmf) * static_cast<long long>(c.nmf) * w_nmf;
      const std::size_t size_cost = c.total;
      if (best.empty() || class_cost < best_class ||
          (class_cost == best_class && size_cost < best_size)) {
        best.assign(1, f);
        best_class = class_cost;
        best_size = size_cost;
      } else if (class_cost == best_class && size_cost == best_size) {
        best.push_back(f);
      }
    }
    const int fold = best.size() == 1
                         ? best.front()
                         : best[static_cast<std::size_t>(
                               tie_rng.uniform_int(0, static_cast<std::int64_t>(best.size()) - 1))];
    auto& counts = out.fold_counts[static_cast<std::size_t>(fold)];
    counts.total += g->size();
    counts.amf += static_cast<std::size_t>(g->amf);
    counts.nmf += static_cast<std::size_t>(g->nmf);
    for (const auto& id : g->members) {
      out.fold_of[id] = fold;
      out.folds[static_cast<std::size_t>(fold)].push_back(id);
    }
  }
  for (auto& ids : out.folds) std::sort(ids.begin(), ids.end());
  return out;
}

nlohmann::json to_json(const FoldAssignment& folds) {
  nlohmann::json fold_ids = nlohmann::json::object();
  nlohmann::json counts = nlohmann::json::array();
  for (std::size_t f = 0; f < folds.folds.size(); ++f) {
    fold_ids[std::to_string(f)] = folds.folds[f];
    const auto& c = folds.fold_counts[f];
    counts.push_back({{"fold", f},
                      {"total", c.total},
                      {"amf", c.amf},
                      {"nmf", c.nmf},
                      {"amf_fraction", c.amf_fraction()}});
  }
  return {{"k", folds.k}, {"seed", folds.seed}, {"folds", fold_ids}, {"class_counts", counts}};
}

FoldAssignment fold_assignment_from_json(const nlohmann::json& doc) {
  try {
    FoldAssignment out;
    out.k = doc.at("k").get<int>();
    out.seed = doc.at("seed").get<std::uint64_t>();
    if (out.k < 2) throw DataError("fold file: k must be at least 2");
    out.folds.assign(static_cast<std::size_t>(out.k), {});
    out.fold_counts.assign(static_cast<std::size_t>(out.k), {});
    for (const auto& [key, ids] : doc.at("folds").items()) {
      const int f = std::stoi(key);
      if (f < 0 || f >= out.k) throw DataError("fold file: fold index " + key + " out of range");
      for (const auto& id : ids) {
        const auto s = id.get<std::string>();
        if (!out.fold_of.emplace(s, f).second) {
          throw DataError("fold file: id '" + s + "' appears in two folds");
        }
        out.folds[static_cast<std::size_t>(f)].push_back(s);
      }
    }
    if (doc.contains("class_counts")) {
      for (const auto& c : doc["class_counts"]) {
        const auto f = c.at("fold").get<std::size_t>();
        if (f >= out.fold_counts.size()) continue;
        out.fold_counts[f] = {c.at("total").get<std::size_t>(), c.at("amf").get<std::size_t>(),
                              c.at("nmf").get<std::size_t>(), 0};
      }
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed fold file: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw DataError("malformed fold file: non-numeric fold key");
  }
}

std::vector<ManifestRecord> training_split(const std::vector<ManifestRecord>& records,
                                           const FoldAssignment& folds, int fold_index) {
  if (fold_index < 0 || fold_index >= folds.k) {
    throw ParameterError("fold index " + std::to_string(fold_index) + " outside [0, " +
                         std::to_string(folds.k) + ")");
  }
  std::vector<ManifestRecord> out;
  for (const auto& r : records) {
    if (!r.label) continue;
    const auto it = folds.fold_of.find(r.id);
    if (it == folds.fold_of.end()) {
      throw DataError("record '" + r.id + "' is missing from the fold assignment");
    }
    if (it->second != fold_index) out.push_back(r);
  }
  return out;
}

double SampleWeights::expected_amf_fraction() const {
  double amf = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    total += weights[i];
    if (labels[i] == kAmf) amf += weights[i];
  }
  return total > 0.0 ? amf / total : 0.0;
}

SampleWeights inverse_frequency_weights(const std::vector<ManifestRecord>& records) {
  std::vector<const ManifestRecord*> labeled;
  std::size_t counts[2] = {0, 0};
  for (const auto& r : records) {
    if (!r.label) continue;
    labeled.push_back(&r);
    ++counts[*r.label];
  }
  if (counts[kAmf] == 0 || counts[kNmf] == 0) {
    throw DataError("inverse-frequency weights need both classes (AMF " +
                    std::to_string(counts[kAmf]) + ", NMF " + std::to_string(counts[kNmf]) + ")");
  }
  std::sort(labeled.begin(), labeled.end(),
            [](const auto* a, const auto* b) { return a->id < b->id; });
  SampleWeights out;
  for (const auto* r : labeled) {
    out.ids.push_back(r->id);
    out.labels.push_back(*r->label);
    out.weights.push_back(1.0 / static_cast<double>(counts[*r->label]));
  }
  return out;
}

std::vector<std::string> weighted_sample(const SampleWeights& weights, std::size_t n,
                                         RngStream& rng) {
  if (weights.ids.empty()) throw ParameterError("weighted_sample needs at least one record");
  std::vector<double> cumulative(weights.weights.size());
  std::partial_sum(weights.weights.begin(), weights.weights.end(), cumulative.begin());
  const double total = cumulative.back();
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform() * total;
    auto idx = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
    if (idx >= cumulative.size()) idx = cumulative.size() - 1;
    out.push_back(weights.ids[idx]);
  }
  return out;
}

std::vector<BatchPlan> sample_plan(const SampleWeights& weights, int epochs, int batch_size,
                                   std::uint64_t seed) {
  if (epochs < 1) throw ParameterError("epochs must be at least 1");
  if (batch_size < 1) throw ParameterError("batch size must be at least 1");
  std::vector<BatchPlan> plan;
  for (int e = 0; e < epochs; ++e) {
    auto rng = make_rng(seed, static_cast<std::uint64_t>(e), 0, "sampler");
    const auto ids = weighted_sample(weights, weights.ids.size(), rng);
    for (std::size_t start = 0, b = 0; start < ids.size(); start += batch_size, ++b) {
      const auto end = std::min(ids.size(), start + static_cast<std::size_t>(batch_size));
      plan.push_back({e, static_cast<int>(b), {ids.begin() + static_cast<std::ptrdiff_t>(start),
                                                ids.begin() + static_cast<std::ptrdiff_t>(end)}});
    }
  }
  return plan;
}

}  // namespace histaug
