// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace histaug {

struct PredictionRecord {
  std::string id;
  double score = 0.0;
  int label = 0;
  std::string domain;
  int fold = 0;
  int epoch = 0;
};

/// Predictions CSV, header exactly `id,score,label,domain,fold,epoch`.
/// Non-finite scores and labels outside {0,1} raise DataError naming the row.
std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path);
std::vector<PredictionRecord> parse_predictions(std::istream& in, const std::string& source);
std::string format_predictions(std::span<const PredictionRecord> preds);

inline constexpr double kDefaultThreshold = 0.5;

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
};

Confusion confusion(std::span<const PredictionRecord> preds, double threshold = kDefaultThreshold);

/// Mean of sensitivity and specificity with prediction = (score >= threshold).
/// ParameterError unless both classes are present.
double balanced_accuracy(std::span<const PredictionRecord> preds,
                         double threshold = kDefaultThreshold);

/// Mann-Whitney AUC from mid-ranks. ParameterError unless both classes are present.
double roc_auc(std::span<const PredictionRecord> preds);

struct DomainMetrics {
  std::size_t n = 0;
  std::size_t positives = 0;
  std::optional<double> balanced_accuracy;  // nullopt when the domain has a single class
  std::optional<double> roc_auc;
  Confusion confusion;
};

struct MetricsReport {
  double threshold = kDefaultThreshold;
  std::size_t n = 0;
  std::optional<double> balanced_accuracy;
  std::optional<double> roc_auc;
  Confusion confusion;
  std::map<std::string, DomainMetrics> per_domain;
  /// Min and max over the domains where the metric is defined.
  std::optional<std::pair<double, double>> ba_range;
  std::optional<std::pair<double, double>> auc_range;
};

/// Overall and per-domain metrics. Single-class groups get undefined metrics
/// instead of an error.
MetricsReport per_domain_report(std::span<const PredictionRecord> preds,
                                double threshold = kDefaultThreshold);

nlohmann::json to_json(const MetricsReport& report);
std::string per_domain_csv(const MetricsReport& report);

struct EpochScore {
  int epoch = 0;
  double balanced_accuracy = 0.0;
};

/// Epoch with the highest validation BA; the earliest wins a tie.
int select_best_epoch(std::span<const EpochScore> log);

double bce_with_logits(double logit, double target);
/// d/dx of bce_with_logits, sigmoid(x) - target.
double bce_with_logits_grad(double logit, double target);

struct ScheduleSpec {
  double eta0 = 1e-4;
  double eta_min = 1e-7;
  int t_max = 20;
};

/// Cosine annealing, exact at both endpoints.
double cosine_lr(int epoch, const ScheduleSpec& spec = {});

}  // namespace histaug
