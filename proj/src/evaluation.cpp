// SPDX-License-Identifier: Apache-2.0
#include "histaug/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "histaug/csv.hpp"
#include "histaug/error.hpp"

namespace histaug {
namespace {

const std::vector<std::string> kPredictionHeader = {"id",     "score", "label",
                                                    "domain", "fold",  "epoch"};

double parse_double(const std::string& s, const std::string& what, const std::string& source,
                    std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::logic_error&) {
    throw DataError("bad " + what + " '" + s + "'", source, line);
  }
}

int parse_int(const std::string& s, const std::string& what, const std::string& source,
              std::size_t line) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw DataError("bad " + what + " '" + s + "'", source, line);
  }
  return v;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require_both_classes(std::span<const PredictionRecord> preds, const char* what) {
  bool pos = false;
  bool neg = false;
  for (const auto& p : preds) (p.label == 1 ? pos : neg) = true;
  if (!pos || !neg) {
    throw ParameterError(std::string(what) + " is undefined without both classes");
  }
}

nlohmann::json confusion_json(const Confusion& c) {
  return {{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}};
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json range_json(const std::optional<std::pair<double, double>>& r) {
  return r ? nlohmann::json::array({r->first, r->second}) : nlohmann::json(nullptr);
}

void extend(std::optional<std::pair<double, double>>& r, const std::optional<double>& v) {
  if (!v) return;
  if (!r) {
    r = {{*v, *v}};
  } else {
    r->first = std::min(r->first, *v);
    r->second = std::max(r->second, *v);
  }
}

}  // namespace

std::vector<PredictionRecord> parse_predictions(std::istream& in, const std::string& source) {
  std::vector<PredictionRecord> out;
  for (const auto& row : csv::read_table(in, kPredictionHeader, source)) {
    PredictionRecord p;
    p.id = row.fields[0];
    p.score = parse_double(row.fields[1], "score", source, row.line);
    if (!std::isfinite(p.score)) throw DataError("score is not finite", source, row.line);
    p.label = parse_int(row.fields[2], "label", source, row.line);
    if (p.label != 0 && p.label != 1) {
      throw DataError("label must be 0 or 1, got '" + row.fields[2] + "'", source, row.line);
    }
    p.domain = row.fields[3];
    p.fold = parse_int(row.fields[4], "fold", source, row.line);
    p.epoch = parse_int(row.fields[5], "epoch", source, row.line);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open predictions " + path.string());
  return parse_predictions(in, path.string());
}

std::string format_predictions(std::span<const PredictionRecord> preds) {
  std::ostringstream out;
  out << "id,score,label,domain,fold,epoch\n";
  for (const auto& p : preds) {
    out << csv::escape(p.id) << ',' << fmt(p.score) << ',' << p.label << ','
        << csv::escape(p.domain) << ',' << p.fold << ',' << p.epoch << '\n';
  }
  return out.str();
}

Confusion confusion(std::span<const PredictionRecord> preds, double threshold) {
  Confusion c;
  for (const auto& p : preds) {
    const bool predicted = p.score >= threshold;
    if (p.label == 1) {
      ++(predicted ? c.tp : c.fn);
    } else {
      ++(predicted ? c.fp : c.tn);
    }
  }
  return c;
}

double balanced_accuracy(std::span<const PredictionRecord> preds, double threshold) {
  require_both_classes(preds, "balanced accuracy");
  const auto c = confusion(preds, threshold);
  const double sensitivity = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  const double specificity = static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
  return (sensitivity + specificity) / 2.0;
}

double roc_auc(std::span<const PredictionRecord> preds) {
  require_both_classes(preds, "ROC AUC");
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return preds[a].score < preds[b].score; });

  // Ranks are doubled so that tie mid-ranks stay integral.
  std::uint64_t pos_rank2 = 0;
  std::uint64_t n_pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && preds[order[j]].score == preds[order[i]].score) ++j;
    const std::uint64_t mid2 = (i + 1) + j;  // 2 * mean of ranks i+1..j
    for (std::size_t t = i; t < j; ++t) {
      if (preds[order[t]].label == 1) {
        pos_rank2 += mid2;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::uint64_t n_neg = preds.size() - n_pos;
  // U = R_pos - n_pos (n_pos + 1) / 2, all doubled.
  const std::uint64_t u2 = pos_rank2 - n_pos * (n_pos + 1);
  return static_cast<double>(u2) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

MetricsReport per_domain_report(std::span<const PredictionRecord> preds, double threshold) {
  const auto fill = [threshold](std::span<const PredictionRecord> group, DomainMetrics& m) {
    m.n = group.size();
    m.confusion = confusion(group, threshold);
    m.positives = m.confusion.tp + m.confusion.fn;
    if (m.positives > 0 && m.positives < m.n) {
      m.balanced_accuracy = balanced_accuracy(group, threshold);
      m.roc_auc = roc_auc(group);
    }
  };

  MetricsReport report;
  report.threshold = threshold;
  DomainMetrics overall;
  fill(preds, overall);
  report.n = overall.n;
  report.confusion = overall.confusion;
  report.balanced_accuracy = overall.balanced_accuracy;
  report.roc_auc = overall.roc_auc;

  std::map<std::string, std::vector<PredictionRecord>> by_domain;
  for (const auto& p : preds) by_domain[p.domain].push_back(p);
  for (const auto& [domain, group] : by_domain) {
    auto& m = report.per_domain[domain];
    fill(group, m);
    extend(report.ba_range, m.balanced_accuracy);
    extend(report.auc_range, m.roc_auc);
  }
  return report;
}

nlohmann::json to_json(const MetricsReport& report) {
  nlohmann::json domains = nlohmann::json::object();
  for (const auto& [name, m] : report.per_domain) {
    domains[name] = {{"n", m.n},
                     {"positives", m.positives},
                     {"balanced_accuracy", optional_json(m.balanced_accuracy)},
                     {"roc_auc", optional_json(m.roc_auc)},
                     {"defined", m.roc_auc.has_value()},
                     {"confusion", confusion_json(m.confusion)}};
  }
  return {{"threshold", report.threshold},
          {"n", report.n},
          {"balanced_accuracy", optional_json(report.balanced_accuracy)},
          {"roc_auc", optional_json(report.roc_auc)},
          {"confusion", confusion_json(report.confusion)},
          {"per_domain", domains},
          {"balanced_accuracy_range", range_json(report.ba_range)},
          {"roc_auc_range", range_json(report.auc_range)}};
}

std::string per_domain_csv(const MetricsReport& report) {
  const auto cell = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
  std::ostringstream out;
  out << "domain,n,positives,balanced_accuracy,roc_auc,tp,fp,tn,fn\n";
  for (const auto& [name, m] : report.per_domain) {
    out << csv::escape(name) << ',' << m.n << ',' << m.positives << ','
        << cell(m.balanced_accuracy) << ',' << cell(m.roc_auc) << ',' << m.confusion.tp << ','
        << m.confusion.fp << ',' << m.confusion.tn << ',' << m.confusion.fn << '\n';
  }
  return out.str();
}

int select_best_epoch(std::span<const EpochScore> log) {
  if (log.empty()) throw ParameterError("cannot select an epoch from an empty log");
  const EpochScore* best = &log.front();
  for (const auto& e : log) {
    if (e.balanced_accuracy > best->balanced_accuracy ||
        (e.balanced_accuracy == best->balanced_accuracy && e.epoch < best->epoch)) {
      best = &e;
    }
  }
  return best->epoch;
}

double bce_with_logits(double logit, double target) {
  if (!std::isfinite(logit)) throw ParameterError("logit must be finite");
  return std::max(logit, 0.0) - logit * target + std::log1p(std::exp(-std::abs(logit)));
}

double bce_with_logits_grad(double logit, double target) {
  if (!std::isfinite(logit)) throw ParameterError("logit must be finite");
  const double sigmoid = logit >= 0.0 ? 1.0 / (1.0 + std::exp(-logit))
                                      : std::exp(logit) / (1.0 + std::exp(logit));
  return sigmoid - target;
}

double cosine_lr(int epoch, const ScheduleSpec& spec) {
  if (spec.t_max < 1) throw ParameterError("T_max must be at least 1");
  if (!(spec.eta_min >= 0.0 && spec.eta_min <= spec.eta0)) {
    throw ParameterError("schedule needs 0 <= eta_min <= eta0");
  }
  if (epoch < 0 || epoch > spec.t_max) {
    throw ParameterError("epoch " + std::to_string(epoch) + " outside [0, " +
                         std::to_string(spec.t_max) + "]");
  }
  if (epoch == 0) return spec.eta0;
  if (epoch == spec.t_max) return spec.eta_min;
  const double w = (1.0 + std::cos(std::numbers::pi * epoch / spec.t_max)) / 2.0;
  return spec.eta0 * w + spec.eta_min * (1.0 - w);
}

}  // namespace histaug
