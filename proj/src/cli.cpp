// SPDX-License-Identifier: Apache-2.0
#include "histaug/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "histaug/dataset.hpp"
#include "histaug/error.hpp"
#include "histaug/evaluation.hpp"
#include "histaug/io.hpp"
#include "histaug/pipeline.hpp"

namespace histaug::cli {
namespace {

namespace fs = std::filesystem;

struct Options {
  std::string manifest;
  std::string out;
  std::uint64_t seed = 42;
  std::string config;
  std::string folds;
  int fold_index = -1;
  int k = 5;
  int epochs = 0;  // 0 means "command default"
  int batch_size = 128;
  double threshold = kDefaultThreshold;
  unsigned workers = 1;
  std::string predictions;
  std::string audit;
  std::string summary;
  bool preview = false;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Ids become file names, so anything outside a conservative set is replaced.
std::string file_stem(const std::string& id) {
  std::string out = id;
  for (char& ch : out) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                    (ch >= '0' && ch <= '9') || ch == '-' || ch == '_' || ch == '.';
    if (!ok) ch = '_';
  }
  return out;
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw CLI::RequiredError(flag);
}

void require_file(const std::string& path) {
  if (!fs::exists(path)) throw IoError("no such file: " + path);
}

std::vector<ManifestRecord> load(const Options& o) {
  require(o.manifest, "--manifest");
  require_file(o.manifest);
  return load_manifest(o.manifest);
}

fs::path image_path(const Options& o, const ManifestRecord& r) {
  const fs::path p(r.image_path);
  return p.is_absolute() ? p : fs::path(o.manifest).parent_path() / p;
}

/// Records a command works on: the training side of a fold when --folds and
/// --fold-index are given, every labeled record otherwise.
std::vector<ManifestRecord> training_records(const Options& o,
                                             const std::vector<ManifestRecord>& all) {
  if (o.folds.empty()) {
    std::vector<ManifestRecord> out;
    std::copy_if(all.begin(), all.end(), std::back_inserter(out),
                 [](const auto& r) { return r.label.has_value(); });
    return out;
  }
  if (o.fold_index < 0) throw CLI::RequiredError("--fold-index");
  require_file(o.folds);
  const auto folds = fold_assignment_from_json(json::parse(io::read_file(o.folds)));
  return training_split(all, folds, o.fold_index);
}

std::vector<ManifestRecord> validation_records(const Options& o,
                                               const std::vector<ManifestRecord>& all) {
  std::vector<ManifestRecord> out;
  if (o.folds.empty()) {
    std::copy_if(all.begin(), all.end(), std::back_inserter(out),
                 [](const auto& r) { return r.label.has_value(); });
    return out;
  }
  if (o.fold_index < 0) throw CLI::RequiredError("--fold-index");
  require_file(o.folds);
  const auto folds = fold_assignment_from_json(json::parse(io::read_file(o.folds)));
  for (const auto& r : all) {
    const auto it = folds.fold_of.find(r.id);
    if (r.label && it != folds.fold_of.end() && it->second == o.fold_index) out.push_back(r);
  }
  return out;
}

/// Sample ids are positions in the id-sorted manifest, so they do not change
/// when a fold selects a subset.
std::map<std::string, std::uint64_t> sample_ids(const std::vector<ManifestRecord>& all) {
  std::vector<std::string> ids;
  for (const auto& r : all) ids.push_back(r.id);
  std::sort(ids.begin(), ids.end());
  std::map<std::string, std::uint64_t> out;
  for (std::size_t i = 0; i < ids.size(); ++i) out[ids[i]] = i;
  return out;
}

int cmd_split(const Options& o, std::ostream& out) {
  require(o.out, "--out");
  const auto records = load(o);
  const auto folds = grouped_stratified_kfold(records, o.k, o.seed);
  io::write_file_atomic(o.out, to_json(folds).dump(2) + "\n");
  for (std::size_t f = 0; f < folds.fold_counts.size(); ++f) {
    const auto& c = folds.fold_counts[f];
    out << "fold " << f << ": " << c.total << " records, " << c.amf << " AMF, " << c.nmf
        << " NMF\n";
  }
  return kOk;
}

int cmd_weights(const Options& o, std::ostream& out) {
  require(o.out, "--out");
  const auto weights = inverse_frequency_weights(training_records(o, load(o)));
  std::ostringstream csv;
  csv << "id,label,weight\n";
  for (std::size_t i = 0; i < weights.ids.size(); ++i) {
    csv << weights.ids[i] << ',' << weights.labels[i] << ',' << fmt(weights.weights[i]) << '\n';
  }
  io::write_file_atomic(o.out, csv.str());
  out << weights.ids.size() << " weights, expected AMF fraction "
      << fmt(weights.expected_amf_fraction()) << "\n";
  return kOk;
}

int cmd_sample_plan(const Options& o, std::ostream& out) {
  require(o.out, "--out");
  const auto weights = inverse_frequency_weights(training_records(o, load(o)));
  const int epochs = o.epochs > 0 ? o.epochs : 20;
  const auto plan = sample_plan(weights, epochs, o.batch_size, o.seed);
  std::ostringstream lines;
  for (const auto& b : plan) {
    lines << json{{"epoch", b.epoch}, {"batch", b.batch}, {"ids", b.ids}}.dump() << '\n';
  }
  io::write_file_atomic(o.out, lines.str());
  out << plan.size() << " batches over " << epochs << " epochs\n";
  return kOk;
}

int cmd_augment(const Options& o, std::ostream& out) {
  require(o.out, "--out");
  const auto all = load(o);
  const auto records = training_records(o, all);
  const auto ids = sample_ids(all);

  json overrides = json::object();
  if (!o.config.empty()) {
    require_file(o.config);
    overrides = json::parse(io::read_file(o.config));
  }
  overrides["seed"] = o.seed;
  const auto spec = build_training_pipeline(overrides);

  std::vector<Patch> patches;
  std::vector<std::uint64_t> sample;
  std::vector<std::string> sources;
  for (const auto& r : records) {
    sources.push_back(image_path(o, r).string());
    patches.push_back(io::read_png(sources.back()));
    sample.push_back(ids.at(r.id));
  }

  const fs::path dir(o.out);
  fs::create_directories(dir / "tensors");
  if (o.preview) fs::create_directories(dir / "preview");
  io::write_file_atomic(dir / "pipeline.json", to_json(spec).dump(2) + "\n");

  const int epochs = o.epochs > 0 ? o.epochs : 1;
  std::ostringstream audit;
  for (int e = 0; e < epochs; ++e) {
    const auto epoch = static_cast<std::uint64_t>(e);
    const auto outputs = apply_batch(spec, patches, epoch, sample, o.workers);
    for (std::size_t i = 0; i < records.size(); ++i) {
      const std::string stem = file_stem(records[i].id) + "_e" + std::to_string(e);
      io::write_tensor(dir / "tensors" / (stem + ".mtnt"), outputs[i].tensor);
      auto doc = to_json(outputs[i].audit);
      doc["id"] = records[i].id;
      doc["source"] = sources[i];
      audit << doc.dump() << '\n';
      if (o.preview) {
        io::write_png(dir / "preview" / (stem + ".png"),
                      augment(spec, patches[i], epoch, sample[i]).augmented);
      }
    }
  }
  io::write_file_atomic(dir / "audit.jsonl", audit.str());
  out << records.size() * static_cast<std::size_t>(epochs) << " tensors written to "
      << dir.string() << "\n";
  return kOk;
}

int cmd_preprocess(const Options& o, std::ostream& out) {
  require(o.out, "--out");
  const auto all = load(o);
  const auto records = validation_records(o, all);
  const auto ids = sample_ids(all);
  std::vector<Patch> patches;
  std::vector<std::uint64_t> sample;
  for (const auto& r : records) {
    patches.push_back(io::read_png(image_path(o, r)));
    sample.push_back(ids.at(r.id));
  }
  const fs::path dir(o.out);
  fs::create_directories(dir / "tensors");
  const auto outputs = apply_batch(build_validation_pipeline(o.seed), patches, 0, sample, o.workers);
  for (std::size_t i = 0; i < records.size(); ++i) {
    io::write_tensor(dir / "tensors" / (file_stem(records[i].id) + ".mtnt"), outputs[i].tensor);
  }
  out << records.size() << " tensors written to " << dir.string() << "\n";
  return kOk;
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  require(o.predictions, "--predictions");
  require_file(o.predictions);
  const auto preds = load_predictions(o.predictions);
  const auto report = per_domain_report(preds, o.threshold);
  const std::string text = to_json(report).dump(2) + "\n";
  if (o.out.empty()) {
    out << text;
  } else {
    io::write_file_atomic(o.out, text);
  }
  if (!o.summary.empty()) io::write_file_atomic(o.summary, per_domain_csv(report));
  return kOk;
}

int cmd_schedule(const Options& o, std::ostream& out) {
  ScheduleSpec spec;
  if (o.epochs > 0) spec.t_max = o.epochs;
  std::ostringstream table;
  for (int e = 0; e <= spec.t_max; ++e) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%d %.10g\n", e, cosine_lr(e, spec));
    table << buf;
  }
  if (o.out.empty()) {
    out << table.str();
  } else {
    io::write_file_atomic(o.out, table.str());
  }
  return kOk;
}

int cmd_replay(const Options& o, std::ostream& out) {
  require(o.audit, "--audit");
  require(o.out, "--out");
  require_file(o.audit);
  std::istringstream lines(io::read_file(o.audit));
  const fs::path dir(o.out);
  fs::create_directories(dir / "tensors");
  std::string line;
  std::size_t row = 0;
  std::size_t written = 0;
  while (std::getline(lines, line)) {
    ++row;
    if (line.empty()) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError(std::string("invalid JSON: ") + e.what(), o.audit, row);
    }
    AuditRecord audit;
    try {
      audit = audit_from_json(doc);
    } catch (const ParameterError& e) {
      throw DataError(e.what(), o.audit, row);
    }
    if (audit.source.empty()) throw DataError("audit record has no source image", o.audit, row);
    const std::string id = doc.value("id", std::to_string(audit.sample_id));
    const auto tensor = replay(audit, io::read_png(audit.source));
    io::write_tensor(dir / "tensors" / (file_stem(id) + "_e" + std::to_string(audit.epoch) + ".mtnt"),
                     tensor);
    ++written;
  }
  out << written << " tensors replayed into " << dir.string() << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Histopathology patch augmentation and evaluation tools", "histaug"};
  app.require_subcommand(1);

  const auto add_seed = [&](CLI::App* c) { c->add_option("--seed", o.seed, "Master seed"); };
  const auto add_fold = [&](CLI::App* c) {
    c->add_option("--folds", o.folds, "Fold assignment JSON from `split`");
    c->add_option("--fold-index", o.fold_index, "Fold to select")->check(CLI::NonNegativeNumber);
  };

  auto* split = app.add_subcommand("split", "Grouped stratified k-fold assignment");
  split->add_option("--manifest", o.manifest)->required();
  split->add_option("--out", o.out, "Fold JSON")->required();
  split->add_option("--k", o.k, "Number of folds")->check(CLI::Range(2, 1000));
  add_seed(split);

  auto* weights = app.add_subcommand("weights", "Inverse-frequency sample weights");
  weights->add_option("--manifest", o.manifest)->required();
  weights->add_option("--out", o.out, "Weights CSV")->required();
  add_fold(weights);

  auto* plan = app.add_subcommand("sample-plan", "Weighted batch id sequences per epoch");
  plan->add_option("--manifest", o.manifest)->required();
  plan->add_option("--out", o.out, "Plan JSONL")->required();
  plan->add_option("--epochs", o.epochs, "Epochs (default 20)")->check(CLI::PositiveNumber);
  plan->add_option("--batch-size", o.batch_size)->check(CLI::PositiveNumber);
  add_seed(plan);
  add_fold(plan);

  auto* augment_cmd = app.add_subcommand("augment", "Training pipeline tensors and audit log");
  augment_cmd->add_option("--manifest", o.manifest)->required();
  augment_cmd->add_option("--out", o.out, "Output directory")->required();
  augment_cmd->add_option("--config", o.config, "Pipeline override JSON");
  augment_cmd->add_option("--epochs", o.epochs, "Epochs to generate (default 1)")
      ->check(CLI::PositiveNumber);
  augment_cmd->add_option("--workers", o.workers)->check(CLI::PositiveNumber);
  augment_cmd->add_flag("--preview", o.preview, "Also write augmented PNGs");
  add_seed(augment_cmd);
  add_fold(augment_cmd);

  auto* preprocess = app.add_subcommand("preprocess", "Validation pipeline tensors");
  preprocess->add_option("--manifest", o.manifest)->required();
  preprocess->add_option("--out", o.out, "Output directory")->required();
  preprocess->add_option("--workers", o.workers)->check(CLI::PositiveNumber);
  add_seed(preprocess);
  add_fold(preprocess);

  auto* evaluate = app.add_subcommand("evaluate", "Metrics report from a predictions CSV");
  evaluate->add_option("--predictions", o.predictions)->required();
  evaluate->add_option("--out", o.out, "Report JSON (stdout when omitted)");
  evaluate->add_option("--summary", o.summary, "Per-domain CSV");
  evaluate->add_option("--threshold", o.threshold)->check(CLI::Range(0.0, 1.0));

  auto* schedule = app.add_subcommand("schedule", "Cosine learning-rate table");
  schedule->add_option("--epochs", o.epochs, "T_max (default 20)")->check(CLI::PositiveNumber);
  schedule->add_option("--out", o.out, "Table file (stdout when omitted)");

  auto* replay_cmd = app.add_subcommand("replay", "Regenerate tensors from an audit log");
  replay_cmd->add_option("--audit", o.audit)->required();
  replay_cmd->add_option("--out", o.out, "Output directory")->required();

  std::vector<const char*> argv{"histaug"};
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*split) return cmd_split(o, out);
    if (*weights) return cmd_weights(o, out);
    if (*plan) return cmd_sample_plan(o, out);
    if (*augment_cmd) return cmd_augment(o, out);
    if (*preprocess) return cmd_preprocess(o, out);
    if (*evaluate) return cmd_evaluate(o, out);
    if (*schedule) return cmd_schedule(o, out);
    if (*replay_cmd) return cmd_replay(o, out);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIoError;
  } catch (const fs::filesystem_error& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIoError;
  } catch (const json::exception& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const Error& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

}  // namespace histaug::cli
