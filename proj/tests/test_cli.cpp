// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "histaug/cli.hpp"
#include "histaug/evaluation.hpp"
#include "histaug/io.hpp"
#include "histaug/preprocess.hpp"
#include "support.hpp"

using namespace histaug;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

/// Small on-disk dataset: 12 patches in 6 groups, PNGs next to the manifest.
struct Workspace {
  test::TempDir dir{"cli"};
  fs::path manifest = dir / "manifest.csv";

  Workspace() {
    fs::create_directories(dir / "img");
    std::ostringstream text;
    text << "id,image_path,dataset,domain,group_id,raw_label\n";
    for (int i = 0; i < 12; ++i) {
      const std::string id = "s" + std::to_string(i);
      io::write_png(dir / ("img/" + id + ".png"), test::blob_patch(64, 64, i));
      text << id << ",img/" << id << ".png,MIDOG++,dom" << i % 2 << ",case" << i / 2 << ','
           << (i % 3 == 0 ? "AMF" : "NMF") << '\n';
    }
    io::write_file_atomic(manifest, text.str());
  }

  std::string path(const std::string& name) const { return (dir / name).string(); }
};

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = io::read_file(e.path());
  }
  return out;
}

}  // namespace

TEST_CASE("schedule prints the 21-point table") {
  const auto r = run({"schedule"});
  CHECK(r.code == 0);
  const auto table = lines(r.out);
  REQUIRE(table.size() == 21);
  CHECK(table.front() == "0 0.0001");
  CHECK(table.back() == "20 1e-07");
  CHECK(lines(run({"schedule", "--epochs", "4"}).out).size() == 5);
}

TEST_CASE("usage errors exit with 1") {
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"split", "--manifest", "x.csv"}).code == 1);  // --out missing
  CHECK(run({"schedule", "--epochs", "zero"}).code == 1);
  CHECK(run({"evaluate", "--predictions", "p.csv", "--threshold", "2"}).code == 1);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("split is deterministic and leaves inputs alone") {
  Workspace ws;
  const auto before = io::read_file(ws.manifest);
  REQUIRE(run({"split", "--manifest", ws.manifest.string(), "--out", ws.path("a.json")}).code == 0);
  REQUIRE(run({"split", "--manifest", ws.manifest.string(), "--out", ws.path("b.json"), "--seed",
               "42"})
              .code == 0);
  CHECK(io::read_file(ws.path("a.json")) == io::read_file(ws.path("b.json")));
  CHECK(io::read_file(ws.manifest) == before);
  const auto doc = nlohmann::json::parse(io::read_file(ws.path("a.json")));
  CHECK(doc["k"] == 5);
  CHECK(doc["seed"] == 42);
  CHECK(doc["folds"].size() == 5);
  CHECK(run({"split", "--manifest", ws.manifest.string(), "--out", ws.path("c.json"), "--k", "7"})
            .code == 2);  // only 6 groups
}

TEST_CASE("weights and sample plan") {
  Workspace ws;
  const auto m = ws.manifest.string();
  REQUIRE(run({"split", "--manifest", m, "--out", ws.path("folds.json")}).code == 0);
  REQUIRE(run({"weights", "--manifest", m, "--out", ws.path("w.csv")}).code == 0);
  const auto w = lines(io::read_file(ws.path("w.csv")));
  REQUIRE(w.size() == 13);
  CHECK(w[0] == "id,label,weight");
  CHECK(w[1] == "s0,1,0.25");  // 4 AMF records
  CHECK(w[2] == "s1,0,0.125");  // 8 NMF records

  const auto r = run({"weights", "--manifest", m, "--folds", ws.path("folds.json"), "--fold-index",
                      "0", "--out", ws.path("w0.csv")});
  CHECK((r.code == 0 || r.code == 2));  // a fold may leave a single class
  CHECK(run({"weights", "--manifest", m, "--folds", ws.path("folds.json"), "--out",
             ws.path("w1.csv")})
            .code == 1);  // --fold-index missing

  REQUIRE(run({"sample-plan", "--manifest", m, "--out", ws.path("plan.jsonl"), "--epochs", "3",
               "--batch-size", "5"})
              .code == 0);
  const auto plan = lines(io::read_file(ws.path("plan.jsonl")));
  REQUIRE(plan.size() == 9);  // 12 ids -> 5, 5, 2 per epoch
  const auto first = nlohmann::json::parse(plan[0]);
  CHECK(first["epoch"] == 0);
  CHECK(first["ids"].size() == 5);
  CHECK(nlohmann::json::parse(plan[2])["ids"].size() == 2);
  REQUIRE(run({"sample-plan", "--manifest", m, "--out", ws.path("plan2.jsonl"), "--epochs", "3",
               "--batch-size", "5"})
              .code == 0);
  CHECK(io::read_file(ws.path("plan.jsonl")) == io::read_file(ws.path("plan2.jsonl")));
  REQUIRE(run({"sample-plan", "--manifest", m, "--out", ws.path("plan3.jsonl")}).code == 0);
  CHECK(lines(io::read_file(ws.path("plan3.jsonl"))).size() == 20);
}

TEST_CASE("augment and replay") {
  Workspace ws;
  const auto m = ws.manifest.string();
  REQUIRE(run({"augment", "--manifest", m, "--out", ws.path("aug1"), "--epochs", "2", "--workers",
               "1", "--preview"})
              .code == 0);
  REQUIRE(run({"augment", "--manifest", m, "--out", ws.path("aug3"), "--epochs", "2", "--workers",
               "3"})
              .code == 0);
  auto one = tree(ws.dir / "aug1");
  const auto three = tree(ws.dir / "aug3");
  CHECK(one.count("preview/s3_e1.png") == 1);
  for (auto it = one.begin(); it != one.end();) {
    it = it->first.rfind("preview/", 0) == 0 ? one.erase(it) : std::next(it);
  }
  CHECK(one == three);
  CHECK(one.count("tensors/s11_e1.mtnt") == 1);
  CHECK(one.count("pipeline.json") == 1);
  const auto audit = lines(one.at("audit.jsonl"));
  REQUIRE(audit.size() == 24);
  const auto rec = nlohmann::json::parse(audit[0]);
  CHECK(rec["id"] == "s0");
  CHECK(rec["sample_id"] == 0);

  REQUIRE(run({"replay", "--audit", ws.path("aug1/audit.jsonl"), "--out", ws.path("rep")}).code ==
          0);
  for (const auto& [name, bytes] : tree(ws.dir / "rep")) CHECK(bytes == one.at(name));
  CHECK(tree(ws.dir / "rep").size() == 24);

  io::write_file_atomic(ws.path("cfg.json"),
                        R"({"gates": {"blur_noise": {"members": {"gauss_noise": {"params": {"std": [1, 999]}}}}}})");
  const auto bad = run({"augment", "--manifest", m, "--out", ws.path("aug_bad"), "--config",
                        ws.path("cfg.json")});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("gates.blur_noise.members.gauss_noise.params.std") != std::string::npos);

  io::write_file_atomic(ws.path("broken.jsonl"), "{\"seed\": 1}\n");
  const auto broken = run({"replay", "--audit", ws.path("broken.jsonl"), "--out", ws.path("r2")});
  CHECK(broken.code == 2);
  CHECK(broken.err.find("broken.jsonl:1") != std::string::npos);
}

TEST_CASE("preprocess writes validation tensors") {
  Workspace ws;
  REQUIRE(run({"preprocess", "--manifest", ws.manifest.string(), "--out", ws.path("val"),
               "--workers", "2"})
              .code == 0);
  const auto t = io::read_tensor(ws.dir / "val/tensors/s4.mtnt");
  CHECK(t == final_preprocess(test::blob_patch(64, 64, 4)));
}

TEST_CASE("evaluate reproduces the library report") {
  Workspace ws;
  const std::vector<PredictionRecord> preds = {
      {"a", 0.9, 1, "human", 0, 3}, {"b", 0.7, 1, "human", 0, 3}, {"c", 0.2, 0, "human", 0, 3},
      {"d", 0.4, 0, "human", 0, 3}, {"e", 0.8, 1, "canine", 1, 3}, {"f", 0.6, 0, "canine", 1, 3},
      {"g", 0.55, 1, "canine", 1, 3}, {"h", 0.3, 0, "canine", 1, 3}};
  io::write_file_atomic(ws.path("preds.csv"), format_predictions(preds));
  const auto r = run({"evaluate", "--predictions", ws.path("preds.csv"), "--out",
                      ws.path("report.json"), "--summary", ws.path("summary.csv")});
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(io::read_file(ws.path("report.json")));
  CHECK(doc == to_json(per_domain_report(preds)));
  CHECK(doc["per_domain"]["canine"]["roc_auc"] == 0.75);
  CHECK(doc["per_domain"]["human"]["balanced_accuracy"] == 1.0);
  CHECK(doc["confusion"]["fp"] == 1);
  CHECK(lines(io::read_file(ws.path("summary.csv"))).size() == 3);

  const auto stdout_run = run({"evaluate", "--predictions", ws.path("preds.csv"), "--threshold", "0.95"});
  CHECK(nlohmann::json::parse(stdout_run.out)["threshold"] == 0.95);
}

TEST_CASE("data and io failures map to exit codes") {
  Workspace ws;
  const auto missing = run({"split", "--manifest", ws.path("nope.csv"), "--out", ws.path("f.json")});
  CHECK(missing.code == 3);

  io::write_file_atomic(ws.path("dup.csv"), "id,image_path,dataset,domain,group_id,raw_label\n"
                                            "a,a.png,AMi-Br,d,g1,AMF\n"
                                            "a,b.png,AMi-Br,d,g2,NMF\n");
  const auto dup = run({"split", "--manifest", ws.path("dup.csv"), "--out", ws.path("f.json")});
  CHECK(dup.code == 2);
  CHECK(dup.err.find("dup.csv:3") != std::string::npos);
  CHECK_FALSE(fs::exists(ws.path("f.json")));

  io::write_file_atomic(ws.path("p.csv"), "id,score,label,domain,fold,epoch\na,0.3,7,d,0,0\n");
  const auto bad_label = run({"evaluate", "--predictions", ws.path("p.csv")});
  CHECK(bad_label.code == 2);
  CHECK(bad_label.err.find("p.csv:2") != std::string::npos);

  // Manifest pointing at an image that does not exist.
  io::write_file_atomic(ws.path("ghost.csv"), "id,image_path,dataset,domain,group_id,raw_label\n"
                                              "a,ghost.png,AMi-Br,d,g1,AMF\n");
  CHECK(run({"preprocess", "--manifest", ws.path("ghost.csv"), "--out", ws.path("o")}).code == 3);
}
