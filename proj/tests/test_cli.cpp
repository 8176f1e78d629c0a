// Copyright 2026 The LEAD Toolkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"
#include "lead/cli.hpp"
#include "lead/synthdata.hpp"

namespace lead {
namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "lead");
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

nlohmann::json manifest(const test::TempDir& dir, const std::string& sub) {
  return nlohmann::json::parse(slurp(dir.file(sub + "/manifest.json")));
}

// gen -> pretrain -> adapt on a small scenario, all under `dir`.
void pipeline(const test::TempDir& dir) {
  const std::string d = dir.path().string();
  REQUIRE(run({"--seed", "3", "--out", d + "/data", "--quiet", "gen", "--split", "3/2/2", "--dim-in", "8",
               "--per-class", "20"})
              .code == 0);
  REQUIRE(run({"--seed", "3", "--out", d + "/src", "--quiet", "pretrain", "--source", d + "/data/source.feat",
               "--feature-dim", "12", "--epochs", "5"})
              .code == 0);
  REQUIRE(run({"--seed", "3", "--out", d + "/adapt", "--quiet", "adapt", "--model", d + "/src/model.ckpt",
               "--target", d + "/data/target.feat", "--epochs", "2"})
              .code == 0);
}

TEST_CASE("exit codes map error kinds") {
  CHECK(exit_code_for(Errc::ConfigError) == kExitUsage);
  CHECK(exit_code_for(Errc::BadMagic) == kExitInput);
  CHECK(exit_code_for(Errc::LengthMismatch) == kExitInput);
  CHECK(exit_code_for(Errc::NoConvergence) == kExitNumerical);
  CHECK(exit_code_for(Errc::NonFiniteInput) == kExitNumerical);
}

TEST_CASE("help, version and usage errors") {
  CHECK(run({"--help"}).code == 0);
  const Run v = run({"--version"});
  CHECK(v.code == 0);
  CHECK(v.out == std::string(kToolkitVersion) + "\n");
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"frobnicate"}).code == kExitUsage);
  CHECK(run({"gen", "--dim-in", "-3"}).code == kExitUsage);
  test::TempDir dir("cli_usage");
  CHECK(run({"--out", dir.path().string(), "gen", "--split", "3/2"}).code == kExitUsage);
  CHECK(run({"--out", dir.path().string(), "gen", "--shift", "sideways"}).code == kExitUsage);
}

TEST_CASE("end-to-end pipeline writes its artifacts and manifests") {
  test::TempDir dir("cli_e2e");
  pipeline(dir);
  for (const char* f : {"data/source.feat", "data/target.feat", "src/model.ckpt", "src/classifier.wcls",
                        "adapt/adapted.ckpt", "adapt/epochs.csv", "adapt/predictions.txt", "adapt/report.json"}) {
    CAPTURE(f);
    CHECK(std::filesystem::exists(dir.file(f)));
  }
  const auto m = manifest(dir, "adapt");
  CHECK(m.at("command") == "adapt");
  CHECK(m.at("version") == kToolkitVersion);
  CHECK(m.at("seed") == 3);
  CHECK(m.at("config").at("epochs") == 2);
  CHECK(m.at("outputs").contains("model"));
  CHECK(m.at("timings").is_object());
  const auto report = nlohmann::json::parse(slurp(dir.file("adapt/report.json")));
  CHECK(report.contains("source_only"));
  CHECK(report.contains("adapted"));
}

TEST_CASE("label and eval subcommands") {
  test::TempDir dir("cli_label");
  pipeline(dir);
  const std::string d = dir.path().string();
  for (const char* mode : {"instance", "global", "entropy"}) {
    CAPTURE(mode);
    const Run r = run({"--out", d + "/label_" + mode, "--quiet", "label", "--mode", mode, "--model",
                       d + "/src/model.ckpt", "--target", d + "/data/target.feat", "--classes", "5"});
    CHECK(r.code == 0);
    CHECK(std::filesystem::exists(d + "/label_" + mode + "/pseudo_labels.tsv"));
  }
  const Run scored = run({"--out", d + "/ev", "eval", "--pred", d + "/label_instance/pseudo_labels.tsv", "--truth",
                          d + "/data/target.feat", "--classes", "5"});
  CHECK(scored.code == 0);
  CHECK(scored.out.find("h_score") != std::string::npos);
  const Run model_eval = run({"--out", d + "/ev2", "--quiet", "eval", "--model", d + "/adapt/adapted.ckpt",
                              "--target", d + "/data/target.feat"});
  CHECK(model_eval.code == 0);
  CHECK(nlohmann::json::parse(slurp(d + "/ev2/report.json")).contains("h_score"));
}

TEST_CASE("input errors exit with the input code") {
  test::TempDir dir("cli_input");
  const std::string d = dir.path().string();
  {
    std::ofstream(d + "/pred.txt") << "0\n1\n-1\n";
    std::ofstream(d + "/truth.txt") << "0\n1\n";
    std::ofstream(d + "/junk.ckpt") << "GARBAGE!";
  }
  const Run mismatch = run({"--out", d, "eval", "--pred", d + "/pred.txt", "--truth", d + "/truth.txt"});
  CHECK(mismatch.code == kExitInput);
  CHECK(mismatch.err.find("LengthMismatch") != std::string::npos);
  CHECK(run({"--out", d, "adapt", "--model", d + "/missing.ckpt", "--target", d + "/pred.txt"}).code == kExitInput);
  CHECK(run({"--out", d, "adapt", "--model", d + "/junk.ckpt", "--target", d + "/pred.txt"}).code == kExitInput);
}

TEST_CASE("strict run config is enforced through the CLI") {
  test::TempDir dir("cli_config");
  pipeline(dir);
  const std::string d = dir.path().string();
  std::ofstream(d + "/bad.json") << R"({"epochs": 1, "learning_rate": 0.1})";
  const Run r = run({"--config", d + "/bad.json", "--out", d + "/x", "adapt", "--model", d + "/src/model.ckpt",
                     "--target", d + "/data/target.feat"});
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("learning_rate") != std::string::npos);
  std::ofstream(d + "/good.json") << R"({"epochs": 1, "preset": "office31"})";
  CHECK(run({"--config", d + "/good.json", "--out", d + "/y", "--quiet", "adapt", "--model", d + "/src/model.ckpt",
             "--target", d + "/data/target.feat"})
            .code == 0);
  CHECK(manifest(dir, "y").at("config").at("lambda") == 0.3);
}

TEST_CASE("bench reports both paths") {
  test::TempDir dir("cli_bench");
  const Run r = run({"--out", dir.path().string(), "bench", "--n", "400", "--dim", "16", "--classes", "4",
                     "--repeats", "2", "--candidates", "2,4,8"});
  CHECK(r.code == 0);
  CHECK(r.out.find("ratio") != std::string::npos);
  const auto m = manifest(dir, ".");
  CHECK(m.at("details").at("lead_samples").size() == 2);
  CHECK(m.at("timings").contains("clustering_median"));
}

}  // namespace
}  // namespace lead
