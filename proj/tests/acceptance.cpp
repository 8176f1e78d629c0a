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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <unistd.h>

#include "json.hpp"
#include "lead/adaptation.hpp"
#include "lead/cli.hpp"
#include "lead/decomposition.hpp"
#include "lead/density.hpp"
#include "lead/evaluation.hpp"
#include "lead/labeling.hpp"
#include "lead/linalg.hpp"
#include "lead/objectives.hpp"
#include "lead/random.hpp"
#include "lead/synthdata.hpp"

namespace fs = std::filesystem;
using namespace lead;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

Matrix gaussian(std::mt19937_64& rng, Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = standard_normal(rng);
  return m;
}

Index uniform_between(std::mt19937_64& rng, Index lo, Index hi) {
  return lo + static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

// ------------------------------------------------------------------ 1

Outcome decomposition_identity() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  double worst_identity = 0.0;
  double worst_recon = 0.0;
  for (int m = 0; m < 50; ++m) {
    const Index c = uniform_between(rng, 3, 32);
    const Index d = uniform_between(rng, c + 1, 256);
    const SubspaceBasis basis = build_spaces(gaussian(rng, c, d));
    const Matrix z = gaussian(rng, 200, d);
    const auto parts = decompose_batch(z, basis);
    for (Index i = 0; i < z.rows(); ++i) {
      const DecomposedFeature& f = parts[static_cast<std::size_t>(i)];
      const Vector unit = z.row(i).transpose() / z.row(i).norm();
      worst_identity = std::max(worst_identity, std::abs(f.m_known * f.m_known + f.m_unknown * f.m_unknown - 1.0));
      worst_recon = std::max(worst_recon, (f.z_known + f.z_unknown - unit).cwiseAbs().maxCoeff());
    }
  }
  const double secs = seconds_since(t0);
  return {worst_identity <= 1e-6 && worst_recon <= 1e-8 && secs < 10.0,
          fmt("10000 features / 50 classifiers: max |m_k^2+m_u^2-1| = %.2e, max reconstruction error = %.2e, %.2f s",
              worst_identity, worst_recon, secs)};
}

// ------------------------------------------------------------------ 2

Outcome svd_oracle() {
  std::mt19937_64 rng(202);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const Index rows = uniform_between(rng, 1, 40);
    const Index cols = uniform_between(rng, 1, 80);
    const Matrix a = gaussian(rng, rows, cols);
    const auto r = svd(a);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(a.transpose() * a);
    Vector lambda = eig.eigenvalues().reverse();  // descending
    const double scale = std::max(lambda(0), 1e-300);
    for (Index i = 0; i < lambda.size(); ++i) {
      const double sigma_sq = i < r.sigma.size() ? r.sigma(i) * r.sigma(i) : 0.0;
      worst = std::max(worst, std::abs(sigma_sq - lambda(i)) / scale);
    }
  }
  return {worst <= 1e-8, fmt("200 random shapes up to 40x80: max |sigma^2 - lambda| / lambda_max = %.2e", worst)};
}

// ------------------------------------------------------------------ 3

Outcome gradient_check() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(mix_seed(303, seed));
    MlpExtractor model = MlpExtractor::random(5, 7, seed, 1.0);
    model.b1 = 0.1 * gaussian(rng, model.b1.size(), 1).col(0);
    model.b2 = 0.1 * gaussian(rng, 7, 1).col(0);
    const Matrix w = gaussian(rng, 3, 7);
    const SubspaceBasis basis = build_spaces(w);
    const Matrix x = gaussian(rng, 9, 5);
    BatchTargets targets;
    for (int i = 0; i < 9; ++i) targets.labels.push_back(i % 4 == 3 ? kUnknown : i % 3);
    targets.tau = gaussian(rng, 9, 1).col(0).cwiseAbs();
    targets.con_target = softmax_rows(gaussian(rng, 9, 3));
    const ObjectiveSpec spec{0.3 + 0.1 * static_cast<double>(seed % 5), {true, true, true}};
    const Objective o = backward(model, w, basis, x, targets, spec);
    auto sweep = [&](auto& param, const auto& grad) {
      for (Index i = 0; i < param.size(); ++i) {
        const double saved = param.data()[i];
        const double h = 1e-6;
        param.data()[i] = saved + h;
        const double up = adaptation_loss(model, w, basis, x, targets, spec).total;
        param.data()[i] = saved - h;
        const double down = adaptation_loss(model, w, basis, x, targets, spec).total;
        param.data()[i] = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double analytic = grad.data()[i];
        worst = std::max(worst, std::abs(analytic - numeric) /
                                    (std::max(std::abs(analytic), std::abs(numeric)) + 1e-6));
      }
    };
    sweep(model.w1, o.grads.w1);
    sweep(model.b1, o.grads.b1);
    sweep(model.w2, o.grads.w2);
    sweep(model.b2, o.grads.b2);
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 30.0,
          fmt("20 seeded configurations, full objective: max relative error = %.2e, %.2f s", worst, secs)};
}

// ------------------------------------------------------------------ 4

Outcome gmm_recovery() {
  double worst_mean = 0.0;
  bool monotone = true;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(mix_seed(404, seed));
    std::vector<double> samples;
    double low = 0.0, high = 0.0;
    for (int i = 0; i < 500; ++i) {
      const double a = 0.3 + 0.05 * standard_normal(rng);
      const double b = 0.7 + 0.05 * standard_normal(rng);
      low += a;
      high += b;
      samples.push_back(a);
      samples.push_back(b);
    }
    std::vector<double> trace;
    const MagnitudeModel m = fit_two_component(samples, seed, &trace);
    worst_mean = std::max({worst_mean, std::abs(m.mu_com - low / 500.0), std::abs(m.mu_pri - high / 500.0)});
    for (std::size_t i = 1; i < trace.size(); ++i) {
      if (trace[i] < trace[i - 1] - 1e-9 * std::abs(trace[i - 1])) monotone = false;
    }
  }
  return {worst_mean <= 0.02 && monotone,
          fmt("20 seeds: max |fitted - oracle mean| = %.2e, log-likelihood monotone = %s", worst_mean,
              monotone ? "yes" : "no")};
}

// ------------------------------------------------------------------ 5

Outcome closed_forms() {
  const CommonScore s = common_score_from_distances(0.0, 0.0);
  const double et = 1.0 - std::exp(-1.0);
  const double err = std::max({std::abs(s.epsilon_t - et), std::abs(s.epsilon_s - 1.0),
                               std::abs(s.epsilon - std::sqrt(et))});
  const bool ends = decision_boundary(0.21, 0.83, 0.0) == 0.21 && decision_boundary(0.21, 0.83, 1.0) == 0.83;
  const bool tau_zero = certainty(0.37, 0.37) == 0.0 && certainty(0.0, 0.0, 1.0) == 0.0;
  return {err <= 1e-9 && ends && tau_zero,
          fmt("score error at d=0: %.2e, boundary endpoints exact: %s, tau(gap=0) == 0: %s", err,
              ends ? "yes" : "no", tau_zero ? "yes" : "no")};
}

// -------------------------------------------------------------- 6 and 7

// First five seeds. Seed 7 served for hyper-parameter exploration and is
// left out so the panel is not tuned.
const std::vector<std::uint64_t> kPanelSeeds = {1, 2, 3, 4, 5};

struct SeedRun {
  double source_only = 0.0;
  std::map<std::string, double> h;         // final H-score per loss set
  double instance_private = 0.0;           // mean over epochs
  double global_private = 0.0;
  double instance_private_snapshot = 0.0;  // labels of the pretrained model
  double global_private_snapshot = 0.0;
  double instance_h = 0.0;
  double global_h = 0.0;
  double seconds_full = 0.0;
};

double mean_private(const AdaptResult& r) {
  double s = 0.0;
  for (const auto& e : r.epochs) s += e.pseudo.acc_private;
  return r.epochs.empty() ? 0.0 : s / static_cast<double>(r.epochs.size());
}

SeedRun run_fixture(std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  ScenarioSpec spec;  // 10/10/11, dim_in 32, 100 per class
  spec.seed = seed;
  const Scenario sc = generate(spec);
  SourceModel model = SourceModel::random(spec.dim_in, 64, spec.source_classes(), seed);
  PretrainConfig pc;
  pc.seed = seed;
  smooth_ce_pretrain(model, sc.source.values, *sc.source.labels, pc);
  const std::span<const int> truth(*sc.target.labels);
  const Index classes = spec.source_classes();

  SeedRun out;
  out.source_only = evaluate(predict(model.extractor, model.classifier, sc.target.values), truth, classes).h_score;

  auto run = [&](LossSwitches losses, LabelingMode mode) {
    AdaptConfig cfg;
    apply_preset(cfg, "office31");
    cfg.seed = seed;
    cfg.epochs = 5;
    cfg.losses = losses;
    cfg.labeling_mode = mode;
    MlpExtractor ex = model.extractor;
    return adapt(ex, sc.target.values, model.classifier, cfg, truth);
  };
  const AdaptResult full = run({true, true, true}, LabelingMode::Instance);
  out.seconds_full = seconds_since(t0);
  out.h["full"] = full.epochs.back().eval.h_score;
  out.h["ce"] = run({true, false, false}, LabelingMode::Instance).epochs.back().eval.h_score;
  out.h["ce+reg"] = run({true, true, false}, LabelingMode::Instance).epochs.back().eval.h_score;
  out.h["ce+con"] = run({true, false, true}, LabelingMode::Instance).epochs.back().eval.h_score;
  const AdaptResult global = run({true, true, true}, LabelingMode::Global);
  out.instance_private = mean_private(full);
  out.global_private = mean_private(global);
  out.instance_private_snapshot = full.epochs.front().pseudo.acc_private;
  out.global_private_snapshot = global.epochs.front().pseudo.acc_private;
  out.instance_h = full.epochs.back().eval.h_score;
  out.global_h = global.epochs.back().eval.h_score;
  return out;
}

struct PanelMeans {
  SeedRun mean;
  double worst_gain = 1.0;
  double slowest_full = 0.0;
};

PanelMeans run_panel() {
  PanelMeans p;
  const double n = static_cast<double>(kPanelSeeds.size());
  for (std::uint64_t seed : kPanelSeeds) {
    const SeedRun r = run_fixture(seed);
    std::printf("  seed %llu: source-only H %.3f | full %.3f ce %.3f ce+reg %.3f ce+con %.3f | private PL acc "
                "instance %.3f global %.3f\n",
                static_cast<unsigned long long>(seed), r.source_only, r.h.at("full"), r.h.at("ce"), r.h.at("ce+reg"),
                r.h.at("ce+con"), r.instance_private, r.global_private);
    p.mean.source_only += r.source_only / n;
    for (const auto& [k, v] : r.h) p.mean.h[k] += v / n;
    p.mean.instance_private += r.instance_private / n;
    p.mean.global_private += r.global_private / n;
    p.mean.instance_private_snapshot += r.instance_private_snapshot / n;
    p.mean.global_private_snapshot += r.global_private_snapshot / n;
    p.mean.instance_h += r.instance_h / n;
    p.mean.global_h += r.global_h / n;
    p.worst_gain = std::min(p.worst_gain, r.h.at("full") - r.source_only);
    p.slowest_full = std::max(p.slowest_full, r.seconds_full);
  }
  return p;
}

Outcome end_to_end(const PanelMeans& p) {
  const SeedRun& m = p.mean;
  const double gain = m.h.at("full") - m.source_only;
  const bool h_ok = gain >= 0.10;
  const bool pl_ok = m.instance_private >= m.global_private;
  const bool time_ok = p.slowest_full < 120.0;
  std::printf("  info: private pseudo-label accuracy on the pretrained snapshot: instance %.3f, global %.3f\n",
              m.instance_private_snapshot, m.global_private_snapshot);
  std::printf("  info: final H-score with instance labels %.3f, with global labels %.3f\n", m.instance_h, m.global_h);
  return {h_ok && pl_ok && time_ok,
          fmt("panel mean H %.3f -> %.3f (gain %+.1f pts, worst seed %+.1f) [%s]; private PL acc instance %.3f vs "
              "global %.3f [%s]; slowest run %.1f s",
              m.source_only, m.h.at("full"), 100.0 * gain, 100.0 * p.worst_gain, h_ok ? "ok" : "short",
              m.instance_private, m.global_private, pl_ok ? "ok" : "instance below global", p.slowest_full)};
}

Outcome ablation_direction(const PanelMeans& p) {
  const auto& h = p.mean.h;
  const double full = h.at("full");
  const bool ok = full >= h.at("ce+reg") - 0.01 && full >= h.at("ce+con") - 0.01 && full >= h.at("ce");
  return {ok, fmt("panel mean H: full %.3f, ce %.3f, ce+reg %.3f, ce+con %.3f", full, h.at("ce"), h.at("ce+reg"),
                  h.at("ce+con"))};
}

// ------------------------------------------------------------------ 8

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "lead");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  if (code != 0) std::fprintf(stderr, "%s", err.str().c_str());
  return code;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

Outcome runtime_trend(const fs::path& work) {
  const fs::path dir = work / "bench";
  // The candidate range is cut to three values and K-means to 30 iterations;
  // both only make the clustering path cheaper.
  const int code = cli({"--seed", "8", "--quiet", "--out", dir.string(), "bench", "--n", "50000", "--dim", "256",
                        "--classes", "50", "--repeats", "5", "--candidates", "25,50,100", "--kmeans-max-iter", "30"});
  if (code != 0) return {false, fmt("bench exited with %d", code)};
  const auto m = read_json(dir / "manifest.json");
  const double lead_med = m.at("timings").at("lead_median").get<double>();
  const double cluster_med = m.at("timings").at("clustering_median").get<double>();
  const double ratio = cluster_med / lead_med;
  return {ratio >= 5.0, fmt("N=50000 D=256 C=50, median of 5: boundary path %.3f s, clustering path %.3f s, ratio %.1fx",
                            lead_med, cluster_med, ratio)};
}

// ------------------------------------------------------------------ 9

Outcome inference_rule() {
  int failures = 0;
  for (Index c = 2; c <= 345; ++c) {
    if (infer(Vector::Zero(c), 0.55) != kUnknown) ++failures;
    for (Index hot : {Index{0}, c / 2, c - 1}) {
      Vector onehot = Vector::Zero(c);
      onehot(hot) = 1.0;
      if (normalized_entropy(onehot) >= 0.55) ++failures;
      // logits whose softmax is one-hot to double precision
      if (infer(Vector(800.0 * onehot), 0.55) != static_cast<int>(hot)) ++failures;
    }
  }
  return {failures == 0, fmt("C = 2..345, uniform and one-hot inputs: %d misclassified", failures)};
}

// ------------------------------------------------------------------ 10

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool run_pipeline(const fs::path& d) {
  const std::string s = d.string();
  return cli({"--seed", "5", "--quiet", "--out", s + "/data", "gen", "--split", "3/2/2", "--dim-in", "8",
              "--per-class", "30"}) == 0 &&
         cli({"--seed", "5", "--quiet", "--out", s + "/src", "pretrain", "--source", s + "/data/source.feat",
              "--feature-dim", "12", "--epochs", "8"}) == 0 &&
         cli({"--seed", "5", "--quiet", "--out", s + "/adapt", "adapt", "--model", s + "/src/model.ckpt", "--target",
              s + "/data/target.feat", "--epochs", "3"}) == 0 &&
         cli({"--seed", "5", "--quiet", "--out", s + "/label", "label", "--model", s + "/adapt/adapted.ckpt",
              "--target", s + "/data/target.feat"}) == 0;
}

// Every file under `dir`, relative path -> contents. Manifest timings are
// wall-clock measurements and are dropped before comparison.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string body = slurp(e.path());
    if (e.path().filename() == "manifest.json") {
      auto j = nlohmann::json::parse(body);
      j.erase("timings");
      body = j.dump();
    }
    files[fs::relative(e.path(), dir).string()] = body;
  }
  return files;
}

Outcome determinism_and_io(const fs::path& work) {
  const fs::path run_dir = work / "run";
  const fs::path first = work / "first";
  if (!run_pipeline(run_dir)) return {false, "first pipeline run failed"};
  fs::rename(run_dir, first);
  if (!run_pipeline(run_dir)) return {false, "second pipeline run failed"};
  const auto a = snapshot(first);
  const auto b = snapshot(run_dir);
  const bool same_runs = a == b && !a.empty();

  std::mt19937_64 rng(1010);
  FeatureMatrix fm;
  fm.values = gaussian(rng, 57, 13).cast<float>().cast<double>();
  fm.labels = std::vector<int>(57);
  for (int i = 0; i < 57; ++i) (*fm.labels)[static_cast<std::size_t>(i)] = i % 5 - 1;
  const Matrix w = gaussian(rng, 6, 13).cast<float>().cast<double>();
  write_features((work / "x.feat").string(), fm);
  write_weights((work / "w.wcls").string(), w);
  const FeatureMatrix fm_back = read_features((work / "x.feat").string());
  const Matrix w_back = read_weights((work / "w.wcls").string());
  write_features((work / "x2.feat").string(), fm_back);
  write_weights((work / "w2.wcls").string(), w_back);
  const bool round_trip = fm_back.values == fm.values && fm_back.labels == fm.labels && w_back == w &&
                          slurp(work / "x.feat") == slurp(work / "x2.feat") &&
                          slurp(work / "w.wcls") == slurp(work / "w2.wcls");

  int rejected = 0;
  auto corrupt = [&](const fs::path& src, const std::function<void(const std::string&)>& reader) {
    std::string body = slurp(src);
    body[0] = 'X';
    const fs::path bad = work / ("bad_" + src.filename().string());
    std::ofstream(bad, std::ios::binary) << body;
    try {
      reader(bad.string());
    } catch (const Error& e) {
      if (e.code() == Errc::BadMagic) ++rejected;
    }
  };
  corrupt(work / "x.feat", [](const std::string& p) { read_features(p); });
  corrupt(work / "w.wcls", [](const std::string& p) { read_weights(p); });
  corrupt(first / "src" / "model.ckpt", [](const std::string& p) { read_checkpoint(p); });

  return {same_runs && round_trip && rejected == 3,
          fmt("repeat runs byte-identical over %zu files: %s; feature/weight round-trip bit-exact: %s; corrupt magic "
              "rejected %d/3",
              a.size(), same_runs ? "yes" : "no", round_trip ? "yes" : "no", rejected)};
}

}  // namespace

int main() {
  const fs::path work = fs::temp_directory_path() / ("lead_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(work);
  fs::create_directories(work);

  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("criterion %2d %s: %s | %s\n", id, o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "decomposition identity", decomposition_identity);
  report(2, "svd oracle equivalence", svd_oracle);
  report(3, "gradient correctness", gradient_check);
  report(4, "mixture recovery", gmm_recovery);
  report(5, "closed-form scores", closed_forms);
  PanelMeans panel;
  bool panel_ok = true;
  std::string panel_error;
  try {
    panel = run_panel();
  } catch (const std::exception& e) {
    panel_ok = false;
    panel_error = e.what();
  }
  report(6, "end-to-end synthetic OPDA", [&]() -> Outcome {
    if (!panel_ok) return {false, "fixture threw: " + panel_error};
    return end_to_end(panel);
  });
  report(7, "ablation direction", [&]() -> Outcome {
    if (!panel_ok) return {false, "fixture threw: " + panel_error};
    return ablation_direction(panel);
  });
  report(8, "runtime trend", [&] { return runtime_trend(work); });
  report(9, "inference rule", inference_rule);
  report(10, "determinism and I/O", [&] { return determinism_and_io(work); });

  std::error_code ec;
  fs::remove_all(work, ec);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
