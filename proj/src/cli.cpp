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

#include "lead/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "lead/adaptation.hpp"
#include "lead/random.hpp"
#include "lead/synthdata.hpp"

namespace lead {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

struct GlobalOptions {
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string config_path;
  std::string out_dir = ".";
  bool quiet = false;
};

class Timer {
 public:
  double lap() {
    const auto now = Clock::now();
    const double s = std::chrono::duration<double>(now - start_).count();
    start_ = now;
    return s;
  }

 private:
  Clock::time_point start_ = Clock::now();
};

// One manifest per run, written next to the outputs.
class Manifest {
 public:
  Manifest(std::string command, const GlobalOptions& g) : command_(std::move(command)), g_(g) {}

  json& config() { return config_; }
  void input(const std::string& role, const std::string& path) { inputs_[role] = path; }
  void output(const std::string& role, const std::string& path) { outputs_[role] = path; }
  void timing(const std::string& phase, double seconds) { timings_[phase] = seconds; }
  json& extra() { return extra_; }

  void write(const fs::path& dir) const {
    json j = {{"command", command_}, {"version", kToolkitVersion}, {"seed", g_.seed},
              {"config", config_},   {"inputs", inputs_},          {"outputs", outputs_},
              {"timings", timings_}};
    if (!extra_.is_null()) j["details"] = extra_;
    const fs::path path = dir / "manifest.json";
    std::ofstream os(path);
    if (!os) throw Error(Errc::IoError, "cannot write '" + path.string() + "'");
    os << j.dump(2) << "\n";
  }

 private:
  std::string command_;
  const GlobalOptions& g_;
  json config_ = json::object();
  json inputs_ = json::object();
  json outputs_ = json::object();
  json timings_ = json::object();
  json extra_;
};

fs::path prepare_out_dir(const GlobalOptions& g) {
  fs::path dir(g.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::IoError, "cannot create output directory '" + g.out_dir + "': " + ec.message());
  return dir;
}

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw Error(Errc::ConfigError, what + " is required");
  if (!fs::exists(path)) throw Error(Errc::IoError, what + " '" + path + "' does not exist");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open config '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigError, "config '" + path + "' is not valid JSON: " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw Error(Errc::IoError, "cannot write '" + path.string() + "'");
  os << text;
  if (!os) throw Error(Errc::IoError, "failed writing '" + path.string() + "'");
}

std::string format_labels(std::span<const int> labels) {
  std::string s;
  for (int v : labels) {
    s += std::to_string(v);
    s += '\n';
  }
  return s;
}

std::vector<int> read_label_list(const std::string& path) {
  {
    std::ifstream probe(path, std::ios::binary);
    char magic[8] = {};
    probe.read(magic, 8);
    if (probe.gcount() == 8 && std::string(magic, 8) == "LEADFEAT") {
      const FeatureMatrix fm = read_features(path);
      if (!fm.labels) throw Error(Errc::ShapeMismatch, "'" + path + "' has no labels");
      return *fm.labels;
    }
  }
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open '" + path + "'");
  std::vector<int> out;
  std::string line;
  std::int64_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    // first tab-separated field is the index in pseudo-label dumps
    std::istringstream fields(line);
    std::vector<std::string> parts;
    for (std::string f; std::getline(fields, f, '\t');) parts.push_back(f);
    const std::string& field = parts.size() >= 2 ? parts[1] : parts[0];
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(field, &used));
      if (used != field.size()) throw std::invalid_argument(field);
    } catch (const std::exception&) {
      throw Error(Errc::ShapeMismatch, "'" + path + "' holds a non-integer label", row);
    }
    ++row;
  }
  return out;
}

ScenarioSpec parse_split(const std::string& split, ScenarioSpec spec) {
  std::vector<Index> parts;
  std::istringstream ss(split);
  for (std::string tok; std::getline(ss, tok, '/');) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(tok, &used);
      if (used != tok.size() || v < 0) throw std::invalid_argument(tok);
      parts.push_back(static_cast<Index>(v));
    } catch (const std::exception&) {
      throw Error(Errc::ConfigError, "split '" + split + "' must be three non-negative integers a/b/c");
    }
  }
  if (parts.size() != 3) throw Error(Errc::ConfigError, "split '" + split + "' must have the form common/src/tgt");
  spec.n_common = parts[0];
  spec.n_source_private = parts[1];
  spec.n_target_private = parts[2];
  return spec;
}

ShiftSpec parse_shift(const std::string& text) {
  if (text == "none") return ShiftSpec{};
  if (text == "default") return default_shift();
  std::vector<double> v;
  std::istringstream ss(text);
  for (std::string tok; std::getline(ss, tok, ',');) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw Error(Errc::ConfigError, "shift '" + text + "' must be 'none', 'default' or rotation,translation,jitter");
    }
  }
  if (v.size() != 3) throw Error(Errc::ConfigError, "shift needs three comma-separated values");
  return ShiftSpec{v[0], v[1], v[2]};
}

void say(const GlobalOptions& g, std::ostream& out, const std::string& text) {
  if (!g.quiet) out << text;
}

std::string fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, value);
  return buf;
}

// ------------------------------------------------------------------- gen

struct GenOptions {
  std::string split = "10/10/11";
  Index dim_in = 32;
  Index per_class = 100;
  double spread = 1.0;
  std::string shift = "default";
};

int cmd_gen(const GenOptions& o, const GlobalOptions& g, std::ostream& out) {
  Timer timer;
  ScenarioSpec spec = parse_split(o.split, ScenarioSpec{});
  spec.dim_in = o.dim_in;
  spec.samples_per_class = o.per_class;
  spec.cluster_spread = o.spread;
  spec.shift = parse_shift(o.shift);
  spec.seed = g.seed;
  const Scenario sc = generate(spec);
  const double t_gen = timer.lap();

  const fs::path dir = prepare_out_dir(g);
  write_features((dir / "source.feat").string(), sc.source);
  write_features((dir / "target.feat").string(), sc.target);

  Manifest m("gen", g);
  m.config() = {{"split", o.split},
                {"kind", to_string(spec.kind())},
                {"dim_in", spec.dim_in},
                {"per_class", spec.samples_per_class},
                {"spread", spec.cluster_spread},
                {"shift",
                 {{"rotation_angle_scale", spec.shift.rotation_angle_scale},
                  {"translation_scale", spec.shift.translation_scale},
                  {"scale_jitter", spec.shift.scale_jitter}}}};
  m.output("source", (dir / "source.feat").string());
  m.output("target", (dir / "target.feat").string());
  m.timing("generate", t_gen);
  m.timing("write", timer.lap());
  m.write(dir);

  std::ostringstream msg;
  msg << to_string(spec.kind()) << " split " << spec.n_common << "/" << spec.n_source_private << "/"
      << spec.n_target_private << ": source " << sc.source.n() << " x " << sc.source.dim() << " ("
      << spec.source_classes() << " classes), target " << sc.target.n() << " x " << sc.target.dim() << " ("
      << spec.n_common + spec.n_target_private << " classes, " << spec.n_target_private * spec.samples_per_class
      << " private rows)\n";
  say(g, out, msg.str());
  return kExitOk;
}

// -------------------------------------------------------------- pretrain

struct PretrainOptions {
  std::string source;
  Index feature_dim = 64;
  int epochs = 40;
  double lr = 0.01;
  double beta = 0.1;
  Index batch_size = 64;
};

int cmd_pretrain(const PretrainOptions& o, const GlobalOptions& g, std::ostream& out) {
  require_file(o.source, "--source");
  Timer timer;
  const FeatureMatrix src = read_features(o.source);
  if (!src.labels) throw Error(Errc::ShapeMismatch, "source file '" + o.source + "' has no labels");
  int classes = 0;
  for (int l : *src.labels) {
    if (l < 0) throw Error(Errc::ShapeMismatch, "source labels must be non-negative");
    classes = std::max(classes, l + 1);
  }
  if (o.feature_dim <= classes) {
    throw Error(Errc::ConfigError, "--feature-dim must exceed the source class count " + std::to_string(classes));
  }
  const double t_load = timer.lap();

  SourceModel model = SourceModel::random(src.dim(), o.feature_dim, classes, g.seed);
  PretrainConfig cfg;
  cfg.epochs = o.epochs;
  cfg.lr = o.lr;
  cfg.beta = o.beta;
  cfg.batch_size = o.batch_size;
  cfg.seed = mix_seed(g.seed, 3);
  const PretrainReport report = smooth_ce_pretrain(model, src.values, *src.labels, cfg);
  const double t_train = timer.lap();

  const fs::path dir = prepare_out_dir(g);
  write_checkpoint((dir / "model.ckpt").string(), model);
  write_weights((dir / "classifier.wcls").string(), model.classifier);

  Manifest m("pretrain", g);
  m.config() = {{"feature_dim", o.feature_dim}, {"epochs", o.epochs}, {"lr", o.lr},
                {"beta", o.beta},               {"batch_size", o.batch_size}};
  m.input("source", o.source);
  m.output("model", (dir / "model.ckpt").string());
  m.output("classifier", (dir / "classifier.wcls").string());
  m.timing("load", t_load);
  m.timing("train", t_train);
  m.timing("write", timer.lap());
  m.extra() = {{"epoch_loss", report.epoch_loss}, {"train_accuracy", report.train_accuracy}};
  m.write(dir);

  say(g, out,
      "pretrained " + std::to_string(classes) + "-class model, final loss " +
          fmt("%.4f", report.epoch_loss.empty() ? 0.0 : report.epoch_loss.back()) + ", train accuracy " +
          fmt("%.4f", report.train_accuracy) + "\n");
  return kExitOk;
}

// ----------------------------------------------------------------- adapt

struct AdaptOptions {
  std::string model;
  std::string target;
  std::optional<int> epochs;
  std::optional<double> lr;
  std::optional<double> lambda;
  std::optional<std::string> mode;
  std::optional<std::string> preset;
  std::optional<std::string> losses;
};

AdaptConfig resolve_adapt_config(const AdaptOptions& o, const GlobalOptions& g) {
  AdaptConfig c;
  if (!g.config_path.empty()) c = adapt_config_from_json(read_json_file(g.config_path));
  if (o.preset) apply_preset(c, *o.preset);
  if (g.seed_given || g.config_path.empty()) c.seed = g.seed;
  if (o.epochs) c.epochs = *o.epochs;
  if (o.lr) c.lr = *o.lr;
  if (o.lambda) c.lambda = *o.lambda;
  if (o.mode) c = adapt_config_from_json({{"labeling_mode", *o.mode}}, c);
  if (o.losses) {
    std::vector<std::string> names;
    std::istringstream ss(*o.losses);
    for (std::string tok; std::getline(ss, tok, ',');) names.push_back(tok);
    c = adapt_config_from_json({{"losses", names}}, c);
  }
  if (c.epochs < 0 || c.lr < 0.0 || c.lambda < 0.0) {
    throw Error(Errc::ConfigError, "epochs, lr and lambda must be non-negative");
  }
  return c;
}

int cmd_adapt(const AdaptOptions& o, const GlobalOptions& g, std::ostream& out) {
  const AdaptConfig cfg = resolve_adapt_config(o, g);
  require_file(o.model, "--model");
  require_file(o.target, "--target");
  Timer timer;
  SourceModel model = read_checkpoint(o.model);
  const FeatureMatrix tgt = read_features(o.target);
  const double t_load = timer.lap();

  std::span<const int> truth;
  if (tgt.labels) truth = *tgt.labels;
  std::optional<EvalReport> before;
  if (tgt.labels) {
    before = evaluate(predict(model.extractor, model.classifier, tgt.values, cfg.omega), truth,
                      model.classifier.rows());
  }
  const AdaptResult result = adapt(model.extractor, tgt.values, model.classifier, cfg, truth);
  const double t_adapt = timer.lap();
  const std::vector<int> preds = predict(model.extractor, model.classifier, tgt.values, cfg.omega);

  const fs::path dir = prepare_out_dir(g);
  write_checkpoint((dir / "adapted.ckpt").string(), model);
  {
    std::ostringstream csv;
    write_epoch_csv(csv, result);
    write_text(dir / "epochs.csv", csv.str());
  }
  write_text(dir / "predictions.txt", format_labels(preds));

  Manifest m("adapt", g);
  m.config() = to_json(cfg);
  m.input("model", o.model);
  m.input("target", o.target);
  m.output("model", (dir / "adapted.ckpt").string());
  m.output("epochs", (dir / "epochs.csv").string());
  m.output("predictions", (dir / "predictions.txt").string());
  json details = {{"estimated_classes", result.estimated_classes}};
  std::string summary = "adapted for " + std::to_string(cfg.epochs) + " epochs, estimated classes " +
                        std::to_string(result.estimated_classes) + "\n";
  if (tgt.labels) {
    const EvalReport after = evaluate(preds, truth, model.classifier.rows());
    json report = {{"source_only", to_json(*before)}, {"adapted", to_json(after)}};
    write_text(dir / "report.json", report.dump(2) + "\n");
    m.output("report", (dir / "report.json").string());
    details["h_score_source_only"] = before->h_score;
    details["h_score_adapted"] = after.h_score;
    summary += "H-score " + fmt("%.4f", before->h_score) + " -> " + fmt("%.4f", after.h_score) + "\n";
    summary += format_report(after);
  }
  m.extra() = details;
  m.timing("load", t_load);
  m.timing("adapt", t_adapt);
  m.timing("write", timer.lap());
  m.write(dir);
  say(g, out, summary);
  return kExitOk;
}

// ----------------------------------------------------------------- label

struct LabelOptions {
  std::string mode = "instance";
  std::string model;
  std::string target;
  std::string features;
  std::string weights;
  Index estimated_classes = 0;
};

int cmd_label(const LabelOptions& o, const GlobalOptions& g, std::ostream& out) {
  LabelingOptions opts;
  try {
    opts.mode = parse_labeling_mode(o.mode);
  } catch (const Error& e) {
    throw Error(Errc::ConfigError, e.what());
  }
  if (!g.config_path.empty()) {
    const AdaptConfig c = adapt_config_from_json(read_json_file(g.config_path));
    opts.alpha = c.alpha;
    opts.candidates = c.candidate_class_counts;
    opts.kmeans_max_iter = c.kmeans_max_iter;
    opts.estimated_classes = c.estimated_classes;
  }
  if (o.estimated_classes > 0) opts.estimated_classes = o.estimated_classes;
  opts.seed = g.seed;

  Timer timer;
  Matrix features;
  Matrix w_cls;
  std::optional<std::vector<int>> truth;
  Manifest m("label", g);
  if (!o.model.empty()) {
    require_file(o.model, "--model");
    require_file(o.target, "--target");
    const SourceModel model = read_checkpoint(o.model);
    const FeatureMatrix tgt = read_features(o.target);
    features = model.extractor.extract(tgt.values);
    w_cls = model.classifier;
    truth = tgt.labels;
    m.input("model", o.model);
    m.input("target", o.target);
  } else {
    require_file(o.features, "--features (or --model with --target)");
    require_file(o.weights, "--weights");
    const FeatureMatrix fm = read_features(o.features);
    features = fm.values;
    w_cls = read_weights(o.weights);
    truth = fm.labels;
    m.input("features", o.features);
    m.input("weights", o.weights);
  }
  const double t_load = timer.lap();
  const SubspaceBasis basis = build_spaces(w_cls);
  const double t_basis = timer.lap();
  const LabelingSnapshot snap = label_features(features, w_cls, basis, opts);
  const double t_label = timer.lap();

  const fs::path dir = prepare_out_dir(g);
  {
    std::ostringstream os;
    write_pseudo_labels(os, snap.labels);
    write_text(dir / "pseudo_labels.tsv", os.str());
  }
  m.config() = {{"mode", to_string(opts.mode)}, {"alpha", opts.alpha}, {"estimated_classes", snap.estimated_classes}};
  m.output("pseudo_labels", (dir / "pseudo_labels.tsv").string());
  json details = {{"unknown", snap.labels.unknown_count()},
                  {"rows", snap.labels.size()},
                  {"mu_com", snap.model.mu_com},
                  {"mu_pri", snap.model.mu_pri},
                  {"degenerate", snap.model.degenerate}};
  std::string summary = to_string(opts.mode) + " labeling: " + std::to_string(snap.labels.unknown_count()) + " of " +
                        std::to_string(snap.labels.size()) + " rows unknown (mu_com " + fmt("%.4f", snap.model.mu_com) +
                        ", mu_pri " + fmt("%.4f", snap.model.mu_pri) + ")\n";
  if (truth) {
    const PseudoLabelQuality q = pseudo_label_quality(snap.labels.label, *truth);
    details["acc_common"] = q.acc_common;
    details["acc_private"] = q.acc_private;
    summary += "pseudo-label accuracy: common " + fmt("%.4f", q.acc_common) + ", private " +
               fmt("%.4f", q.acc_private) + "\n";
  }
  m.extra() = details;
  m.timing("load", t_load);
  m.timing("basis", t_basis);
  m.timing("label", t_label);
  m.write(dir);
  say(g, out, summary);
  return kExitOk;
}

// ------------------------------------------------------------------ eval

struct EvalOptions {
  std::string pred;
  std::string truth;
  std::string model;
  std::string target;
  Index classes = 0;
  double omega = kDefaultOmega;
};

int cmd_eval(const EvalOptions& o, const GlobalOptions& g, std::ostream& out) {
  Timer timer;
  std::vector<int> preds;
  std::vector<int> truth;
  Index classes = o.classes;
  Manifest m("eval", g);
  if (!o.model.empty()) {
    require_file(o.model, "--model");
    require_file(o.target, "--target");
    const SourceModel model = read_checkpoint(o.model);
    const FeatureMatrix tgt = read_features(o.target);
    preds = predict(model.extractor, model.classifier, tgt.values, o.omega);
    if (o.truth.empty()) {
      if (!tgt.labels) throw Error(Errc::ShapeMismatch, "target has no labels and no --truth was given");
      truth = *tgt.labels;
    }
    if (classes == 0) classes = model.classifier.rows();
    m.input("model", o.model);
    m.input("target", o.target);
  } else {
    require_file(o.pred, "--pred");
    preds = read_label_list(o.pred);
    m.input("predictions", o.pred);
  }
  if (!o.truth.empty()) {
    require_file(o.truth, "--truth");
    truth = read_label_list(o.truth);
    m.input("truth", o.truth);
  }
  if (truth.empty() && preds.empty() && o.truth.empty()) throw Error(Errc::ConfigError, "--truth is required");
  if (preds.size() != truth.size()) {
    throw Error(Errc::LengthMismatch, std::to_string(preds.size()) + " predictions but " +
                                          std::to_string(truth.size()) + " ground-truth labels");
  }
  if (classes == 0) {
    for (int v : preds) classes = std::max<Index>(classes, v + 1);
    for (int v : truth) classes = std::max<Index>(classes, v + 1);
  }
  const EvalReport report = evaluate(preds, truth, classes);
  const double t_eval = timer.lap();

  const fs::path dir = prepare_out_dir(g);
  write_text(dir / "report.json", to_json(report).dump(2) + "\n");
  m.config() = {{"classes", classes}, {"omega", o.omega}};
  m.output("report", (dir / "report.json").string());
  m.timing("evaluate", t_eval);
  m.extra() = {{"h_score", report.h_score}};
  m.write(dir);
  say(g, out, format_report(report));
  return kExitOk;
}

// ----------------------------------------------------------------- bench

struct BenchOptions {
  Index n = 4652;
  Index dim = 256;
  Index classes = 31;
  int repeats = 5;
  std::vector<Index> candidates;
  int kmeans_max_iter = 100;
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

int cmd_bench(const BenchOptions& o, const GlobalOptions& g, std::ostream& out) {
  if (o.n < 2 || o.dim < 2 || o.classes < 2 || o.repeats < 1) {
    throw Error(Errc::ConfigError, "bench needs n, dim, classes >= 2 and repeats >= 1");
  }
  if (o.classes >= o.dim) throw Error(Errc::ConfigError, "--classes must be smaller than --dim");

  // Clustered features around the classifier rows plus a block of rows
  // pushed into the null space, so both paths see realistic structure.
  std::mt19937_64 rng(g.seed);
  Matrix w(o.classes, o.dim);
  for (Index i = 0; i < w.rows(); ++i)
    for (Index j = 0; j < w.cols(); ++j) w(i, j) = standard_normal(rng);
  Matrix features(o.n, o.dim);
  for (Index i = 0; i < o.n; ++i) {
    const bool unknown = uniform_unit(rng) < 0.2;
    const auto c = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(o.classes)));
    for (Index j = 0; j < o.dim; ++j) features(i, j) = standard_normal(rng);
    if (!unknown) features.row(i) += 3.0 * w.row(c);
  }

  const std::vector<Index> candidates =
      o.candidates.empty() ? default_class_candidates(o.classes) : o.candidates;
  std::vector<double> lead_times;
  std::vector<double> cluster_times;
  for (int r = 0; r < o.repeats; ++r) {
    Timer t;
    const SubspaceBasis basis = build_spaces(w);
    const Matrix mags = decompose_magnitudes(features, basis);
    const Vector indicator = mags.col(1);
    const MagnitudeModel model =
        fit_with_fallback(std::span<const double>(indicator.data(), static_cast<std::size_t>(o.n)), g.seed);
    const Matrix unit = l2_normalize_rows(features);
    const Matrix probs = softmax_rows(features * w.transpose());
    const Index k = prototype_k(o.n, o.classes);
    PrototypeSet protos{source_anchors(w), top_k_prototypes(probs, unit, k),
                        per_class_mu(probs, std::span<const double>(indicator.data(), static_cast<std::size_t>(o.n)), k),
                        k};
    const PseudoLabels labels = assign_batch(unit, indicator, protos, model);
    lead_times.push_back(t.lap());

    const Index best = estimate_class_count(unit, candidates, g.seed, o.kmeans_max_iter);
    const ClusterResult clusters = kmeans(unit, best, mix_seed(g.seed, 7), o.kmeans_max_iter);
    cluster_times.push_back(t.lap());
    if (labels.size() != static_cast<Index>(clusters.assignments.size())) {
      throw Error(Errc::ShapeMismatch, "bench paths disagree on row count");
    }
  }
  const double lead_med = median(lead_times);
  const double cluster_med = median(cluster_times);
  const double ratio = lead_med > 0.0 ? cluster_med / lead_med : 0.0;

  const fs::path dir = prepare_out_dir(g);
  Manifest m("bench", g);
  m.config() = {{"n", o.n},
                {"dim", o.dim},
                {"classes", o.classes},
                {"repeats", o.repeats},
                {"candidates", candidates},
                {"kmeans_max_iter", o.kmeans_max_iter}};
  m.timing("lead_median", lead_med);
  m.timing("clustering_median", cluster_med);
  m.extra() = {{"lead_samples", lead_times}, {"clustering_samples", cluster_times}, {"ratio", ratio}};
  m.write(dir);

  char buf[256];
  std::string table = "path         median_s   samples\n";
  std::snprintf(buf, sizeof(buf), "lead         %-10.4f %d\n", lead_med, o.repeats);
  table += buf;
  std::snprintf(buf, sizeof(buf), "clustering   %-10.4f %d\n", cluster_med, o.repeats);
  table += buf;
  std::snprintf(buf, sizeof(buf), "ratio        %.2f\n", ratio);
  table += buf;
  say(g, out, table);
  return kExitOk;
}

}  // namespace

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::ConfigError:
      return kExitUsage;
    case Errc::BadMagic:
    case Errc::TruncatedFile:
    case Errc::VersionUnsupported:
    case Errc::IoError:
    case Errc::LengthMismatch:
    case Errc::ShapeMismatch:
    case Errc::DimMismatch:
      return kExitInput;
    default:
      return kExitNumerical;
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Source-free universal domain adaptation toolkit", "lead"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kToolkitVersion);

  GlobalOptions g;
  app.add_option("--seed", g.seed, "random seed")->each([&g](const std::string&) { g.seed_given = true; });
  app.add_option("--config", g.config_path, "run config JSON");
  app.add_option("--out", g.out_dir, "output directory");
  app.add_flag("--quiet", g.quiet, "suppress normal output");

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic scenario");
  gen_cmd->add_option("--split", gen.split, "common/source-private/target-private class counts");
  gen_cmd->add_option("--dim-in", gen.dim_in)->check(CLI::PositiveNumber);
  gen_cmd->add_option("--per-class", gen.per_class)->check(CLI::PositiveNumber);
  gen_cmd->add_option("--spread", gen.spread)->check(CLI::PositiveNumber);
  gen_cmd->add_option("--shift", gen.shift, "none, default, or rotation,translation,jitter");

  PretrainOptions pre;
  auto* pre_cmd = app.add_subcommand("pretrain", "train the source model");
  pre_cmd->add_option("--source", pre.source, "labelled source features")->required();
  pre_cmd->add_option("--feature-dim", pre.feature_dim)->check(CLI::PositiveNumber);
  pre_cmd->add_option("--epochs", pre.epochs)->check(CLI::NonNegativeNumber);
  pre_cmd->add_option("--lr", pre.lr)->check(CLI::NonNegativeNumber);
  pre_cmd->add_option("--beta", pre.beta)->check(CLI::Range(0.0, 1.0));
  pre_cmd->add_option("--batch-size", pre.batch_size)->check(CLI::PositiveNumber);

  AdaptOptions ad;
  auto* ad_cmd = app.add_subcommand("adapt", "adapt a pretrained model to target features");
  ad_cmd->add_option("--model", ad.model, "pretrained checkpoint")->required();
  ad_cmd->add_option("--target", ad.target, "target features")->required();
  ad_cmd->add_option("--epochs", ad.epochs);
  ad_cmd->add_option("--lr", ad.lr);
  ad_cmd->add_option("--lambda", ad.lambda);
  ad_cmd->add_option("--mode", ad.mode, "instance, global or entropy");
  ad_cmd->add_option("--preset", ad.preset, "office31, officehome, visda or domainnet");
  ad_cmd->add_option("--losses", ad.losses, "comma-separated subset of ce,reg,con");

  LabelOptions lb;
  auto* lb_cmd = app.add_subcommand("label", "pseudo-label target features");
  lb_cmd->add_option("--mode", lb.mode, "instance, global or entropy");
  lb_cmd->add_option("--model", lb.model, "checkpoint");
  lb_cmd->add_option("--target", lb.target, "raw target features, used with --model");
  lb_cmd->add_option("--features", lb.features, "extracted features, used with --weights");
  lb_cmd->add_option("--weights", lb.weights, "classifier weights");
  lb_cmd->add_option("--classes", lb.estimated_classes, "fix the target class count instead of estimating it");

  EvalOptions ev;
  auto* ev_cmd = app.add_subcommand("eval", "score predictions");
  ev_cmd->add_option("--pred", ev.pred, "prediction list (or pseudo-label dump)");
  ev_cmd->add_option("--truth", ev.truth, "ground truth list or labelled feature file");
  ev_cmd->add_option("--model", ev.model, "checkpoint to run inference with");
  ev_cmd->add_option("--target", ev.target, "target features for --model");
  ev_cmd->add_option("--classes", ev.classes, "class count (default: inferred)");
  ev_cmd->add_option("--omega", ev.omega, "entropy threshold");

  BenchOptions bn;
  auto* bn_cmd = app.add_subcommand("bench", "time boundary derivation against cluster-count search");
  bn_cmd->add_option("--n", bn.n);
  bn_cmd->add_option("--dim", bn.dim);
  bn_cmd->add_option("--classes", bn.classes);
  bn_cmd->add_option("--repeats", bn.repeats);
  bn_cmd->add_option("--candidates", bn.candidates, "class-count candidates")->delimiter(',');
  bn_cmd->add_option("--kmeans-max-iter", bn.kmeans_max_iter);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolkitVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "lead: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*gen_cmd) return cmd_gen(gen, g, out);
    if (*pre_cmd) return cmd_pretrain(pre, g, out);
    if (*ad_cmd) return cmd_adapt(ad, g, out);
    if (*lb_cmd) return cmd_label(lb, g, out);
    if (*ev_cmd) return cmd_eval(ev, g, out);
    if (*bn_cmd) return cmd_bench(bn, g, out);
  } catch (const Error& e) {
    err << "lead: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "lead: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}

int run_cli(int argc, char** argv) {
  return run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace lead
