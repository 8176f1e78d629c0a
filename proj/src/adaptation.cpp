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

#include "lead/adaptation.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <ostream>
#include <random>

#include "lead/binary_io.hpp"
#include "lead/random.hpp"

namespace lead {

LabelingSnapshot label_features(const Matrix& features, const Matrix& w_cls, const SubspaceBasis& basis,
                                const LabelingOptions& options) {
  const Index n = features.rows();
  const Index classes = w_cls.rows();
  if (n == 0) throw Error(Errc::ShapeMismatch, "no target features to label");
  if (features.cols() != w_cls.cols()) {
    throw Error(Errc::DimMismatch, "features have " + std::to_string(features.cols()) +
                                       " columns, classifier expects " + std::to_string(w_cls.cols()));
  }
  LabelingSnapshot s;
  s.unit = l2_normalize_rows(features);
  s.logits = features * w_cls.transpose();
  s.probs = softmax_rows(s.logits);
  if (options.mode == LabelingMode::Entropy) {
    s.indicator.resize(n);
    for (Index i = 0; i < n; ++i) s.indicator(i) = normalized_entropy(s.probs.row(i).transpose());
  } else {
    s.indicator = decompose_magnitudes(features, basis).col(1);
  }
  const std::span<const double> indicator(s.indicator.data(), static_cast<std::size_t>(n));
  s.model = fit_with_fallback(indicator, options.seed);

  if (options.mode == LabelingMode::Global) {
    s.estimated_classes = options.estimated_classes > 0 ? options.estimated_classes : classes;
    s.labels = assign_global_batch(s.indicator, s.logits, s.model, options.alpha);
    return s;
  }

  s.estimated_classes = options.estimated_classes;
  if (s.estimated_classes <= 0) {
    std::vector<Index> candidates = options.candidates;
    if (candidates.empty()) candidates = default_class_candidates(classes);
    std::erase_if(candidates, [n](Index k) { return k < 2 || k > n; });
    s.estimated_classes = candidates.empty()
                              ? classes
                              : estimate_class_count(s.unit, candidates, options.seed, options.kmeans_max_iter);
  }
  const Index k = prototype_k(n, s.estimated_classes);
  s.prototypes.source_anchors = source_anchors(w_cls);
  s.prototypes.target_prototypes = top_k_prototypes(s.probs, s.unit, k);
  s.prototypes.mu_c = per_class_mu(s.probs, indicator, k);
  s.prototypes.k = k;
  s.labels = assign_batch(s.unit, s.indicator, s.prototypes, s.model, options.alpha);
  return s;
}

PseudoLabelQuality pseudo_label_quality(std::span<const int> labels, std::span<const int> truth) {
  if (labels.size() != truth.size()) throw Error(Errc::LengthMismatch, "labels and ground truth differ in length");
  PseudoLabelQuality q;
  Index hit_common = 0;
  Index hit_private = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (truth[i] == kUnknown) {
      ++q.n_private;
      if (labels[i] == kUnknown) ++hit_private;
    } else {
      ++q.n_common;
      if (labels[i] == truth[i]) ++hit_common;
    }
  }
  if (q.n_common > 0) q.acc_common = static_cast<double>(hit_common) / static_cast<double>(q.n_common);
  if (q.n_private > 0) q.acc_private = static_cast<double>(hit_private) / static_cast<double>(q.n_private);
  return q;
}

std::vector<int> predict(const MlpExtractor& extractor, const Matrix& w_cls, const Matrix& x, double omega) {
  return infer_rows(extractor.extract(x) * w_cls.transpose(), omega);
}

AdaptResult adapt(MlpExtractor& extractor, const Matrix& target, const Matrix& w_cls, const AdaptConfig& config,
                  std::span<const int> truth) {
  const Index n = target.rows();
  const Index classes = w_cls.rows();
  if (!truth.empty() && static_cast<Index>(truth.size()) != n) {
    throw Error(Errc::LengthMismatch, "ground truth length differs from target rows");
  }
  if (config.batch_size < 1) throw Error(Errc::ConfigError, "batch_size must be positive");
  if (config.epochs < 0) throw Error(Errc::ConfigError, "epochs must be non-negative");
  if (w_cls.cols() != extractor.output_dim()) {
    throw Error(Errc::ShapeMismatch, "classifier width differs from extractor output");
  }
  const SubspaceBasis basis = build_spaces(w_cls);
  OptimizerState opt = make_optimizer(extractor, config.lr, config.momentum);
  const ObjectiveSpec spec{config.lambda, config.losses};

  LabelingOptions labeling;
  labeling.mode = config.labeling_mode;
  labeling.alpha = config.alpha;
  labeling.estimated_classes = config.estimated_classes;
  labeling.candidates = config.candidate_class_counts;
  labeling.kmeans_max_iter = config.kmeans_max_iter;

  std::mt19937_64 shuffle_rng(mix_seed(config.seed, 11));
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});

  AdaptResult result;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    labeling.seed = mix_seed(config.seed, 100 + static_cast<std::uint64_t>(epoch));
    const LabelingSnapshot snap = label_features(extractor.extract(target), w_cls, basis, labeling);
    if (labeling.estimated_classes <= 0) labeling.estimated_classes = snap.estimated_classes;
    result.estimated_classes = snap.estimated_classes;

    const Matrix con_target = config.losses.con
                                  ? consensus_targets(snap.probs, nearest_neighbors(snap.unit, config.k_neighbors))
                                  : Matrix::Zero(n, classes);

    EpochMetrics m;
    m.epoch = epoch + 1;
    m.pseudo_unknown = snap.labels.unknown_count();
    m.model = snap.model;
    if (!truth.empty()) m.pseudo = pseudo_label_quality(snap.labels.label, truth);

    for (Index i = n - 1; i > 0; --i) {
      std::swap(order[static_cast<std::size_t>(i)],
                order[uniform_index(shuffle_rng, static_cast<std::uint64_t>(i + 1))]);
    }
    double sum_ce = 0.0, sum_reg = 0.0, sum_con = 0.0;
    for (Index start = 0; start < n; start += config.batch_size) {
      const Index b = std::min(config.batch_size, n - start);
      Matrix xb(b, target.cols());
      BatchTargets bt;
      bt.labels.resize(static_cast<std::size_t>(b));
      bt.tau.resize(b);
      bt.con_target.resize(b, classes);
      for (Index r = 0; r < b; ++r) {
        const Index row = order[static_cast<std::size_t>(start + r)];
        xb.row(r) = target.row(row);
        bt.labels[static_cast<std::size_t>(r)] = snap.labels.label[static_cast<std::size_t>(row)];
        bt.tau(r) = snap.labels.tau(row);
        bt.con_target.row(r) = con_target.row(row);
      }
      const Objective obj = backward(extractor, w_cls, basis, xb, bt, spec);
      sgd_step(extractor, opt, obj.grads);
      sum_ce += obj.report.l_ce * static_cast<double>(b);
      sum_reg += obj.report.l_reg * static_cast<double>(b);
      sum_con += obj.report.l_con * static_cast<double>(b);
    }
    const double inv_n = n > 0 ? 1.0 / static_cast<double>(n) : 0.0;
    m.loss = total_loss(sum_ce * inv_n, sum_reg * inv_n, sum_con * inv_n, config.lambda);
    if (!truth.empty()) {
      m.has_eval = true;
      m.eval = evaluate(predict(extractor, w_cls, target, config.omega), truth, classes);
    }
    result.epochs.push_back(m);
  }
  return result;
}

void write_epoch_csv(std::ostream& os, const AdaptResult& result) {
  os << "epoch,l_ce,l_reg,l_con,total,pseudo_unknown,mu_com,mu_pri,pl_acc_common,pl_acc_private,"
        "acc_common,acc_private,h_score\n";
  char buf[512];
  for (const auto& m : result.epochs) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g,%.9g,%lld,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", m.epoch,
                  m.loss.l_ce, m.loss.l_reg, m.loss.l_con, m.loss.total, static_cast<long long>(m.pseudo_unknown),
                  m.model.mu_com, m.model.mu_pri, m.pseudo.acc_common, m.pseudo.acc_private, m.eval.acc_common,
                  m.eval.acc_private, m.eval.h_score);
    os << buf;
  }
}

// ---------------------------------------------------------------- config

void apply_preset(AdaptConfig& config, const std::string& name) {
  struct Preset {
    double lambda;
    double lr;
  };
  static const std::map<std::string, Preset> presets = {
      {"office31", {0.3, 1e-3}},
      {"officehome", {2.0, 1e-3}},
      {"visda", {1.0, 1e-4}},
      {"domainnet", {2.0, 1e-4}},
  };
  const auto it = presets.find(name);
  if (it == presets.end()) throw Error(Errc::ConfigError, "unknown preset '" + name + "'");
  config.lambda = it->second.lambda;
  config.lr = it->second.lr;
}

namespace {

template <typename T>
T get_as(const nlohmann::json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ConfigError, "config key '" + key + "': " + e.what());
  }
}

void require_positive(double v, const std::string& key) {
  if (!(v > 0.0)) throw Error(Errc::ConfigError, "config key '" + key + "' must be positive");
}

}  // namespace

AdaptConfig adapt_config_from_json(const nlohmann::json& j, AdaptConfig base) {
  if (!j.is_object()) throw Error(Errc::ConfigError, "run config must be a JSON object");
  AdaptConfig c = std::move(base);
  if (j.contains("preset")) apply_preset(c, get_as<std::string>(j, "preset"));
  for (const auto& [key, value] : j.items()) {
    if (key == "preset") continue;
    if (key == "seed") {
      c.seed = get_as<std::uint64_t>(j, key);
    } else if (key == "epochs") {
      c.epochs = get_as<int>(j, key);
      if (c.epochs < 0) throw Error(Errc::ConfigError, "config key 'epochs' must be non-negative");
    } else if (key == "batch_size") {
      c.batch_size = get_as<Index>(j, key);
      require_positive(static_cast<double>(c.batch_size), key);
    } else if (key == "lr") {
      c.lr = get_as<double>(j, key);
      if (c.lr < 0.0) throw Error(Errc::ConfigError, "config key 'lr' must be non-negative");
    } else if (key == "momentum") {
      c.momentum = get_as<double>(j, key);
    } else if (key == "lambda") {
      c.lambda = get_as<double>(j, key);
      if (c.lambda < 0.0) throw Error(Errc::ConfigError, "config key 'lambda' must be non-negative");
    } else if (key == "alpha") {
      c.alpha = get_as<double>(j, key);
      require_positive(c.alpha, key);
    } else if (key == "k_neighbors") {
      c.k_neighbors = get_as<Index>(j, key);
      require_positive(static_cast<double>(c.k_neighbors), key);
    } else if (key == "omega") {
      c.omega = get_as<double>(j, key);
    } else if (key == "candidate_class_counts") {
      c.candidate_class_counts = get_as<std::vector<Index>>(j, key);
    } else if (key == "labeling_mode") {
      try {
        c.labeling_mode = parse_labeling_mode(get_as<std::string>(j, key));
      } catch (const Error& e) {
        throw Error(Errc::ConfigError, e.what());
      }
    } else if (key == "losses") {
      const auto names = get_as<std::vector<std::string>>(j, key);
      c.losses = {false, false, false};
      for (const auto& name : names) {
        if (name == "ce") c.losses.ce = true;
        else if (name == "reg") c.losses.reg = true;
        else if (name == "con") c.losses.con = true;
        else throw Error(Errc::ConfigError, "unknown loss '" + name + "'");
      }
    } else if (key == "kmeans_max_iter") {
      c.kmeans_max_iter = get_as<int>(j, key);
    } else if (key == "estimated_classes") {
      c.estimated_classes = get_as<Index>(j, key);
    } else {
      throw Error(Errc::ConfigError, "unknown config key '" + key + "'");
    }
  }
  return c;
}

nlohmann::json to_json(const AdaptConfig& c) {
  std::vector<std::string> losses;
  if (c.losses.ce) losses.emplace_back("ce");
  if (c.losses.reg) losses.emplace_back("reg");
  if (c.losses.con) losses.emplace_back("con");
  return {{"seed", c.seed},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"lr", c.lr},
          {"momentum", c.momentum},
          {"lambda", c.lambda},
          {"alpha", c.alpha},
          {"k_neighbors", c.k_neighbors},
          {"omega", c.omega},
          {"candidate_class_counts", c.candidate_class_counts},
          {"labeling_mode", to_string(c.labeling_mode)},
          {"losses", losses},
          {"kmeans_max_iter", c.kmeans_max_iter},
          {"estimated_classes", c.estimated_classes}};
}

// ------------------------------------------------------------ checkpoint

namespace {

constexpr std::string_view kCheckpointMagic = "LEADCKPT";

void put_tensor(binary::Writer& w, const std::string& name, const Matrix& m, bool is_vector) {
  w.put<std::uint32_t>(static_cast<std::uint32_t>(name.size()));
  w.bytes(name);
  if (is_vector) {
    w.put<std::uint32_t>(1);
    w.put<std::uint64_t>(static_cast<std::uint64_t>(m.size()));
  } else {
    w.put<std::uint32_t>(2);
    w.put<std::uint64_t>(static_cast<std::uint64_t>(m.rows()));
    w.put<std::uint64_t>(static_cast<std::uint64_t>(m.cols()));
  }
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) w.put<double>(m(i, j));
}

}  // namespace

void write_checkpoint(const std::string& path, const SourceModel& model) {
  binary::Writer w(path);
  w.bytes(kCheckpointMagic);
  w.put<std::uint16_t>(kCheckpointVersion);
  w.put<std::uint16_t>(0);
  w.put<std::uint32_t>(5);
  put_tensor(w, "extractor.w1", model.extractor.w1, false);
  put_tensor(w, "extractor.b1", model.extractor.b1.transpose(), true);
  put_tensor(w, "extractor.w2", model.extractor.w2, false);
  put_tensor(w, "extractor.b2", model.extractor.b2.transpose(), true);
  put_tensor(w, "classifier", model.classifier, false);
  w.close();
}

SourceModel read_checkpoint(const std::string& path) {
  binary::Reader r(path);
  r.expect_magic(kCheckpointMagic);
  const auto version = r.get<std::uint16_t>();
  if (version != kCheckpointVersion) {
    throw Error(Errc::VersionUnsupported, "checkpoint version " + std::to_string(version) + " is not supported");
  }
  r.get<std::uint16_t>();
  const auto count = r.get<std::uint32_t>();
  std::map<std::string, Matrix> tensors;
  for (std::uint32_t t = 0; t < count; ++t) {
    const auto name_len = r.get<std::uint32_t>();
    r.require(name_len);
    const std::string name = r.bytes(name_len);
    const auto rank = r.get<std::uint32_t>();
    if (rank != 1 && rank != 2) throw Error(Errc::ShapeMismatch, "tensor '" + name + "' has unsupported rank");
    std::uint64_t rows = 1;
    std::uint64_t cols = r.get<std::uint64_t>();
    if (rank == 2) {
      rows = cols;
      cols = r.get<std::uint64_t>();
    }
    if (cols != 0 && rows > r.remaining() / 8 / cols) {
      throw Error(Errc::TruncatedFile, "'" + path + "' ended early in tensor '" + name + "'");
    }
    Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    for (Index i = 0; i < m.rows(); ++i)
      for (Index j = 0; j < m.cols(); ++j) m(i, j) = r.get<double>();
    tensors[name] = std::move(m);
  }
  auto take = [&](const std::string& name) -> Matrix& {
    const auto it = tensors.find(name);
    if (it == tensors.end()) throw Error(Errc::ShapeMismatch, "checkpoint lacks tensor '" + name + "'");
    return it->second;
  };
  SourceModel model;
  model.extractor.w1 = take("extractor.w1");
  model.extractor.b1 = take("extractor.b1").row(0).transpose();
  model.extractor.w2 = take("extractor.w2");
  model.extractor.b2 = take("extractor.b2").row(0).transpose();
  model.classifier = take("classifier");
  const auto& e = model.extractor;
  if (e.b1.size() != e.w1.rows() || e.w2.cols() != e.w1.rows() || e.b2.size() != e.w2.rows() ||
      model.classifier.cols() != e.w2.rows()) {
    throw Error(Errc::ShapeMismatch, "checkpoint tensors have inconsistent shapes");
  }
  require_finite(e.w1, "checkpoint extractor.w1");
  require_finite(e.w2, "checkpoint extractor.w2");
  require_finite(model.classifier, "checkpoint classifier");
  return model;
}

}  // namespace lead
