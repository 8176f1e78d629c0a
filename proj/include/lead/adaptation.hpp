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

// Target-side pipeline: one labeling pass over a feature snapshot, and the
// epoch loop that alternates labeling with SGD on the extractor.

#ifndef LEAD_ADAPTATION_HPP
#define LEAD_ADAPTATION_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "lead/labeling.hpp"
#include "lead/objectives.hpp"

namespace lead {

struct LabelingOptions {
  LabelingMode mode = LabelingMode::Instance;
  double alpha = kDefaultAlpha;
  Index estimated_classes = 0;        // 0: estimate from the features
  std::vector<Index> candidates;      // empty: default range for C source classes
  std::uint64_t seed = 0;
  int kmeans_max_iter = 100;
};

struct LabelingSnapshot {
  Matrix unit;       // row-normalized features
  Matrix logits;
  Matrix probs;
  Vector indicator;  // m_unknown, or normalized entropy in Entropy mode
  MagnitudeModel model;
  PrototypeSet prototypes;
  PseudoLabels labels;
  Index estimated_classes = 0;
};

/// Pseudo-labels for `features` (N x D) under the frozen classifier.
LabelingSnapshot label_features(const Matrix& features, const Matrix& w_cls, const SubspaceBasis& basis,
                                const LabelingOptions& options);

struct PseudoLabelQuality {
  double acc_common = 0.0;   // ground-truth common rows with the right class
  double acc_private = 0.0;  // ground-truth private rows labelled unknown
  Index n_common = 0;
  Index n_private = 0;
};

PseudoLabelQuality pseudo_label_quality(std::span<const int> labels, std::span<const int> truth);

struct AdaptConfig {
  std::uint64_t seed = 0;
  int epochs = 10;
  Index batch_size = 64;
  double lr = 1e-3;
  double momentum = 0.9;
  double lambda = 1.0;
  double alpha = kDefaultAlpha;
  Index k_neighbors = kDefaultNeighbors;
  double omega = kDefaultOmega;
  std::vector<Index> candidate_class_counts;
  LabelingMode labeling_mode = LabelingMode::Instance;
  LossSwitches losses;
  int kmeans_max_iter = 100;
  Index estimated_classes = 0;
};

struct EpochMetrics {
  int epoch = 0;
  LossReport loss;  // means over the epoch's steps
  std::int64_t pseudo_unknown = 0;
  PseudoLabelQuality pseudo;  // only filled when ground truth is given
  MagnitudeModel model;
  bool has_eval = false;
  EvalReport eval;  // inference after the epoch's steps
};

struct AdaptResult {
  std::vector<EpochMetrics> epochs;
  Index estimated_classes = 0;
};

/// Adapts `extractor` in place. The class count is estimated once, on the
/// first snapshot, unless the config fixes it. `truth` is optional and only
/// feeds the metrics.
AdaptResult adapt(MlpExtractor& extractor, const Matrix& target, const Matrix& w_cls,
                  const AdaptConfig& config, std::span<const int> truth = {});

/// Entropy-rule predictions of the extractor + classifier pair.
std::vector<int> predict(const MlpExtractor& extractor, const Matrix& w_cls, const Matrix& x,
                         double omega = kDefaultOmega);

void write_epoch_csv(std::ostream& os, const AdaptResult& result);

// ---------------------------------------------------------------- config

/// Named hyper-parameter presets: "office31", "officehome", "visda",
/// "domainnet". Each sets lambda and lr.
void apply_preset(AdaptConfig& config, const std::string& name);

/// Reads the keys of the run-config object. Unknown keys and ill-typed
/// values raise ConfigError. A "preset" key is applied before the others.
AdaptConfig adapt_config_from_json(const nlohmann::json& j, AdaptConfig base = {});
nlohmann::json to_json(const AdaptConfig& config);

// ------------------------------------------------------------ checkpoint

// "LEADCKPT", u16 version, u16 reserved, u32 tensor count, then per tensor:
// u32 name length, name bytes, u32 rank, rank x u64 dims, f64 data row-major.
inline constexpr std::uint16_t kCheckpointVersion = 1;

void write_checkpoint(const std::string& path, const SourceModel& model);
SourceModel read_checkpoint(const std::string& path);

}  // namespace lead

#endif  // LEAD_ADAPTATION_HPP
