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

// Feature extractor, training losses with hand-written gradients, SGD with
// momentum, source pretraining and target adaptation.
//
// The classifier is linear without bias: logits = features * W^T with W of
// shape C x D. It is trained during source pretraining and frozen during
// adaptation, where only the extractor moves.

#ifndef LEAD_OBJECTIVES_HPP
#define LEAD_OBJECTIVES_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lead/decomposition.hpp"
#include "lead/density.hpp"
#include "lead/labeling.hpp"
#include "lead/linalg.hpp"

namespace lead {

inline constexpr double kDefaultOutputGain = 0.1;

/// x -> W2 * max(0, W1 x + b1) + b2
struct MlpExtractor {
  Matrix w1;  // hidden x input
  Vector b1;
  Matrix w2;  // output x hidden
  Vector b2;

  Index input_dim() const { return w1.cols(); }
  Index hidden_dim() const { return w1.rows(); }
  Index output_dim() const { return w2.rows(); }

  /// He-initialized weights, zero biases, hidden width 2 * output_dim. The
  /// output layer is additionally scaled by `output_gain`, which keeps the
  /// untrained directions of the feature space small.
  static MlpExtractor random(Index input_dim, Index output_dim, std::uint64_t seed,
                             double output_gain = kDefaultOutputGain);

  Matrix extract(const Matrix& x) const;
};

struct SourceModel {
  MlpExtractor extractor;
  Matrix classifier;  // C x D

  static SourceModel random(Index input_dim, Index feature_dim, Index classes, std::uint64_t seed);

  Matrix logits(const Matrix& x) const { return extractor.extract(x) * classifier.transpose(); }
};

struct ForwardCache {
  Matrix pre;       // N x hidden, before the ReLU
  Matrix hidden;    // N x hidden
  Matrix features;  // N x D
};

ForwardCache forward(const MlpExtractor& model, const Matrix& x);

struct ExtractorGradients {
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;

  static ExtractorGradients zeros_like(const MlpExtractor& model);
  double max_abs() const;
};

/// Chain rule from dL/dfeatures (N x D) back to the extractor parameters.
ExtractorGradients backprop_extractor(const MlpExtractor& model, const ForwardCache& cache,
                                      const Matrix& x, const Matrix& grad_features);

/// Velocity buffers for v <- momentum * v + g, theta <- theta - lr * v.
struct OptimizerState {
  ExtractorGradients velocity;
  Matrix classifier_velocity;  // empty when the classifier is frozen
  double learning_rate = 1e-3;
  double momentum = 0.9;
};

OptimizerState make_optimizer(const MlpExtractor& model, double learning_rate, double momentum = 0.9,
                              const Matrix* classifier = nullptr);
void sgd_step(MlpExtractor& model, OptimizerState& state, const ExtractorGradients& grads);
void sgd_step(Matrix& classifier, OptimizerState& state, const Matrix& grad);

// ---------------------------------------------------------------- losses

/// (1 - beta) * onehot + beta / C
Matrix smooth_targets(std::span<const int> labels, Index classes, double beta);

/// -(1/N) sum_i sum_c t_ic log p_ic with log arguments floored at 1e-12.
double soft_cross_entropy(const Matrix& probs, const Matrix& targets);

double smooth_ce(const Matrix& probs, std::span<const int> labels, double beta);

/// One-hot rows for class labels, uniform rows for kUnknown.
Matrix pseudo_label_targets(std::span<const int> labels, Index classes);

/// -(1/N) sum_i tau_i sum_c y_ic log p_ic
double loss_ce(const Matrix& probs, std::span<const int> labels, std::span<const double> tau);
double loss_ce(const Matrix& probs, std::span<const PseudoLabelRecord> records);

/// Binary cross-entropy of p = softmax(m_unknown, m_known)[0] against the
/// unknown flag of each pseudo-label, weighted by tau.
double loss_reg(std::span<const double> m_known, std::span<const double> m_unknown,
                std::span<const int> labels, std::span<const double> tau);
double loss_reg(std::span<const DecomposedFeature> decomposed, std::span<const PseudoLabelRecord> records);

using NeighborSets = std::vector<std::vector<Index>>;

inline constexpr Index kDefaultNeighbors = 4;

/// k most cosine-similar rows per row, self excluded, ties to the lower index.
/// k is clamped to N - 1.
NeighborSets nearest_neighbors(const Matrix& features, Index k = kDefaultNeighbors);

/// Row i = mean of bank_probs over i's neighbors.
Matrix consensus_targets(const Matrix& bank_probs, const NeighborSets& neighbors);

double loss_con(const Matrix& probs, const Matrix& targets);
double loss_con(const Matrix& probs, const NeighborSets& neighbors);

struct LossReport {
  double l_ce = 0.0;
  double l_reg = 0.0;
  double l_con = 0.0;
  double total = 0.0;
  double lambda = 1.0;
};

/// total = lambda * l_ce + l_reg + l_con
LossReport total_loss(double l_ce, double l_reg, double l_con, double lambda);

// ------------------------------------------------------------ adaptation

struct LossSwitches {
  bool ce = true;
  bool reg = true;
  bool con = true;
};

/// Per-row constants of one step. Labels, certainty and consensus targets are
/// fixed inputs; no gradient flows into them.
struct BatchTargets {
  std::vector<int> labels;
  Vector tau;
  Matrix con_target;  // N x C
};

struct ObjectiveSpec {
  double lambda = 1.0;
  LossSwitches losses;
};

struct Objective {
  LossReport report;
  ExtractorGradients grads;
};

/// Disabled terms contribute zero to both the report and the gradient.
LossReport adaptation_loss(const MlpExtractor& model, const Matrix& w_cls, const SubspaceBasis& basis,
                           const Matrix& x, const BatchTargets& targets, const ObjectiveSpec& spec);

/// Loss and exact gradient with respect to the extractor parameters.
Objective backward(const MlpExtractor& model, const Matrix& w_cls, const SubspaceBasis& basis,
                   const Matrix& x, const BatchTargets& targets, const ObjectiveSpec& spec);

struct PretrainConfig {
  int epochs = 40;
  double lr = 0.01;
  double momentum = 0.9;
  Index batch_size = 64;
  double beta = 0.1;
  std::uint64_t seed = 0;
};

struct PretrainReport {
  std::vector<double> epoch_loss;
  double train_accuracy = 0.0;
};

/// Trains extractor and classifier on labelled source data with
/// label-smoothed cross-entropy.
PretrainReport smooth_ce_pretrain(SourceModel& model, const Matrix& x, std::span<const int> labels,
                                  const PretrainConfig& config);

}  // namespace lead

#endif  // LEAD_OBJECTIVES_HPP
