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

#include "lead/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "lead/evaluation.hpp"
#include "lead/random.hpp"

namespace lead {
namespace {

Matrix gaussian_matrix(std::mt19937_64& rng, Index rows, Index cols, double stddev) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = stddev * standard_normal(rng);
  return m;
}

double safe_log(double p) { return std::log(std::max(p, kLogFloor)); }

// log(1 + e^x) without overflow
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

void check_rows(Index expected, Index got, const char* what) {
  if (expected != got) {
    throw Error(Errc::ShapeMismatch, std::string(what) + ": expected " + std::to_string(expected) +
                                         " rows, got " + std::to_string(got));
  }
}

}  // namespace

MlpExtractor MlpExtractor::random(Index input_dim, Index output_dim, std::uint64_t seed, double output_gain) {
  std::mt19937_64 rng(seed);
  const Index hidden = 2 * output_dim;
  MlpExtractor m;
  m.w1 = gaussian_matrix(rng, hidden, input_dim, std::sqrt(2.0 / static_cast<double>(input_dim)));
  m.b1 = Vector::Zero(hidden);
  m.w2 = gaussian_matrix(rng, output_dim, hidden, output_gain * std::sqrt(2.0 / static_cast<double>(hidden)));
  m.b2 = Vector::Zero(output_dim);
  return m;
}

Matrix MlpExtractor::extract(const Matrix& x) const { return forward(*this, x).features; }

SourceModel SourceModel::random(Index input_dim, Index feature_dim, Index classes, std::uint64_t seed) {
  SourceModel m;
  m.extractor = MlpExtractor::random(input_dim, feature_dim, mix_seed(seed, 1));
  std::mt19937_64 rng(mix_seed(seed, 2));
  m.classifier = gaussian_matrix(rng, classes, feature_dim, 1.0 / std::sqrt(static_cast<double>(feature_dim)));
  return m;
}

ForwardCache forward(const MlpExtractor& model, const Matrix& x) {
  if (x.cols() != model.input_dim()) {
    throw Error(Errc::ShapeMismatch, "input has " + std::to_string(x.cols()) + " columns, extractor expects " +
                                         std::to_string(model.input_dim()));
  }
  ForwardCache c;
  c.pre = x * model.w1.transpose();
  c.pre.rowwise() += model.b1.transpose();
  c.hidden = c.pre.cwiseMax(0.0);
  c.features = c.hidden * model.w2.transpose();
  c.features.rowwise() += model.b2.transpose();
  return c;
}

ExtractorGradients ExtractorGradients::zeros_like(const MlpExtractor& model) {
  return {Matrix::Zero(model.w1.rows(), model.w1.cols()), Vector::Zero(model.b1.size()),
          Matrix::Zero(model.w2.rows(), model.w2.cols()), Vector::Zero(model.b2.size())};
}

double ExtractorGradients::max_abs() const {
  return std::max({w1.cwiseAbs().maxCoeff(), b1.cwiseAbs().maxCoeff(), w2.cwiseAbs().maxCoeff(),
                   b2.cwiseAbs().maxCoeff()});
}

ExtractorGradients backprop_extractor(const MlpExtractor& model, const ForwardCache& cache,
                                      const Matrix& x, const Matrix& grad_features) {
  ExtractorGradients g;
  g.b2 = grad_features.colwise().sum().transpose();
  g.w2 = grad_features.transpose() * cache.hidden;
  Matrix grad_pre = grad_features * model.w2;
  grad_pre.array() *= (cache.pre.array() > 0.0).cast<double>();
  g.b1 = grad_pre.colwise().sum().transpose();
  g.w1 = grad_pre.transpose() * x;
  return g;
}

OptimizerState make_optimizer(const MlpExtractor& model, double learning_rate, double momentum,
                              const Matrix* classifier) {
  OptimizerState s;
  s.velocity = ExtractorGradients::zeros_like(model);
  if (classifier) s.classifier_velocity = Matrix::Zero(classifier->rows(), classifier->cols());
  s.learning_rate = learning_rate;
  s.momentum = momentum;
  return s;
}

void sgd_step(MlpExtractor& model, OptimizerState& state, const ExtractorGradients& grads) {
  auto step = [&](auto& param, auto& velocity, const auto& grad) {
    velocity = state.momentum * velocity + grad;
    param -= state.learning_rate * velocity;
  };
  step(model.w1, state.velocity.w1, grads.w1);
  step(model.b1, state.velocity.b1, grads.b1);
  step(model.w2, state.velocity.w2, grads.w2);
  step(model.b2, state.velocity.b2, grads.b2);
}

void sgd_step(Matrix& classifier, OptimizerState& state, const Matrix& grad) {
  if (state.classifier_velocity.rows() != classifier.rows() || state.classifier_velocity.cols() != classifier.cols()) {
    throw Error(Errc::ShapeMismatch, "classifier velocity buffer does not match the classifier");
  }
  state.classifier_velocity = state.momentum * state.classifier_velocity + grad;
  classifier -= state.learning_rate * state.classifier_velocity;
}

// ---------------------------------------------------------------- losses

Matrix smooth_targets(std::span<const int> labels, Index classes, double beta) {
  Matrix t = Matrix::Constant(static_cast<Index>(labels.size()), classes, beta / static_cast<double>(classes));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= classes) {
      throw Error(Errc::ShapeMismatch, "source label outside [0, C)", static_cast<std::int64_t>(i));
    }
    t(static_cast<Index>(i), labels[i]) += 1.0 - beta;
  }
  return t;
}

double soft_cross_entropy(const Matrix& probs, const Matrix& targets) {
  if (probs.rows() != targets.rows() || probs.cols() != targets.cols()) {
    throw Error(Errc::ShapeMismatch, "probability and target shapes differ");
  }
  if (probs.rows() == 0) return 0.0;
  double total = 0.0;
  for (Index i = 0; i < probs.rows(); ++i)
    for (Index c = 0; c < probs.cols(); ++c) total -= targets(i, c) * safe_log(probs(i, c));
  return total / static_cast<double>(probs.rows());
}

double smooth_ce(const Matrix& probs, std::span<const int> labels, double beta) {
  check_rows(probs.rows(), static_cast<Index>(labels.size()), "smooth_ce labels");
  return soft_cross_entropy(probs, smooth_targets(labels, probs.cols(), beta));
}

Matrix pseudo_label_targets(std::span<const int> labels, Index classes) {
  Matrix t = Matrix::Zero(static_cast<Index>(labels.size()), classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto row = static_cast<Index>(i);
    if (labels[i] == kUnknown) {
      t.row(row).setConstant(1.0 / static_cast<double>(classes));
    } else if (labels[i] >= 0 && labels[i] < classes) {
      t(row, labels[i]) = 1.0;
    } else {
      throw Error(Errc::ShapeMismatch, "pseudo-label outside [0, C)", static_cast<std::int64_t>(i));
    }
  }
  return t;
}

double loss_ce(const Matrix& probs, std::span<const int> labels, std::span<const double> tau) {
  check_rows(probs.rows(), static_cast<Index>(labels.size()), "loss_ce labels");
  check_rows(probs.rows(), static_cast<Index>(tau.size()), "loss_ce certainty");
  if (probs.rows() == 0) return 0.0;
  const Matrix targets = pseudo_label_targets(labels, probs.cols());
  double total = 0.0;
  for (Index i = 0; i < probs.rows(); ++i) {
    double row = 0.0;
    for (Index c = 0; c < probs.cols(); ++c) row -= targets(i, c) * safe_log(probs(i, c));
    total += tau[static_cast<std::size_t>(i)] * row;
  }
  return total / static_cast<double>(probs.rows());
}

double loss_ce(const Matrix& probs, std::span<const PseudoLabelRecord> records) {
  std::vector<int> labels;
  std::vector<double> tau;
  for (const auto& r : records) {
    labels.push_back(r.label);
    tau.push_back(r.tau);
  }
  return loss_ce(probs, labels, tau);
}

double loss_reg(std::span<const double> m_known, std::span<const double> m_unknown,
                std::span<const int> labels, std::span<const double> tau) {
  const std::size_t n = m_known.size();
  if (m_unknown.size() != n || labels.size() != n || tau.size() != n) {
    throw Error(Errc::ShapeMismatch, "loss_reg inputs are not aligned");
  }
  if (n == 0) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    // log p = -softplus(m_known - m_unknown), log(1 - p) = -softplus(m_unknown - m_known)
    const double diff = m_unknown[i] - m_known[i];
    const double flag = labels[i] == kUnknown ? 1.0 : 0.0;
    total += tau[i] * (flag * softplus(-diff) + (1.0 - flag) * softplus(diff));
  }
  return total / static_cast<double>(n);
}

double loss_reg(std::span<const DecomposedFeature> decomposed, std::span<const PseudoLabelRecord> records) {
  if (decomposed.size() != records.size()) throw Error(Errc::ShapeMismatch, "loss_reg inputs are not aligned");
  std::vector<double> mk, mu, tau;
  std::vector<int> labels;
  for (std::size_t i = 0; i < decomposed.size(); ++i) {
    mk.push_back(decomposed[i].m_known);
    mu.push_back(decomposed[i].m_unknown);
    labels.push_back(records[i].label);
    tau.push_back(records[i].tau);
  }
  return loss_reg(mk, mu, labels, tau);
}

NeighborSets nearest_neighbors(const Matrix& features, Index k) {
  const Index n = features.rows();
  if (n < 2) throw Error(Errc::EmptyNeighborSet, "nearest neighbors need at least two rows");
  k = std::clamp<Index>(k, 1, n - 1);
  const Matrix unit = l2_normalize_rows(features);
  NeighborSets out(static_cast<std::size_t>(n));
  constexpr Index kBlock = 512;
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index start = 0; start < n; start += kBlock) {
    const Index rows = std::min(kBlock, n - start);
    const Matrix sim = unit.middleRows(start, rows) * unit.transpose();
    for (Index r = 0; r < rows; ++r) {
      const Index i = start + r;
      std::iota(order.begin(), order.end(), Index{0});
      std::swap(order[static_cast<std::size_t>(i)], order.back());
      auto cmp = [&](Index a, Index b) {
        if (sim(r, a) != sim(r, b)) return sim(r, a) > sim(r, b);
        return a < b;
      };
      std::partial_sort(order.begin(), order.begin() + k, order.end() - 1, cmp);
      out[static_cast<std::size_t>(i)].assign(order.begin(), order.begin() + k);
    }
  }
  return out;
}

Matrix consensus_targets(const Matrix& bank_probs, const NeighborSets& neighbors) {
  Matrix t(static_cast<Index>(neighbors.size()), bank_probs.cols());
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    if (neighbors[i].empty()) {
      throw Error(Errc::EmptyNeighborSet, "instance has no neighbors", static_cast<std::int64_t>(i));
    }
    Vector mean = Vector::Zero(bank_probs.cols());
    for (Index j : neighbors[i]) mean += bank_probs.row(j).transpose();
    t.row(static_cast<Index>(i)) = mean.transpose() / static_cast<double>(neighbors[i].size());
  }
  return t;
}

double loss_con(const Matrix& probs, const Matrix& targets) { return soft_cross_entropy(probs, targets); }

double loss_con(const Matrix& probs, const NeighborSets& neighbors) {
  check_rows(probs.rows(), static_cast<Index>(neighbors.size()), "loss_con neighbor sets");
  return loss_con(probs, consensus_targets(probs, neighbors));
}

LossReport total_loss(double l_ce, double l_reg, double l_con, double lambda) {
  return {l_ce, l_reg, l_con, lambda * l_ce + l_reg + l_con, lambda};
}

// ------------------------------------------------------------ adaptation

namespace {

struct StepState {
  ForwardCache cache;
  Matrix probs;
  Vector norms;
  Matrix unit;
  Matrix z_known;    // projections onto each subspace
  Matrix z_unknown;
  Vector m_known;
  Vector m_unknown;
};

StepState step_forward(const MlpExtractor& model, const Matrix& w_cls, const SubspaceBasis& basis,
                       const Matrix& x, const BatchTargets& targets) {
  const Index n = x.rows();
  check_rows(n, static_cast<Index>(targets.labels.size()), "batch labels");
  check_rows(n, targets.tau.size(), "batch certainty");
  check_rows(n, targets.con_target.rows(), "batch consensus targets");
  if (w_cls.cols() != model.output_dim() || basis.dim() != model.output_dim()) {
    throw Error(Errc::ShapeMismatch, "classifier or basis dimension differs from extractor output");
  }
  StepState s;
  s.cache = forward(model, x);
  s.probs = softmax_rows(s.cache.features * w_cls.transpose());
  s.norms = s.cache.features.rowwise().norm();
  s.unit = s.cache.features.array().colwise() / s.norms.array();
  s.z_known = (s.unit * basis.v_known.transpose()) * basis.v_known;
  s.z_unknown = (s.unit * basis.v_unknown.transpose()) * basis.v_unknown;
  s.m_known = s.z_known.rowwise().norm();
  s.m_unknown = s.z_unknown.rowwise().norm();
  return s;
}

LossReport step_loss(const StepState& s, const BatchTargets& targets, const ObjectiveSpec& spec) {
  const std::span<const double> tau(targets.tau.data(), static_cast<std::size_t>(targets.tau.size()));
  const double l_ce = spec.losses.ce ? loss_ce(s.probs, targets.labels, tau) : 0.0;
  const double l_reg =
      spec.losses.reg ? loss_reg(std::span<const double>(s.m_known.data(), static_cast<std::size_t>(s.m_known.size())),
                                 std::span<const double>(s.m_unknown.data(), static_cast<std::size_t>(s.m_unknown.size())),
                                 targets.labels, tau)
                      : 0.0;
  const double l_con = spec.losses.con ? loss_con(s.probs, targets.con_target) : 0.0;
  return total_loss(l_ce, l_reg, l_con, spec.lambda);
}

}  // namespace

LossReport adaptation_loss(const MlpExtractor& model, const Matrix& w_cls, const SubspaceBasis& basis,
                           const Matrix& x, const BatchTargets& targets, const ObjectiveSpec& spec) {
  return step_loss(step_forward(model, w_cls, basis, x, targets), targets, spec);
}

Objective backward(const MlpExtractor& model, const Matrix& w_cls, const SubspaceBasis& basis,
                   const Matrix& x, const BatchTargets& targets, const ObjectiveSpec& spec) {
  const StepState s = step_forward(model, w_cls, basis, x, targets);
  Objective out;
  out.report = step_loss(s, targets, spec);

  const Index n = x.rows();
  const Index classes = w_cls.rows();
  if (n == 0) {
    out.grads = ExtractorGradients::zeros_like(model);
    return out;
  }
  const double inv_n = 1.0 / static_cast<double>(n);

  // dL/dlogits. Both cross-entropy terms have the form -sum t log p with
  // gradient (sum t) p - t.
  Matrix grad_logits = Matrix::Zero(n, classes);
  if (spec.losses.ce) {
    const Matrix y = pseudo_label_targets(targets.labels, classes);
    for (Index i = 0; i < n; ++i) {
      grad_logits.row(i) += spec.lambda * targets.tau(i) * (s.probs.row(i) - y.row(i));
    }
  }
  if (spec.losses.con) {
    for (Index i = 0; i < n; ++i) {
      grad_logits.row(i) += targets.con_target.row(i).sum() * s.probs.row(i) - targets.con_target.row(i);
    }
  }
  grad_logits *= inv_n;
  Matrix grad_features = grad_logits * w_cls;

  if (spec.losses.reg) {
    // d/d(m_u - m_k) of the weighted binary cross-entropy is tau (p - flag);
    // dm/dz = projection / m; dz/df = (I - z z^T) / |f|.
    for (Index i = 0; i < n; ++i) {
      const double flag = targets.labels[static_cast<std::size_t>(i)] == kUnknown ? 1.0 : 0.0;
      const double diff = s.m_unknown(i) - s.m_known(i);
      const double p = 1.0 / (1.0 + std::exp(-diff));
      const double coef = inv_n * targets.tau(i) * (p - flag);
      if (coef == 0.0) continue;
      Vector grad_unit = Vector::Zero(s.unit.cols());
      if (s.m_unknown(i) > 0.0) grad_unit += s.z_unknown.row(i).transpose() / s.m_unknown(i);
      if (s.m_known(i) > 0.0) grad_unit -= s.z_known.row(i).transpose() / s.m_known(i);
      grad_unit *= coef;
      const Vector z = s.unit.row(i).transpose();
      grad_features.row(i) += ((grad_unit - z * z.dot(grad_unit)) / s.norms(i)).transpose();
    }
  }
  out.grads = backprop_extractor(model, s.cache, x, grad_features);
  return out;
}

PretrainReport smooth_ce_pretrain(SourceModel& model, const Matrix& x, std::span<const int> labels,
                                  const PretrainConfig& config) {
  const Index n = x.rows();
  check_rows(n, static_cast<Index>(labels.size()), "pretrain labels");
  if (model.classifier.cols() != model.extractor.output_dim()) {
    throw Error(Errc::ShapeMismatch, "classifier width differs from extractor output");
  }
  const Index classes = model.classifier.rows();
  const Matrix all_targets = smooth_targets(labels, classes, config.beta);
  OptimizerState opt = make_optimizer(model.extractor, config.lr, config.momentum, &model.classifier);
  std::mt19937_64 rng(config.seed);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});

  PretrainReport report;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (Index i = n - 1; i > 0; --i) {
      std::swap(order[static_cast<std::size_t>(i)],
                order[uniform_index(rng, static_cast<std::uint64_t>(i + 1))]);
    }
    double epoch_loss = 0.0;
    for (Index start = 0; start < n; start += config.batch_size) {
      const Index b = std::min(config.batch_size, n - start);
      Matrix xb(b, x.cols());
      Matrix tb(b, classes);
      for (Index r = 0; r < b; ++r) {
        xb.row(r) = x.row(order[static_cast<std::size_t>(start + r)]);
        tb.row(r) = all_targets.row(order[static_cast<std::size_t>(start + r)]);
      }
      const ForwardCache cache = forward(model.extractor, xb);
      const Matrix probs = softmax_rows(cache.features * model.classifier.transpose());
      epoch_loss += soft_cross_entropy(probs, tb) * static_cast<double>(b);
      const Matrix grad_logits = (probs - tb) / static_cast<double>(b);
      const Matrix grad_classifier = grad_logits.transpose() * cache.features;
      const Matrix grad_features = grad_logits * model.classifier;
      const ExtractorGradients grads = backprop_extractor(model.extractor, cache, xb, grad_features);
      sgd_step(model.extractor, opt, grads);
      sgd_step(model.classifier, opt, grad_classifier);
    }
    report.epoch_loss.push_back(n > 0 ? epoch_loss / static_cast<double>(n) : 0.0);
  }
  if (n > 0) {
    const Matrix logits = model.logits(x);
    Index hits = 0;
    for (Index i = 0; i < n; ++i) {
      Index best = 0;
      logits.row(i).maxCoeff(&best);
      if (best == labels[static_cast<std::size_t>(i)]) ++hits;
    }
    report.train_accuracy = static_cast<double>(hits) / static_cast<double>(n);
  }
  return report;
}

}  // namespace lead
