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

#include "lead/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace lead {

LabelingMode parse_labeling_mode(const std::string& name) {
  if (name == "instance") return LabelingMode::Instance;
  if (name == "global") return LabelingMode::Global;
  if (name == "entropy") return LabelingMode::Entropy;
  throw Error(Errc::ConfigError, "unknown labeling mode '" + name + "'");
}

std::string to_string(LabelingMode mode) {
  switch (mode) {
    case LabelingMode::Instance: return "instance";
    case LabelingMode::Global: return "global";
    case LabelingMode::Entropy: return "entropy";
  }
  return "instance";
}

CommonScore common_score_from_distances(double d_target, double d_source) {
  CommonScore s;
  s.epsilon_t = std::clamp(1.0 - std::exp(d_target - 1.0), 0.0, 1.0);
  s.epsilon_s = std::clamp(std::exp(-d_source), 0.0, 1.0);
  s.epsilon = std::sqrt(s.epsilon_t * s.epsilon_s);
  return s;
}

CommonScore common_score(const Vector& z, const Vector& c_t, const Vector& c_s) {
  return common_score_from_distances(cosine_distance(z, c_t), cosine_distance(z, c_s));
}

double decision_boundary(double mu_c, double mu_pri, double epsilon) {
  return mu_c + epsilon * (mu_pri - mu_c);
}

double certainty(double m_unknown, double rho, double alpha) {
  const double gap = rho - m_unknown;
  return 1.0 - std::pow(1.0 + gap * gap / alpha, -(alpha + 1.0) / 2.0);
}

PseudoLabelRecord assign_with_indicator(const Vector& z, double indicator,
                                        const PrototypeSet& prototypes, const MagnitudeModel& model,
                                        double alpha, Index index) {
  const Index c = prototypes.source_anchors.rows();
  if (prototypes.target_prototypes.rows() != c || prototypes.mu_c.size() != c) {
    throw Error(Errc::ShapeMismatch, "prototype set is inconsistent");
  }
  const Vector unit = l2_normalize(z);
  PseudoLabelRecord r;
  r.index = index;
  r.epsilon_t.resize(c);
  r.epsilon_s.resize(c);
  r.epsilon.resize(c);
  for (Index j = 0; j < c; ++j) {
    const CommonScore s = common_score(unit, prototypes.target_prototypes.row(j).transpose(),
                                       prototypes.source_anchors.row(j).transpose());
    r.epsilon_t(j) = s.epsilon_t;
    r.epsilon_s(j) = s.epsilon_s;
    r.epsilon(j) = s.epsilon;
  }
  Index kappa = 0;
  for (Index j = 1; j < c; ++j) {
    if (r.epsilon(j) > r.epsilon(kappa)) kappa = j;
  }
  r.kappa = static_cast<int>(kappa);
  r.rho = decision_boundary(prototypes.mu_c(kappa), model.mu_pri, r.epsilon(kappa));
  r.m_unknown = indicator;
  r.label = indicator >= r.rho ? kUnknown : r.kappa;
  r.tau = certainty(indicator, r.rho, alpha);
  return r;
}

PseudoLabelRecord assign(const DecomposedFeature& decomposed, const PrototypeSet& prototypes,
                         const MagnitudeModel& model, double alpha, Index index) {
  return assign_with_indicator(decomposed.z_known + decomposed.z_unknown, decomposed.m_unknown,
                               prototypes, model, alpha, index);
}

int assign_global_threshold(double m_unknown, const MagnitudeModel& model, const Vector& logits) {
  if (m_unknown >= 0.5 * (model.mu_com + model.mu_pri)) return kUnknown;
  Index best = 0;
  logits.maxCoeff(&best);
  return static_cast<int>(best);
}

int assign_global_threshold(const DecomposedFeature& decomposed, const MagnitudeModel& model,
                            const Vector& logits) {
  return assign_global_threshold(decomposed.m_unknown, model, logits);
}

PseudoLabelRecord assign_entropy_indicator(const Vector& z, const Vector& logits,
                                           const PrototypeSet& prototypes,
                                           const MagnitudeModel& entropy_model, double alpha,
                                           Index index) {
  return assign_with_indicator(z, normalized_entropy(softmax(logits)), prototypes, entropy_model,
                               alpha, index);
}

MagnitudeModel fit_with_fallback(std::span<const double> samples, std::uint64_t seed) {
  try {
    return fit_two_component(samples, seed);
  } catch (const Error& e) {
    if (e.code() != Errc::DegenerateUnimodal) throw;
  }
  const auto n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : samples) var += (x - mean) * (x - mean);
  var /= n;
  MagnitudeModel m;
  m.mu_com = mean;
  m.mu_pri = std::min(1.0, mean + 3.0 * std::sqrt(var));
  m.var_com = std::max(var, kVarianceFloor);
  m.var_pri = std::max(var, kVarianceFloor);
  m.weight_com = 1.0 - 1e-6;
  m.degenerate = true;
  return m;
}

std::int64_t PseudoLabels::unknown_count() const {
  return std::count(label.begin(), label.end(), kUnknown);
}

PseudoLabels assign_batch(const Matrix& unit, const Vector& indicator, const PrototypeSet& prototypes,
                          const MagnitudeModel& model, double alpha) {
  const Index n = unit.rows();
  const Index c = prototypes.source_anchors.rows();
  if (indicator.size() != n) throw Error(Errc::LengthMismatch, "indicator length differs from feature rows");
  if (prototypes.target_prototypes.rows() != c || prototypes.mu_c.size() != c) {
    throw Error(Errc::ShapeMismatch, "prototype set is inconsistent");
  }
  // rows and prototypes are unit vectors, so the cosine is a plain dot product
  const Matrix cos_t = unit * prototypes.target_prototypes.transpose();
  const Matrix cos_s = unit * prototypes.source_anchors.transpose();

  PseudoLabels out;
  out.label.resize(static_cast<std::size_t>(n));
  out.kappa.resize(static_cast<std::size_t>(n));
  out.rho.resize(n);
  out.tau.resize(n);
  out.indicator = indicator;
  out.epsilon.resize(n, c);
  for (Index i = 0; i < n; ++i) {
    Index kappa = 0;
    for (Index j = 0; j < c; ++j) {
      const double d_t = std::clamp(1.0 - cos_t(i, j), 0.0, 2.0);
      const double d_s = std::clamp(1.0 - cos_s(i, j), 0.0, 2.0);
      out.epsilon(i, j) = common_score_from_distances(d_t, d_s).epsilon;
      if (out.epsilon(i, j) > out.epsilon(i, kappa)) kappa = j;
    }
    const double rho = decision_boundary(prototypes.mu_c(kappa), model.mu_pri, out.epsilon(i, kappa));
    const auto slot = static_cast<std::size_t>(i);
    out.kappa[slot] = static_cast<int>(kappa);
    out.rho(i) = rho;
    out.label[slot] = indicator(i) >= rho ? kUnknown : static_cast<int>(kappa);
    out.tau(i) = certainty(indicator(i), rho, alpha);
  }
  return out;
}

PseudoLabels assign_global_batch(const Vector& indicator, const Matrix& logits,
                                 const MagnitudeModel& model, double alpha) {
  const Index n = indicator.size();
  if (logits.rows() != n) throw Error(Errc::LengthMismatch, "indicator length differs from logit rows");
  const double threshold = 0.5 * (model.mu_com + model.mu_pri);
  PseudoLabels out;
  out.label.resize(static_cast<std::size_t>(n));
  out.kappa.resize(static_cast<std::size_t>(n));
  out.rho = Vector::Constant(n, threshold);
  out.tau.resize(n);
  out.indicator = indicator;
  out.epsilon = Matrix::Zero(n, logits.cols());
  for (Index i = 0; i < n; ++i) {
    Index best = 0;
    logits.row(i).maxCoeff(&best);
    const auto slot = static_cast<std::size_t>(i);
    out.kappa[slot] = static_cast<int>(best);
    out.label[slot] = indicator(i) >= threshold ? kUnknown : static_cast<int>(best);
    out.tau(i) = certainty(indicator(i), threshold, alpha);
  }
  return out;
}

void write_pseudo_labels(std::ostream& os, const PseudoLabels& labels) {
  char buf[160];
  for (Index i = 0; i < labels.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%lld\t%d\t%.9g\t%.9g\t%.9g\n", static_cast<long long>(i),
                  labels.label[static_cast<std::size_t>(i)], labels.indicator(i), labels.rho(i),
                  labels.tau(i));
    os << buf;
  }
}

}  // namespace lead
