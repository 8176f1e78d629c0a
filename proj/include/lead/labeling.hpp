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

// Common scores, instance-level decision boundaries, pseudo-labels and
// certainty weights, plus the global-threshold and entropy-indicator
// variants.

#ifndef LEAD_LABELING_HPP
#define LEAD_LABELING_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lead/decomposition.hpp"
#include "lead/density.hpp"
#include "lead/evaluation.hpp"
#include "lead/prototypes.hpp"

namespace lead {

inline constexpr double kDefaultAlpha = 1e-4;

enum class LabelingMode { Instance, Global, Entropy };

LabelingMode parse_labeling_mode(const std::string& name);
std::string to_string(LabelingMode mode);

struct CommonScore {
  double epsilon_t = 0.0;  // target-prototype view
  double epsilon_s = 0.0;  // source-anchor view
  double epsilon = 0.0;    // geometric mean of the clipped views
};

/// Scores from the cosine distances to a target prototype and a source anchor.
CommonScore common_score_from_distances(double d_target, double d_source);
CommonScore common_score(const Vector& z, const Vector& c_t, const Vector& c_s);

/// mu_c + epsilon * (mu_pri - mu_c)
double decision_boundary(double mu_c, double mu_pri, double epsilon);

/// 1 - (1 + (rho - m)^2 / alpha)^(-(alpha + 1) / 2)
double certainty(double m_unknown, double rho, double alpha = kDefaultAlpha);

struct PseudoLabelRecord {
  Index index = 0;
  int label = kUnknown;
  Vector epsilon_t;
  Vector epsilon_s;
  Vector epsilon;
  int kappa = 0;
  double rho = 0.0;
  double m_unknown = 0.0;  // or the substituted indicator
  double tau = 0.0;
};

/// Rule shared by every mode: score every class against the prototypes,
/// take the boundary of the best-scoring class and compare `indicator`.
PseudoLabelRecord assign_with_indicator(const Vector& z, double indicator,
                                        const PrototypeSet& prototypes, const MagnitudeModel& model,
                                        double alpha = kDefaultAlpha, Index index = 0);

PseudoLabelRecord assign(const DecomposedFeature& decomposed, const PrototypeSet& prototypes,
                         const MagnitudeModel& model, double alpha = kDefaultAlpha, Index index = 0);

/// Ablation: one boundary (mu_com + mu_pri) / 2 for every instance, class
/// from the classifier logits.
int assign_global_threshold(double m_unknown, const MagnitudeModel& model, const Vector& logits);
int assign_global_threshold(const DecomposedFeature& decomposed, const MagnitudeModel& model,
                            const Vector& logits);

/// Ablation: normalized prediction entropy replaces the unknown-space
/// magnitude. `prototypes.mu_c` and `entropy_model` must be fitted on
/// entropies.
PseudoLabelRecord assign_entropy_indicator(const Vector& z, const Vector& logits,
                                           const PrototypeSet& prototypes,
                                           const MagnitudeModel& entropy_model,
                                           double alpha = kDefaultAlpha, Index index = 0);

/// Mixture fit that never fails on unimodal input: a degenerate fit is
/// replaced by mu_com = mean, mu_pri = min(1, mean + 3 sd).
MagnitudeModel fit_with_fallback(std::span<const double> samples, std::uint64_t seed = 0);

/// Columnar pseudo-labels for a whole target set. Only the fused common
/// score is kept per class.
struct PseudoLabels {
  std::vector<int> label;
  std::vector<int> kappa;
  Vector rho;
  Vector indicator;
  Vector tau;
  Matrix epsilon;  // N x C

  Index size() const { return static_cast<Index>(label.size()); }
  std::int64_t unknown_count() const;
};

/// Batched instance/entropy labeling. `unit` holds unit-norm rows.
PseudoLabels assign_batch(const Matrix& unit, const Vector& indicator, const PrototypeSet& prototypes,
                          const MagnitudeModel& model, double alpha = kDefaultAlpha);

/// Batched global-threshold labeling; rho is the shared midpoint.
PseudoLabels assign_global_batch(const Vector& indicator, const Matrix& logits,
                                 const MagnitudeModel& model, double alpha = kDefaultAlpha);

/// Tab-separated dump: index, label (-1 unknown), indicator, rho, tau.
void write_pseudo_labels(std::ostream& os, const PseudoLabels& labels);

}  // namespace lead

#endif  // LEAD_LABELING_HPP
