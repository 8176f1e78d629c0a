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

// Source anchors, top-K target prototypes, per-class magnitude means, and
// K-means / silhouette estimation of the target class count.

#ifndef LEAD_PROTOTYPES_HPP
#define LEAD_PROTOTYPES_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "lead/linalg.hpp"

namespace lead {

/// Row c of each matrix belongs to class c. All rows are unit vectors.
struct PrototypeSet {
  Matrix source_anchors;     // C x D
  Matrix target_prototypes;  // C x D
  Vector mu_c;               // C, mean indicator over each class's top-K set
  Index k = 0;
};

struct ClusterResult {
  std::vector<int> assignments;
  Matrix centroids;  // k x D
  double inertia = 0.0;
  int iterations = 0;
};

inline constexpr double kProbRowTolerance = 1e-6;
inline constexpr Index kSilhouetteMaxPoints = 2000;

/// Normalized classifier rows.
Matrix source_anchors(const Matrix& w_cls);

/// For each class, the k row indices with the largest probability for that
/// class, ties to the lower row index. Result is C lists, each in rank order.
std::vector<std::vector<Index>> top_k_indices(const Matrix& probs, Index k);

/// Normalized mean of each class's top-k feature rows.
Matrix top_k_prototypes(const Matrix& probs, const Matrix& features, Index k);

/// Mean indicator (unknown-space magnitude) over each class's top-k rows.
Vector per_class_mu(const Matrix& probs, std::span<const double> indicator, Index k);

/// floor(n / estimated_classes), clamped to [1, n].
Index prototype_k(Index n, Index estimated_classes);

/// Default candidate range {max(2, C/2), ..., 2C}.
std::vector<Index> default_class_candidates(Index source_classes);

/// Lloyd's algorithm with k-means++ seeding. Empty clusters are re-seeded at
/// the point farthest from its centroid. `inertia_trace` receives the
/// inertia after each assignment step.
ClusterResult kmeans(const Matrix& features, Index k, std::uint64_t seed, int max_iter = 100,
                     std::vector<double>* inertia_trace = nullptr);

/// Mean silhouette with Euclidean distances. A point alone in its cluster
/// scores 0. Above `max_points` rows a seeded subsample is scored.
double silhouette_score(const Matrix& features, std::span<const int> assignments,
                        std::uint64_t seed = 0, Index max_points = kSilhouetteMaxPoints);

struct ClassCountEstimate {
  Index best = 0;
  std::vector<Index> candidates;
  std::vector<double> scores;
};

/// Runs K-means for every candidate and keeps the highest silhouette; ties go
/// to the smaller candidate.
ClassCountEstimate estimate_class_count_detailed(const Matrix& features,
                                                 std::span<const Index> candidates,
                                                 std::uint64_t seed, int max_iter = 100);

Index estimate_class_count(const Matrix& features, std::span<const Index> candidates,
                           std::uint64_t seed, int max_iter = 100);

}  // namespace lead

#endif  // LEAD_PROTOTYPES_HPP
