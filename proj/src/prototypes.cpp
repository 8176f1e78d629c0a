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

#include "lead/prototypes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "lead/parallel.hpp"
#include "lead/random.hpp"

namespace lead {
namespace {

void check_probs(const Matrix& probs, Index k) {
  if (k < 1 || k > probs.rows()) {
    throw Error(Errc::KTooLarge, "k = " + std::to_string(k) + " outside [1, " +
                                     std::to_string(probs.rows()) + "]");
  }
  for (Index i = 0; i < probs.rows(); ++i) {
    if (std::abs(probs.row(i).sum() - 1.0) > kProbRowTolerance) {
      throw Error(Errc::ProbRowNotNormalized, "probability row does not sum to 1", i);
    }
  }
}

// Squared distances from every row of `x` to every row of `c`, expanded as
// |x|^2 - 2 x.c + |c|^2 and clamped at zero.
Matrix squared_distances(const Matrix& x, const Matrix& c) {
  const Vector xn = x.rowwise().squaredNorm();
  const Vector cn = c.rowwise().squaredNorm();
  Matrix d = -2.0 * (x * c.transpose());
  d.colwise() += xn;
  d.rowwise() += cn.transpose();
  return d.cwiseMax(0.0);
}

std::vector<int> nearest_centroid(const Matrix& features, const Matrix& centroids) {
  const Matrix d = squared_distances(features, centroids);
  std::vector<int> out(static_cast<std::size_t>(features.rows()));
  for (Index i = 0; i < d.rows(); ++i) {
    Index best = 0;
    for (Index j = 1; j < d.cols(); ++j) {
      if (d(i, j) < d(i, best)) best = j;
    }
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

double exact_inertia(const Matrix& features, const Matrix& centroids, const std::vector<int>& assign) {
  double total = 0.0;
  for (Index i = 0; i < features.rows(); ++i) {
    total += (features.row(i) - centroids.row(assign[static_cast<std::size_t>(i)])).squaredNorm();
  }
  return total;
}

Matrix seed_centroids(const Matrix& features, Index k, std::mt19937_64& rng) {
  const Index n = features.rows();
  Matrix centroids(k, features.cols());
  Index first = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(n)));
  centroids.row(0) = features.row(first);
  Vector closest = (features.rowwise() - features.row(first)).rowwise().squaredNorm();
  for (Index j = 1; j < k; ++j) {
    const double total = closest.sum();
    Index pick = 0;
    if (total <= 0.0) {
      pick = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(n)));
    } else {
      const double target = uniform_unit(rng) * total;
      double acc = 0.0;
      pick = n - 1;
      for (Index i = 0; i < n; ++i) {
        acc += closest(i);
        if (acc > target && closest(i) > 0.0) {
          pick = i;
          break;
        }
      }
    }
    centroids.row(j) = features.row(pick);
    closest = closest.cwiseMin((features.rowwise() - features.row(pick)).rowwise().squaredNorm());
  }
  return centroids;
}

}  // namespace

Matrix source_anchors(const Matrix& w_cls) { return l2_normalize_rows(w_cls); }

std::vector<std::vector<Index>> top_k_indices(const Matrix& probs, Index k) {
  check_probs(probs, k);
  std::vector<std::vector<Index>> out(static_cast<std::size_t>(probs.cols()));
  std::vector<Index> order(static_cast<std::size_t>(probs.rows()));
  for (Index c = 0; c < probs.cols(); ++c) {
    std::iota(order.begin(), order.end(), Index{0});
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](Index a, Index b) {
      if (probs(a, c) != probs(b, c)) return probs(a, c) > probs(b, c);
      return a < b;
    });
    out[static_cast<std::size_t>(c)].assign(order.begin(), order.begin() + k);
  }
  return out;
}

Matrix top_k_prototypes(const Matrix& probs, const Matrix& features, Index k) {
  if (probs.rows() != features.rows()) {
    throw Error(Errc::ShapeMismatch, "probability and feature row counts differ");
  }
  const auto sets = top_k_indices(probs, k);
  Matrix out(probs.cols(), features.cols());
  for (Index c = 0; c < probs.cols(); ++c) {
    Vector mean = Vector::Zero(features.cols());
    for (Index i : sets[static_cast<std::size_t>(c)]) mean += features.row(i).transpose();
    mean /= static_cast<double>(k);
    try {
      out.row(c) = l2_normalize(mean).transpose();
    } catch (const Error& e) {
      throw Error(e.code(), "prototype mean is zero", c);
    }
  }
  return out;
}

Vector per_class_mu(const Matrix& probs, std::span<const double> indicator, Index k) {
  if (static_cast<Index>(indicator.size()) != probs.rows()) {
    throw Error(Errc::ShapeMismatch, "indicator length differs from probability rows");
  }
  const auto sets = top_k_indices(probs, k);
  Vector mu(probs.cols());
  for (Index c = 0; c < probs.cols(); ++c) {
    double sum = 0.0;
    for (Index i : sets[static_cast<std::size_t>(c)]) sum += indicator[static_cast<std::size_t>(i)];
    mu(c) = sum / static_cast<double>(k);
  }
  return mu;
}

Index prototype_k(Index n, Index estimated_classes) {
  if (n < 1) return 0;
  const Index k = estimated_classes > 0 ? n / estimated_classes : n;
  return std::clamp<Index>(k, 1, n);
}

std::vector<Index> default_class_candidates(Index source_classes) {
  std::vector<Index> out;
  const Index lo = std::max<Index>(2, source_classes / 2);
  const Index hi = std::max<Index>(lo, 2 * source_classes);
  for (Index c = lo; c <= hi; ++c) out.push_back(c);
  return out;
}

ClusterResult kmeans(const Matrix& features, Index k, std::uint64_t seed, int max_iter,
                     std::vector<double>* inertia_trace) {
  const Index n = features.rows();
  if (k < 2 || k > n) {
    throw Error(Errc::KTooLarge, "k-means needs 2 <= k <= N, got k = " + std::to_string(k) +
                                     ", N = " + std::to_string(n));
  }
  std::mt19937_64 rng(seed);
  ClusterResult out;
  out.centroids = seed_centroids(features, k, rng);
  out.assignments = nearest_centroid(features, out.centroids);
  if (inertia_trace) inertia_trace->push_back(exact_inertia(features, out.centroids, out.assignments));

  for (int iter = 1; iter <= max_iter; ++iter) {
    out.iterations = iter;
    Matrix sums = Matrix::Zero(k, features.cols());
    std::vector<Index> counts(static_cast<std::size_t>(k), 0);
    for (Index i = 0; i < n; ++i) {
      const int a = out.assignments[static_cast<std::size_t>(i)];
      sums.row(a) += features.row(i);
      ++counts[static_cast<std::size_t>(a)];
    }
    std::vector<Index> empty;
    for (Index j = 0; j < k; ++j) {
      if (counts[static_cast<std::size_t>(j)] > 0) {
        out.centroids.row(j) = sums.row(j) / static_cast<double>(counts[static_cast<std::size_t>(j)]);
      } else {
        empty.push_back(j);
      }
    }
    if (!empty.empty()) {
      // Re-seed each empty cluster at the farthest remaining point.
      Vector spread(n);
      for (Index i = 0; i < n; ++i) {
        spread(i) = (features.row(i) - out.centroids.row(out.assignments[static_cast<std::size_t>(i)]))
                        .squaredNorm();
      }
      for (Index j : empty) {
        Index far = 0;
        for (Index i = 1; i < n; ++i) {
          if (spread(i) > spread(far)) far = i;
        }
        out.centroids.row(j) = features.row(far);
        spread(far) = -1.0;
      }
    }
    std::vector<int> next = nearest_centroid(features, out.centroids);
    const bool stable = next == out.assignments;
    out.assignments = std::move(next);
    if (inertia_trace) inertia_trace->push_back(exact_inertia(features, out.centroids, out.assignments));
    if (stable) break;
  }
  out.inertia = exact_inertia(features, out.centroids, out.assignments);
  return out;
}

double silhouette_score(const Matrix& features, std::span<const int> assignments, std::uint64_t seed,
                        Index max_points) {
  if (static_cast<Index>(assignments.size()) != features.rows()) {
    throw Error(Errc::LengthMismatch, "assignment count differs from feature rows");
  }
  std::vector<Index> rows(assignments.size());
  std::iota(rows.begin(), rows.end(), Index{0});
  if (static_cast<Index>(rows.size()) > max_points) {
    std::mt19937_64 rng(seed);
    // partial Fisher-Yates, then restore row order
    for (Index i = 0; i < max_points; ++i) {
      const Index j = i + static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(rows.size() - i)));
      std::swap(rows[i], rows[j]);
    }
    rows.resize(static_cast<std::size_t>(max_points));
    std::sort(rows.begin(), rows.end());
  }
  const Index m = static_cast<Index>(rows.size());
  int clusters = 0;
  for (Index r : rows) clusters = std::max(clusters, assignments[r] + 1);
  std::vector<Index> sizes(static_cast<std::size_t>(clusters), 0);
  for (Index r : rows) {
    if (assignments[r] < 0) throw Error(Errc::ShapeMismatch, "negative cluster id", r);
    ++sizes[static_cast<std::size_t>(assignments[r])];
  }
  const auto nonempty = std::count_if(sizes.begin(), sizes.end(), [](Index s) { return s > 0; });
  if (nonempty < 2) throw Error(Errc::SingleCluster, "silhouette needs at least two non-empty clusters");

  Matrix sub(m, features.cols());
  for (Index i = 0; i < m; ++i) sub.row(i) = features.row(rows[i]);
  const Matrix dist = squared_distances(sub, sub).cwiseSqrt();

  double total = 0.0;
  std::vector<double> sums(static_cast<std::size_t>(clusters));
  for (Index i = 0; i < m; ++i) {
    const int own = assignments[rows[i]];
    if (sizes[static_cast<std::size_t>(own)] == 1) continue;
    std::fill(sums.begin(), sums.end(), 0.0);
    for (Index j = 0; j < m; ++j) {
      if (j != i) sums[static_cast<std::size_t>(assignments[rows[j]])] += dist(i, j);
    }
    const double a = sums[static_cast<std::size_t>(own)] /
                     static_cast<double>(sizes[static_cast<std::size_t>(own)] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < clusters; ++c) {
      if (c == own || sizes[static_cast<std::size_t>(c)] == 0) continue;
      b = std::min(b, sums[static_cast<std::size_t>(c)] / static_cast<double>(sizes[static_cast<std::size_t>(c)]));
    }
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(m);
}

ClassCountEstimate estimate_class_count_detailed(const Matrix& features,
                                                 std::span<const Index> candidates,
                                                 std::uint64_t seed, int max_iter) {
  if (candidates.empty()) throw Error(Errc::ConfigError, "no class-count candidates");
  ClassCountEstimate out;
  out.candidates.assign(candidates.begin(), candidates.end());
  out.scores.assign(candidates.size(), 0.0);
  parallel_for(candidates.size(), [&](std::size_t i) {
    const Index k = candidates[i];
    const std::uint64_t run_seed = mix_seed(seed, static_cast<std::uint64_t>(k));
    const ClusterResult clusters = kmeans(features, k, run_seed, max_iter);
    out.scores[i] = silhouette_score(features, clusters.assignments, run_seed);
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (out.scores[i] > out.scores[best] ||
        (out.scores[i] == out.scores[best] && candidates[i] < candidates[best])) {
      best = i;
    }
  }
  out.best = candidates[best];
  return out;
}

Index estimate_class_count(const Matrix& features, std::span<const Index> candidates,
                           std::uint64_t seed, int max_iter) {
  return estimate_class_count_detailed(features, candidates, seed, max_iter).best;
}

}  // namespace lead
