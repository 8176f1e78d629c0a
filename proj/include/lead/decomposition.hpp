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

#ifndef LEAD_DECOMPOSITION_HPP
#define LEAD_DECOMPOSITION_HPP

#include <vector>

#include "lead/linalg.hpp"

namespace lead {

/// Orthonormal bases of the classifier's row space (source-known) and its
/// orthogonal complement (source-unknown). Rows are basis vectors.
struct SubspaceBasis {
  Matrix v_known;    // C x D
  Matrix v_unknown;  // (D - C) x D

  Index classes() const { return v_known.rows(); }
  Index dim() const { return v_known.cols(); }
};

struct DecomposedFeature {
  Vector z_known;
  Vector z_unknown;
  double m_known = 0.0;
  double m_unknown = 0.0;
};

inline constexpr double kRankTolerance = 1e-10;

/// Splits R^D into the row space of `w_cls` (C x D, C < D) and its
/// complement. Any bias term is not part of `w_cls`.
SubspaceBasis build_spaces(const Matrix& w_cls);

/// Decomposes a feature onto both subspaces. The input is normalized first.
DecomposedFeature decompose(const Vector& z, const SubspaceBasis& basis);

/// Row-wise decompose; row errors carry the row index.
std::vector<DecomposedFeature> decompose_batch(const Matrix& features, const SubspaceBasis& basis);

/// Magnitudes only, for large batches. Rows are normalized first.
/// Column 0 holds m_known, column 1 holds m_unknown.
Eigen::Matrix<double, Eigen::Dynamic, 2> decompose_magnitudes(const Matrix& features,
                                                              const SubspaceBasis& basis);

}  // namespace lead

#endif  // LEAD_DECOMPOSITION_HPP
