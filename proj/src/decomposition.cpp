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

#include "lead/decomposition.hpp"

#include <string>

namespace lead {

SubspaceBasis build_spaces(const Matrix& w_cls) {
  const Index c = w_cls.rows();
  const Index d = w_cls.cols();
  if (c == 0 || c >= d) {
    throw Error(Errc::DimOrder, "classifier must have fewer rows (" + std::to_string(c) +
                                    ") than feature dimensions (" + std::to_string(d) + ")");
  }
  const SvdResult<double> dec = svd(w_cls);
  if (dec.sigma(c - 1) < kRankTolerance * dec.sigma(0)) {
    throw Error(Errc::RankDeficient, "classifier weights are rank deficient");
  }
  SubspaceBasis basis;
  basis.v_known = dec.vt.topRows(c);
  basis.v_unknown = dec.vt.bottomRows(d - c);
  return basis;
}

DecomposedFeature decompose(const Vector& z, const SubspaceBasis& basis) {
  if (z.size() != basis.dim()) {
    throw Error(Errc::DimMismatch, "feature has dimension " + std::to_string(z.size()) +
                                       ", basis expects " + std::to_string(basis.dim()));
  }
  const Vector unit = l2_normalize(z);
  DecomposedFeature out;
  // sum_n (z . v_n) v_n over each set of basis rows
  const Vector weights_known = basis.v_known * unit;
  const Vector weights_unknown = basis.v_unknown * unit;
  out.z_known = basis.v_known.transpose() * weights_known;
  out.z_unknown = basis.v_unknown.transpose() * weights_unknown;
  out.m_known = weights_known.norm();
  out.m_unknown = weights_unknown.norm();
  return out;
}

std::vector<DecomposedFeature> decompose_batch(const Matrix& features, const SubspaceBasis& basis) {
  if (features.rows() > 0 && features.cols() != basis.dim()) {
    throw Error(Errc::DimMismatch, "feature matrix has " + std::to_string(features.cols()) +
                                       " columns, basis expects " + std::to_string(basis.dim()));
  }
  std::vector<DecomposedFeature> out;
  out.reserve(static_cast<std::size_t>(features.rows()));
  for (Index i = 0; i < features.rows(); ++i) {
    try {
      out.push_back(decompose(features.row(i).transpose(), basis));
    } catch (const Error& e) {
      throw Error(e.code(), "decompose failed", i);
    }
  }
  return out;
}

Eigen::Matrix<double, Eigen::Dynamic, 2> decompose_magnitudes(const Matrix& features,
                                                              const SubspaceBasis& basis) {
  if (features.rows() > 0 && features.cols() != basis.dim()) {
    throw Error(Errc::DimMismatch, "feature matrix column count does not match basis");
  }
  const Matrix unit = l2_normalize_rows(features);
  const Matrix known = unit * basis.v_known.transpose();
  const Matrix unknown = unit * basis.v_unknown.transpose();
  Eigen::Matrix<double, Eigen::Dynamic, 2> out(features.rows(), 2);
  out.col(0) = known.rowwise().norm();
  out.col(1) = unknown.rowwise().norm();
  return out;
}

}  // namespace lead
