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

// Dense linear algebra substrate: row-major Eigen aliases, normalization,
// cosine distance and a full singular value decomposition.

#ifndef LEAD_LINALG_HPP
#define LEAD_LINALG_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "lead/errors.hpp"

namespace lead {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;
using Index = Eigen::Index;

inline constexpr double kZeroNormThreshold = 1e-30;
inline constexpr double kJacobiTolerance = 1e-12;
inline constexpr int kJacobiMaxSweeps = 100;

/// Full SVD a = u * diag(sigma) * vt. u is rows x rows, vt is cols x cols,
/// sigma holds min(rows, cols) values in descending order.
template <typename Scalar>
struct SvdResult {
  MatrixX<Scalar> u;
  VectorX<Scalar> sigma;
  MatrixX<Scalar> vt;
};

template <typename Derived>
void require_finite(const Eigen::DenseBase<Derived>& a, const char* what) {
  if (!a.allFinite()) throw Error(Errc::NonFiniteInput, std::string(what) + " contains NaN or Inf");
}

template <typename Derived>
VectorX<typename Derived::Scalar> l2_normalize(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const Scalar norm = v.norm();
  if (!(norm >= Scalar(kZeroNormThreshold))) {
    throw Error(Errc::ZeroVector, "cannot normalize a zero vector");
  }
  return v / norm;
}

/// Normalizes every row; a zero row raises ZeroVector carrying its index.
template <typename Scalar>
MatrixX<Scalar> l2_normalize_rows(const MatrixX<Scalar>& a) {
  MatrixX<Scalar> out(a.rows(), a.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    const Scalar norm = a.row(i).norm();
    if (!(norm >= Scalar(kZeroNormThreshold))) {
      throw Error(Errc::ZeroVector, "cannot normalize a zero row", i);
    }
    out.row(i) = a.row(i) / norm;
  }
  return out;
}

/// 1 - cos(a, b), clamped to [0, 2].
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine_distance(const Eigen::MatrixBase<DerivedA>& a,
                                          const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  if (a.size() != b.size()) throw Error(Errc::DimMismatch, "cosine_distance operands differ in size");
  const Scalar na = a.norm();
  const Scalar nb = b.norm();
  if (!(na >= Scalar(kZeroNormThreshold)) || !(nb >= Scalar(kZeroNormThreshold))) {
    throw Error(Errc::ZeroVector, "cosine_distance of a zero vector");
  }
  const Scalar cos = a.dot(b) / (na * nb);
  return std::clamp(Scalar(1) - cos, Scalar(0), Scalar(2));
}

namespace detail {

// Hestenes one-sided Jacobi: rotates column pairs of `work` (rows >= cols)
// until all are mutually orthogonal. Rotations are accumulated into `v`.
template <typename Scalar>
void one_sided_jacobi(Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& work,
                      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& v) {
  using std::abs;
  using std::sqrt;
  const Index n = work.cols();
  // The tolerance cannot be tighter than the working precision.
  const Scalar tol = std::max(Scalar(kJacobiTolerance), std::numeric_limits<Scalar>::epsilon() * Scalar(4));
  v.setIdentity(n, n);
  for (int sweep = 0; sweep < kJacobiMaxSweeps; ++sweep) {
    bool rotated = false;
    for (Index p = 0; p + 1 < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const Scalar alpha = work.col(p).squaredNorm();
        const Scalar beta = work.col(q).squaredNorm();
        const Scalar gamma = work.col(p).dot(work.col(q));
        if (gamma == Scalar(0) || abs(gamma) <= tol * sqrt(alpha * beta)) continue;
        rotated = true;
        const Scalar zeta = (beta - alpha) / (Scalar(2) * gamma);
        const Scalar t = (zeta >= Scalar(0) ? Scalar(1) : Scalar(-1)) / (abs(zeta) + sqrt(Scalar(1) + zeta * zeta));
        const Scalar c = Scalar(1) / sqrt(Scalar(1) + t * t);
        const Scalar s = c * t;
        for (Index r = 0; r < work.rows(); ++r) {
          const Scalar xp = work(r, p);
          const Scalar xq = work(r, q);
          work(r, p) = c * xp - s * xq;
          work(r, q) = s * xp + c * xq;
        }
        for (Index r = 0; r < n; ++r) {
          const Scalar xp = v(r, p);
          const Scalar xq = v(r, q);
          v(r, p) = c * xp - s * xq;
          v(r, q) = s * xp + c * xq;
        }
      }
    }
    if (!rotated) return;
  }
  throw Error(Errc::NoConvergence, "one-sided Jacobi exceeded the sweep cap");
}

// Fills the columns of `basis` flagged false in `filled` with unit vectors
// orthogonal to every filled column. Candidates are standard basis vectors,
// picked greedily by largest residual, with one re-orthogonalization pass.
template <typename Scalar>
void complete_orthonormal_basis(Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& basis,
                                std::vector<bool> filled) {
  const Index m = basis.rows();
  std::vector<Index> active;
  for (Index j = 0; j < m; ++j) {
    if (filled[static_cast<std::size_t>(j)]) active.push_back(j);
  }
  // covered(i) is the squared length of e_i projected onto the current span
  VectorX<Scalar> covered = VectorX<Scalar>::Zero(m);
  for (Index j : active) covered += basis.col(j).cwiseAbs2();

  auto project_out = [&](VectorX<Scalar>& r) {
    for (Index j : active) r -= basis.col(j).dot(r) * basis.col(j);
  };

  for (Index slot = 0; slot < m; ++slot) {
    if (filled[static_cast<std::size_t>(slot)]) continue;
    Index best = 0;
    for (Index i = 1; i < m; ++i) {
      if (covered(i) < covered(best)) best = i;
    }
    VectorX<Scalar> r = VectorX<Scalar>::Unit(m, best);
    project_out(r);
    project_out(r);
    basis.col(slot) = r / r.norm();
    covered += basis.col(slot).cwiseAbs2();
    active.push_back(slot);
    filled[static_cast<std::size_t>(slot)] = true;
  }
}

}  // namespace detail

/// Full singular value decomposition via one-sided Jacobi on the smaller
/// dimension; the missing singular vectors (null space) are completed by
/// Gram-Schmidt. Each right singular vector has its first nonzero component
/// non-negative.
template <typename Scalar>
SvdResult<Scalar> svd(const MatrixX<Scalar>& a) {
  using ColMajor = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (a.rows() == 0 || a.cols() == 0) throw Error(Errc::ShapeMismatch, "svd of an empty matrix");
  require_finite(a, "svd input");

  const bool wide = a.rows() <= a.cols();
  // work is tall: its columns are the short side of a.
  ColMajor work = wide ? ColMajor(a.transpose()) : ColMajor(a);
  ColMajor rot;
  detail::one_sided_jacobi(work, rot);

  const Index k = work.cols();
  const Index m = work.rows();
  VectorX<Scalar> norms(k);
  for (Index j = 0; j < k; ++j) norms(j) = work.col(j).norm();

  std::vector<Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) { return norms(x) > norms(y); });

  SvdResult<Scalar> out;
  out.sigma.resize(k);
  const Scalar largest = norms(order[0]);
  // Singular directions below this carry no reliable orientation.
  const Scalar cutoff = largest * std::numeric_limits<Scalar>::epsilon() * Scalar(m);

  ColMajor tall_basis = ColMajor::Zero(m, m);
  std::vector<bool> filled(static_cast<std::size_t>(m), false);
  ColMajor short_basis(k, k);
  for (Index j = 0; j < k; ++j) {
    const Index src = order[static_cast<std::size_t>(j)];
    out.sigma(j) = norms(src);
    short_basis.col(j) = rot.col(src);
    if (norms(src) > cutoff && norms(src) > Scalar(0)) {
      tall_basis.col(j) = work.col(src) / norms(src);
      filled[static_cast<std::size_t>(j)] = true;
    }
  }
  detail::complete_orthonormal_basis(tall_basis, filled);

  // Right singular vectors live in tall_basis (wide input) or short_basis.
  ColMajor right = wide ? tall_basis : short_basis;
  ColMajor left = wide ? short_basis : tall_basis;
  const Scalar sign_eps = Scalar(1e-12);
  for (Index j = 0; j < right.cols(); ++j) {
    Index first = 0;
    while (first < right.rows() && std::abs(right(first, j)) <= sign_eps) ++first;
    if (first < right.rows() && right(first, j) < Scalar(0)) {
      right.col(j) = -right.col(j);
      if (j < left.cols()) left.col(j) = -left.col(j);
    }
  }
  out.u = left;
  out.vt = right.transpose();
  return out;
}

}  // namespace lead

#endif  // LEAD_LINALG_HPP
