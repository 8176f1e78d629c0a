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

#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "lead/decomposition.hpp"

namespace lead {
namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::ConfigError;
}

TEST_CASE("axis-aligned classifier rows split off the last axis") {
  Matrix w(2, 3);
  w << 1, 0, 0, 0, 1, 0;
  const SubspaceBasis b = build_spaces(w);
  REQUIRE(b.v_known.rows() == 2);
  REQUIRE(b.v_unknown.rows() == 1);
  CHECK(std::abs(b.v_unknown(0, 2)) == doctest::Approx(1.0));
  CHECK(b.v_known.col(2).cwiseAbs().maxCoeff() < 1e-12);

  Matrix rotated(2, 3);
  rotated << 1, 1, 0, 1, -1, 0;
  rotated /= std::sqrt(2.0);
  const SubspaceBasis r = build_spaces(rotated);
  CHECK(std::abs(r.v_unknown(0, 2)) == doctest::Approx(1.0));
}

TEST_CASE("build_spaces rejects degenerate classifiers") {
  Matrix dup(2, 4);
  dup << 1, 2, 3, 4, 1, 2, 3, 4;
  CHECK(code_of([&] { build_spaces(dup); }) == Errc::RankDeficient);
  CHECK(code_of([&] { build_spaces(Matrix(Matrix::Identity(3, 3))); }) == Errc::DimOrder);
}

TEST_CASE("basis rows are orthonormal and span the classifier rows") {
  const Matrix w = test::gaussian(7, 20, 4);
  const SubspaceBasis b = build_spaces(w);
  Matrix all(20, 20);
  all << b.v_known, b.v_unknown;
  CHECK((all * all.transpose() - Matrix::Identity(20, 20)).cwiseAbs().maxCoeff() < 1e-9);
  const Matrix residual = w - (w * b.v_known.transpose()) * b.v_known;
  CHECK(residual.cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("decompose on basis vectors and their mixture") {
  const Matrix w = test::gaussian(3, 8, 9);
  const SubspaceBasis b = build_spaces(w);
  const auto known = decompose(b.v_known.row(0).transpose(), b);
  CHECK(known.m_known == doctest::Approx(1.0));
  CHECK(known.m_unknown == doctest::Approx(0.0));
  const auto unknown = decompose(b.v_unknown.row(2).transpose(), b);
  CHECK(unknown.m_unknown == doctest::Approx(1.0));
  const Vector mix = (b.v_known.row(0) + b.v_unknown.row(0)).transpose() / std::sqrt(2.0);
  const auto half = decompose(mix, b);
  CHECK(half.m_known == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK(half.m_unknown == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
}

TEST_CASE("decompose normalizes its input and checks dimensions") {
  const SubspaceBasis b = build_spaces(test::gaussian(2, 5, 1));
  const Vector z = test::gaussian_vector(5, 2);
  const auto a = decompose(z, b);
  const auto scaled = decompose(Vector(37.5 * z), b);
  CHECK(a.m_unknown == doctest::Approx(scaled.m_unknown).epsilon(1e-12));
  CHECK(code_of([&] { decompose(Vector(Vector::Ones(4)), b); }) == Errc::DimMismatch);
  CHECK(code_of([&] { decompose(Vector(Vector::Zero(5)), b); }) == Errc::ZeroVector);
}

TEST_CASE("decompose_batch against a per-row projection oracle") {
  const Matrix w = test::gaussian(6, 24, 21);
  const SubspaceBasis b = build_spaces(w);
  const Matrix x = test::gaussian(100, 24, 22);
  const auto out = decompose_batch(x, b);
  REQUIRE(out.size() == 100);
  const auto mags = decompose_magnitudes(x, b);
  for (Index i = 0; i < 100; ++i) {
    const Vector z = x.row(i).transpose() / x.row(i).norm();
    double known_sq = 0.0;
    for (Index r = 0; r < b.v_known.rows(); ++r) known_sq += std::pow(z.dot(b.v_known.row(r).transpose()), 2);
    double unknown_sq = 0.0;
    for (Index r = 0; r < b.v_unknown.rows(); ++r) unknown_sq += std::pow(z.dot(b.v_unknown.row(r).transpose()), 2);
    const auto& d = out[static_cast<std::size_t>(i)];
    CHECK(d.m_known == doctest::Approx(std::sqrt(known_sq)).epsilon(1e-10));
    CHECK(d.m_unknown == doctest::Approx(std::sqrt(unknown_sq)).epsilon(1e-10));
    CHECK(std::abs(d.m_known * d.m_known + d.m_unknown * d.m_unknown - 1.0) < 1e-6);
    CHECK((d.z_known + d.z_unknown - z).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(std::abs(d.z_known.dot(d.z_unknown)) < 1e-8);
    CHECK(mags(i, 0) == doctest::Approx(d.m_known).epsilon(1e-10));
    CHECK(mags(i, 1) == doctest::Approx(d.m_unknown).epsilon(1e-10));
  }
}

TEST_CASE("decompose_batch edge cases") {
  const SubspaceBasis b = build_spaces(test::gaussian(2, 4, 5));
  CHECK(decompose_batch(Matrix(0, 4), b).empty());
  const Matrix one = test::gaussian(1, 4, 6);
  const auto single = decompose_batch(one, b);
  REQUIRE(single.size() == 1);
  CHECK(single[0].m_unknown == doctest::Approx(decompose(one.row(0).transpose(), b).m_unknown));

  Matrix bad = test::gaussian(3, 4, 7);
  bad.row(1).setZero();
  try {
    decompose_batch(bad, b);
    FAIL("expected ZeroVector");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ZeroVector);
    CHECK(e.row().value_or(-1) == 1);
  }
}

TEST_CASE("the split depends on the row space, not on the rows") {
  const Matrix w = test::gaussian(4, 12, 30);
  // orthogonal mixing from the QR of a random square matrix
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(test::gaussian(4, 4, 31));
  const Matrix mix = qr.householderQ();
  const SubspaceBasis a = build_spaces(w);
  const SubspaceBasis b = build_spaces(Matrix(mix * w));
  const Matrix x = test::gaussian(50, 12, 32);
  const auto ma = decompose_magnitudes(x, a);
  const auto mb = decompose_magnitudes(x, b);
  CHECK((ma - mb).cwiseAbs().maxCoeff() < 1e-8);
}

}  // namespace
}  // namespace lead
