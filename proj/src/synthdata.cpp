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

#include "lead/synthdata.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "lead/binary_io.hpp"
#include "lead/random.hpp"

namespace lead {
namespace {

constexpr int kPlacementAttempts = 1000;
constexpr double kSphereRadius = 10.0;   // in units of cluster_spread
constexpr double kMinSeparation = 4.0;   // in units of cluster_spread

enum Stream : std::uint64_t { kCenters = 1, kShift = 2, kSourceDraws = 3, kTargetDraws = 4 };

Vector gaussian_vector(std::mt19937_64& rng, Index dim) {
  Vector v(dim);
  for (Index j = 0; j < dim; ++j) v(j) = standard_normal(rng);
  return v;
}

Matrix place_centers(const ScenarioSpec& spec, Index count) {
  std::mt19937_64 rng(mix_seed(spec.seed, kCenters));
  const double radius = kSphereRadius * spec.cluster_spread;
  const double min_dist = kMinSeparation * spec.cluster_spread;
  Matrix centers(count, spec.dim_in);
  for (Index c = 0; c < count; ++c) {
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
      Vector dir = gaussian_vector(rng, spec.dim_in);
      if (dir.norm() == 0.0) continue;
      const Vector candidate = radius * dir / dir.norm();
      placed = true;
      for (Index p = 0; p < c; ++p) {
        if ((centers.row(p).transpose() - candidate).norm() < min_dist) {
          placed = false;
          break;
        }
      }
      if (placed) centers.row(c) = candidate.transpose();
    }
    if (!placed) {
      throw Error(Errc::InfeasiblePlacement,
                  "could not place " + std::to_string(count) + " separated centers in dimension " +
                      std::to_string(spec.dim_in));
    }
  }
  return centers;
}

CovariateShift make_shift(const ScenarioSpec& spec) {
  std::mt19937_64 rng(mix_seed(spec.seed, kShift));
  const Index d = spec.dim_in;
  Matrix g(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) g(i, j) = standard_normal(rng);
  // skew-symmetric generator with unit-variance entries, scaled so typical
  // rotation angles are about rotation_angle_scale radians
  const Matrix skew = (g - g.transpose()) / std::sqrt(2.0 * static_cast<double>(d));
  const Matrix half = 0.5 * spec.shift.rotation_angle_scale * skew;
  const Matrix eye = Matrix::Identity(d, d);
  CovariateShift shift;
  // Cayley transform of a skew matrix is orthogonal
  shift.rotation = (eye - half).partialPivLu().solve(eye + half);
  shift.translation.resize(d);
  shift.scale.resize(d);
  for (Index j = 0; j < d; ++j) {
    shift.translation(j) = spec.shift.translation_scale * spec.cluster_spread * standard_normal(rng);
  }
  for (Index j = 0; j < d; ++j) shift.scale(j) = std::exp(spec.shift.scale_jitter * standard_normal(rng));
  return shift;
}

void validate(const ScenarioSpec& spec) {
  if (spec.n_common < 1 || spec.n_source_private < 0 || spec.n_target_private < 0) {
    throw Error(Errc::ConfigError, "class split needs at least one common class and non-negative private counts");
  }
  if (spec.dim_in < 1 || spec.samples_per_class < 1) {
    throw Error(Errc::ConfigError, "dim_in and samples_per_class must be positive");
  }
  if (!(spec.cluster_spread > 0.0)) throw Error(Errc::ConfigError, "cluster_spread must be positive");
}

}  // namespace

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::PDA: return "PDA";
    case ScenarioKind::OSDA: return "OSDA";
    case ScenarioKind::OPDA: return "OPDA";
    case ScenarioKind::Closed: return "closed";
  }
  return "closed";
}

ShiftSpec default_shift() { return ShiftSpec{1.0, 1.0, 0.2}; }

ScenarioKind ScenarioSpec::kind() const {
  if (n_target_private == 0 && n_source_private > 0) return ScenarioKind::PDA;
  if (n_source_private == 0 && n_target_private > 0) return ScenarioKind::OSDA;
  if (n_source_private > 0 && n_target_private > 0) return ScenarioKind::OPDA;
  return ScenarioKind::Closed;
}

Vector CovariateShift::apply(const Vector& x) const {
  return scale.cwiseProduct(rotation * x) + translation;
}

Scenario generate(const ScenarioSpec& spec) {
  validate(spec);
  const Index n_src_classes = spec.source_classes();
  const Matrix centers = place_centers(spec, n_src_classes + spec.n_target_private);

  Scenario out;
  out.source_centers = centers.topRows(n_src_classes);
  out.target_private_centers = centers.bottomRows(spec.n_target_private);
  out.shift = make_shift(spec);

  const Index per = spec.samples_per_class;
  {
    std::mt19937_64 rng(mix_seed(spec.seed, kSourceDraws));
    out.source.values.resize(n_src_classes * per, spec.dim_in);
    std::vector<int> labels;
    labels.reserve(static_cast<std::size_t>(n_src_classes * per));
    for (Index c = 0; c < n_src_classes; ++c) {
      for (Index s = 0; s < per; ++s) {
        out.source.values.row(c * per + s) =
            centers.row(c) + spec.cluster_spread * gaussian_vector(rng, spec.dim_in).transpose();
        labels.push_back(static_cast<int>(c));
      }
    }
    out.source.labels = std::move(labels);
  }
  {
    std::mt19937_64 rng(mix_seed(spec.seed, kTargetDraws));
    const Index n_tgt_classes = spec.n_common + spec.n_target_private;
    out.target.values.resize(n_tgt_classes * per, spec.dim_in);
    std::vector<int> labels;
    labels.reserve(static_cast<std::size_t>(n_tgt_classes * per));
    Index row = 0;
    for (Index c = 0; c < spec.n_common; ++c) {
      for (Index s = 0; s < per; ++s, ++row) {
        const Vector x = centers.row(c).transpose() + spec.cluster_spread * gaussian_vector(rng, spec.dim_in);
        out.target.values.row(row) = out.shift.apply(x).transpose();
        labels.push_back(static_cast<int>(c));
      }
    }
    for (Index p = 0; p < spec.n_target_private; ++p) {
      for (Index s = 0; s < per; ++s, ++row) {
        out.target.values.row(row) = out.target_private_centers.row(p) +
                                     spec.cluster_spread * gaussian_vector(rng, spec.dim_in).transpose();
        labels.push_back(-1);
      }
    }
    out.target.labels = std::move(labels);
  }
  return out;
}

void write_features(const std::string& path, const FeatureMatrix& fm) {
  if (fm.labels && static_cast<Index>(fm.labels->size()) != fm.n()) {
    throw Error(Errc::ShapeMismatch, "label count differs from row count");
  }
  binary::Writer w(path);
  w.bytes("LEADFEAT");
  w.put<std::uint16_t>(kFeatureFileVersion);
  w.put<std::uint16_t>(fm.labels ? 1 : 0);
  w.put<std::uint64_t>(static_cast<std::uint64_t>(fm.n()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(fm.dim()));
  for (Index i = 0; i < fm.n(); ++i)
    for (Index j = 0; j < fm.dim(); ++j) w.put<float>(static_cast<float>(fm.values(i, j)));
  if (fm.labels) {
    for (int label : *fm.labels) w.put<std::int32_t>(label);
  }
  w.close();
}

FeatureMatrix read_features(const std::string& path) {
  binary::Reader r(path);
  r.expect_magic("LEADFEAT");
  const auto version = r.get<std::uint16_t>();
  if (version != kFeatureFileVersion) {
    throw Error(Errc::VersionUnsupported, "feature file version " + std::to_string(version));
  }
  const auto flags = r.get<std::uint16_t>();
  const auto n = r.get<std::uint64_t>();
  const auto dim = r.get<std::uint32_t>();
  const bool has_labels = (flags & 1u) != 0;
  const std::uint64_t cells = n * dim;
  r.require(cells * sizeof(float) + (has_labels ? n * sizeof(std::int32_t) : 0));

  FeatureMatrix fm;
  fm.values.resize(static_cast<Index>(n), static_cast<Index>(dim));
  for (Index i = 0; i < fm.n(); ++i)
    for (Index j = 0; j < fm.dim(); ++j) fm.values(i, j) = static_cast<double>(r.get<float>());
  require_finite(fm.values, "feature file");
  if (has_labels) {
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (auto& label : labels) label = r.get<std::int32_t>();
    fm.labels = std::move(labels);
  }
  return fm;
}

void write_weights(const std::string& path, const Matrix& w) {
  binary::Writer out(path);
  out.bytes("LEADWCLS");
  out.put<std::uint16_t>(kWeightFileVersion);
  out.put<std::uint16_t>(0);
  out.put<std::uint32_t>(static_cast<std::uint32_t>(w.rows()));
  out.put<std::uint32_t>(static_cast<std::uint32_t>(w.cols()));
  for (Index i = 0; i < w.rows(); ++i)
    for (Index j = 0; j < w.cols(); ++j) out.put<float>(static_cast<float>(w(i, j)));
  out.close();
}

Matrix read_weights(const std::string& path) {
  binary::Reader r(path);
  r.expect_magic("LEADWCLS");
  const auto version = r.get<std::uint16_t>();
  if (version != kWeightFileVersion) {
    throw Error(Errc::VersionUnsupported, "weight file version " + std::to_string(version));
  }
  (void)r.get<std::uint16_t>();
  const auto rows = r.get<std::uint32_t>();
  const auto cols = r.get<std::uint32_t>();
  r.require(static_cast<std::uint64_t>(rows) * cols * sizeof(float));
  Matrix w(rows, cols);
  for (Index i = 0; i < w.rows(); ++i)
    for (Index j = 0; j < w.cols(); ++j) w(i, j) = static_cast<double>(r.get<float>());
  require_finite(w, "weight file");
  return w;
}

FeatureMatrix read_features_csv(const std::string& path, bool last_column_is_label) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        cells.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw Error(Errc::IoError, "unparsable CSV cell '" + cell + "'", static_cast<std::int64_t>(rows.size()));
      }
    }
    if (last_column_is_label) {
      if (cells.empty()) throw Error(Errc::ShapeMismatch, "empty CSV row", static_cast<std::int64_t>(rows.size()));
      labels.push_back(static_cast<int>(cells.back()));
      cells.pop_back();
    }
    if (!rows.empty() && cells.size() != rows.front().size()) {
      throw Error(Errc::ShapeMismatch, "ragged CSV row", static_cast<std::int64_t>(rows.size()));
    }
    rows.push_back(std::move(cells));
  }
  FeatureMatrix fm;
  const Index dim = rows.empty() ? 0 : static_cast<Index>(rows.front().size());
  fm.values.resize(static_cast<Index>(rows.size()), dim);
  for (Index i = 0; i < fm.n(); ++i)
    for (Index j = 0; j < dim; ++j) fm.values(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  require_finite(fm.values, "CSV features");
  if (last_column_is_label) fm.labels = std::move(labels);
  return fm;
}

}  // namespace lead
