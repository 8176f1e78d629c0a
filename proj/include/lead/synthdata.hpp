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

#ifndef LEAD_SYNTHDATA_HPP
#define LEAD_SYNTHDATA_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lead/linalg.hpp"

namespace lead {

/// N x dim feature table with optional integer labels (-1 = private).
struct FeatureMatrix {
  Matrix values;
  std::optional<std::vector<int>> labels;

  Index n() const { return values.rows(); }
  Index dim() const { return values.cols(); }
};

enum class ScenarioKind { PDA, OSDA, OPDA, Closed };

std::string to_string(ScenarioKind kind);

struct ShiftSpec {
  double rotation_angle_scale = 0.0;
  double translation_scale = 0.0;
  double scale_jitter = 0.0;

  bool is_identity() const {
    return rotation_angle_scale == 0.0 && translation_scale == 0.0 && scale_jitter == 0.0;
  }
};

/// Default covariate shift used by `gen` when no override is given.
ShiftSpec default_shift();

struct ScenarioSpec {
  Index n_common = 10;
  Index n_source_private = 10;
  Index n_target_private = 11;
  Index dim_in = 32;
  Index samples_per_class = 100;
  double cluster_spread = 1.0;
  ShiftSpec shift = default_shift();
  std::uint64_t seed = 0;

  ScenarioKind kind() const;
  Index source_classes() const { return n_common + n_source_private; }
};

/// x_target = scale .* (rotation * x) + translation
struct CovariateShift {
  Matrix rotation;
  Vector translation;
  Vector scale;

  Vector apply(const Vector& x) const;
};

struct Scenario {
  FeatureMatrix source;
  FeatureMatrix target;
  Matrix source_centers;          // source classes x dim_in
  Matrix target_private_centers;  // target-private classes x dim_in
  CovariateShift shift;
};

/// Source holds the common plus source-private classes (labels 0..), the
/// target holds the common classes passed through the covariate shift plus
/// target-private clusters labelled -1.
Scenario generate(const ScenarioSpec& spec);

// Binary formats, all little-endian.
//   features: "LEADFEAT", u16 version, u16 flags (bit0 labels), u64 n, u32 dim,
//             n*dim f32 row-major, then n i32 labels when flagged
//   weights:  "LEADWCLS", u16 version, u16 reserved, u32 C, u32 D, C*D f32
inline constexpr std::uint16_t kFeatureFileVersion = 1;
inline constexpr std::uint16_t kWeightFileVersion = 1;

void write_features(const std::string& path, const FeatureMatrix& fm);
FeatureMatrix read_features(const std::string& path);
void write_weights(const std::string& path, const Matrix& w);
Matrix read_weights(const std::string& path);

/// Comma-separated import: one row per line, optional trailing label column.
FeatureMatrix read_features_csv(const std::string& path, bool last_column_is_label);

}  // namespace lead

#endif  // LEAD_SYNTHDATA_HPP
