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

#ifndef LEAD_EVALUATION_HPP
#define LEAD_EVALUATION_HPP

#include <cstdint>
#include <span>
#include <string>

#include "json.hpp"

#include "lead/linalg.hpp"

namespace lead {

/// Label value for "unknown" predictions and target-private ground truth.
inline constexpr int kUnknown = -1;
inline constexpr double kDefaultOmega = 0.55;
inline constexpr double kLogFloor = 1e-12;

Vector softmax(const Vector& logits);
Matrix softmax_rows(const Matrix& logits);

/// Shannon entropy of a probability vector divided by log C. The natural log
/// is used on both sides so the base cancels.
double normalized_entropy(const Vector& probs);

/// Unknown when the normalized entropy of softmax(logits) reaches omega,
/// otherwise argmax of the logits.
int infer(const Vector& logits, double omega = kDefaultOmega);

std::vector<int> infer_rows(const Matrix& logits, double omega = kDefaultOmega);

/// Harmonic mean 2ab/(a+b), 0 when a + b = 0.
double h_score(double a, double b);

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct EvalReport {
  Index classes = 0;
  bool has_private = false;  // false for partial-set targets
  double acc_common = 0.0;
  double acc_private = 0.0;
  double h_score = 0.0;
  double overall_acc = 0.0;
  std::int64_t n_common = 0;
  std::int64_t n_private = 0;
  CountMatrix confusion;  // (C+1)^2, rows = truth, cols = prediction, last index = unknown
};

/// `truth` uses kUnknown for target-private instances; predictions use
/// kUnknown for rejections. Class ids must lie in [0, classes).
EvalReport evaluate(std::span<const int> predictions, std::span<const int> truth, Index classes);

nlohmann::json to_json(const EvalReport& report);
std::string format_report(const EvalReport& report);

}  // namespace lead

#endif  // LEAD_EVALUATION_HPP
