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

#include "lead/evaluation.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace lead {

Vector softmax(const Vector& logits) {
  const Vector shifted = (logits.array() - logits.maxCoeff()).exp();
  return shifted / shifted.sum();
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    const auto row = logits.row(i);
    out.row(i) = (row.array() - row.maxCoeff()).exp();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

double normalized_entropy(const Vector& probs) {
  const Index c = probs.size();
  if (c < 2) throw Error(Errc::ShapeMismatch, "normalized entropy needs at least two classes");
  double h = 0.0;
  for (Index j = 0; j < c; ++j) {
    const double p = probs(j);
    h -= p * std::log(std::max(p, kLogFloor));
  }
  return h / std::log(static_cast<double>(c));
}

int infer(const Vector& logits, double omega) {
  if (normalized_entropy(softmax(logits)) >= omega) return kUnknown;
  Index best = 0;
  logits.maxCoeff(&best);
  return static_cast<int>(best);
}

std::vector<int> infer_rows(const Matrix& logits, double omega) {
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Index i = 0; i < logits.rows(); ++i) out[static_cast<std::size_t>(i)] = infer(logits.row(i).transpose(), omega);
  return out;
}

double h_score(double a, double b) {
  if (a + b <= 0.0) return 0.0;
  return 2.0 * a * b / (a + b);
}

EvalReport evaluate(std::span<const int> predictions, std::span<const int> truth, Index classes) {
  if (predictions.size() != truth.size()) {
    throw Error(Errc::LengthMismatch, "prediction count " + std::to_string(predictions.size()) +
                                          " differs from ground-truth count " + std::to_string(truth.size()));
  }
  EvalReport r;
  r.classes = classes;
  r.confusion = CountMatrix::Zero(classes + 1, classes + 1);
  auto slot = [&](int label, std::size_t i) -> Index {
    if (label == kUnknown) return classes;
    if (label < 0 || label >= classes) {
      throw Error(Errc::ShapeMismatch, "label " + std::to_string(label) + " outside [0, " +
                                           std::to_string(classes) + ")", static_cast<std::int64_t>(i));
    }
    return label;
  };
  std::int64_t common_hits = 0;
  std::int64_t private_hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const Index t = slot(truth[i], i);
    const Index p = slot(predictions[i], i);
    ++r.confusion(t, p);
    if (t == classes) {
      ++r.n_private;
      if (p == classes) ++private_hits;
    } else {
      ++r.n_common;
      if (p == t) ++common_hits;
    }
  }
  r.has_private = r.n_private > 0;
  r.acc_common = r.n_common > 0 ? static_cast<double>(common_hits) / static_cast<double>(r.n_common) : 0.0;
  r.acc_private = r.n_private > 0 ? static_cast<double>(private_hits) / static_cast<double>(r.n_private) : 0.0;
  r.h_score = h_score(r.acc_common, r.acc_private);
  const auto total = static_cast<double>(truth.size());
  r.overall_acc = truth.empty() ? 0.0 : static_cast<double>(common_hits + private_hits) / total;
  return r;
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json confusion = nlohmann::json::array();
  for (Index i = 0; i < report.confusion.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index j = 0; j < report.confusion.cols(); ++j) row.push_back(report.confusion(i, j));
    confusion.push_back(row);
  }
  return {
      {"classes", report.classes},
      {"has_private", report.has_private},
      {"acc_common", report.acc_common},
      {"acc_private", report.acc_private},
      {"h_score", report.h_score},
      {"overall_acc", report.overall_acc},
      {"n_common", report.n_common},
      {"n_private", report.n_private},
      {"confusion", confusion},
  };
}

std::string format_report(const EvalReport& report) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  auto line = [&](const char* name, double value) {
    os << std::left << std::setw(14) << name << std::right << std::setw(10) << value << '\n';
  };
  line("acc_common", report.acc_common);
  line("acc_private", report.acc_private);
  line(report.has_private ? "h_score" : "h_score(n/a)", report.h_score);
  line("overall_acc", report.overall_acc);
  os << std::left << std::setw(14) << "n_common" << std::right << std::setw(10) << report.n_common << '\n';
  os << std::left << std::setw(14) << "n_private" << std::right << std::setw(10) << report.n_private << '\n';
  return os.str();
}

}  // namespace lead
