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

#ifndef LEAD_ERRORS_HPP
#define LEAD_ERRORS_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace lead {

enum class Errc {
  NonFiniteInput,
  NoConvergence,
  ZeroVector,
  DimMismatch,
  RankDeficient,
  DimOrder,
  TooFewSamples,
  DegenerateUnimodal,
  KTooLarge,
  ProbRowNotNormalized,
  SingleCluster,
  ShapeMismatch,
  EmptyNeighborSet,
  LengthMismatch,
  InfeasiblePlacement,
  BadMagic,
  TruncatedFile,
  VersionUnsupported,
  IoError,
  ConfigError,
};

const char* errc_name(Errc code) noexcept;

/// Every failure raised by the toolkit. Carries a stable code and, for
/// batch operations, the offending row.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what,
        std::optional<std::int64_t> row = std::nullopt);

  Errc code() const noexcept { return code_; }
  std::optional<std::int64_t> row() const noexcept { return row_; }

 private:
  Errc code_;
  std::optional<std::int64_t> row_;
};

}  // namespace lead

#endif  // LEAD_ERRORS_HPP
