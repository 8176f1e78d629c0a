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

#include "lead/errors.hpp"

namespace lead {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::NonFiniteInput: return "NonFiniteInput";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::ZeroVector: return "ZeroVector";
    case Errc::DimMismatch: return "DimMismatch";
    case Errc::RankDeficient: return "RankDeficient";
    case Errc::DimOrder: return "DimOrder";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::DegenerateUnimodal: return "DegenerateUnimodal";
    case Errc::KTooLarge: return "KTooLarge";
    case Errc::ProbRowNotNormalized: return "ProbRowNotNormalized";
    case Errc::SingleCluster: return "SingleCluster";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::EmptyNeighborSet: return "EmptyNeighborSet";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::InfeasiblePlacement: return "InfeasiblePlacement";
    case Errc::BadMagic: return "BadMagic";
    case Errc::TruncatedFile: return "TruncatedFile";
    case Errc::VersionUnsupported: return "VersionUnsupported";
    case Errc::IoError: return "IoError";
    case Errc::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

namespace {

std::string decorate(Errc code, const std::string& what,
                     std::optional<std::int64_t> row) {
  std::string msg = std::string(errc_name(code)) + ": " + what;
  if (row) msg += " (row " + std::to_string(*row) + ")";
  return msg;
}

}  // namespace

Error::Error(Errc code, const std::string& what, std::optional<std::int64_t> row)
    : std::runtime_error(decorate(code, what, row)), code_(code), row_(row) {}

}  // namespace lead
