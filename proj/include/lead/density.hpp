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

#ifndef LEAD_DENSITY_HPP
#define LEAD_DENSITY_HPP

#include <cstdint>
#include <span>
#include <vector>

namespace lead {

/// Two-component 1-D Gaussian mixture over unknown-space magnitudes.
/// The component with the lower mean models common data.
struct MagnitudeModel {
  double mu_com = 0.0;
  double mu_pri = 1.0;
  double var_com = 1.0;
  double var_pri = 1.0;
  double weight_com = 0.5;
  double log_likelihood = 0.0;
  int iterations = 0;
  bool degenerate = false;  // produced by the unimodal fallback, not by EM

  double weight_pri() const { return 1.0 - weight_com; }
};

inline constexpr double kVarianceFloor = 1e-6;
inline constexpr double kEmTolerance = 1e-8;
inline constexpr int kEmMaxIterations = 500;
inline constexpr double kMinMeanSeparation = 1e-4;
inline constexpr std::size_t kMinMixtureSamples = 8;

/// EM fit initialized at the 25th/75th percentiles with equal weights and the
/// sample variance on both components. `seed` is reserved for random
/// restarts, which are off. When `log_likelihood_trace` is given it receives
/// the total log-likelihood evaluated at the start of every iteration.
MagnitudeModel fit_two_component(std::span<const double> samples, std::uint64_t seed = 0,
                                 std::vector<double>* log_likelihood_trace = nullptr);

/// Posterior responsibility of the high-mean component at x.
double posterior_private(const MagnitudeModel& model, double x);

}  // namespace lead

#endif  // LEAD_DENSITY_HPP
