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

#include "lead/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "lead/errors.hpp"

namespace lead {
namespace {

double log_normal(double x, double mean, double var) {
  const double diff = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * var) + diff * diff / var);
}

double percentile(std::vector<double> sorted, double q) {
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

struct Component {
  double mean;
  double var;
  double weight;
};

}  // namespace

MagnitudeModel fit_two_component(std::span<const double> samples, std::uint64_t /*seed*/,
                                 std::vector<double>* log_likelihood_trace) {
  if (samples.size() < kMinMixtureSamples) {
    throw Error(Errc::TooFewSamples, "mixture fit needs at least " +
                                         std::to_string(kMinMixtureSamples) + " samples, got " +
                                         std::to_string(samples.size()));
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i])) {
      throw Error(Errc::NonFiniteInput, "mixture sample is not finite", static_cast<std::int64_t>(i));
    }
  }
  const auto n = static_cast<double>(samples.size());
  const std::vector<double> values(samples.begin(), samples.end());

  double mean = 0.0;
  for (double x : values) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : values) var += (x - mean) * (x - mean);
  var = std::max(var / n, kVarianceFloor);

  Component lo{percentile(values, 0.25), var, 0.5};
  Component hi{percentile(values, 0.75), var, 0.5};

  std::vector<double> resp_lo(values.size());
  double prev_ll = 0.0;
  double ll = 0.0;
  int iter = 0;
  for (; iter < kEmMaxIterations; ++iter) {
    // E-step
    ll = 0.0;
    const double log_w_lo = std::log(lo.weight);
    const double log_w_hi = std::log(hi.weight);
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double a = log_w_lo + log_normal(values[i], lo.mean, lo.var);
      const double b = log_w_hi + log_normal(values[i], hi.mean, hi.var);
      const double top = std::max(a, b);
      const double lse = top + std::log(std::exp(a - top) + std::exp(b - top));
      resp_lo[i] = std::exp(a - lse);
      ll += lse;
    }
    if (log_likelihood_trace) log_likelihood_trace->push_back(ll);
    if (iter > 0 && std::abs(ll - prev_ll) < kEmTolerance) break;
    prev_ll = ll;

    // M-step
    double n_lo = 0.0, sum_lo = 0.0, sum_hi = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      n_lo += resp_lo[i];
      sum_lo += resp_lo[i] * values[i];
      sum_hi += (1.0 - resp_lo[i]) * values[i];
    }
    const double n_hi = n - n_lo;
    if (n_lo <= 1e-12 || n_hi <= 1e-12) {
      throw Error(Errc::DegenerateUnimodal, "one mixture component lost all support");
    }
    lo.mean = sum_lo / n_lo;
    hi.mean = sum_hi / n_hi;
    double ss_lo = 0.0, ss_hi = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      ss_lo += resp_lo[i] * (values[i] - lo.mean) * (values[i] - lo.mean);
      ss_hi += (1.0 - resp_lo[i]) * (values[i] - hi.mean) * (values[i] - hi.mean);
    }
    lo.var = std::max(ss_lo / n_lo, kVarianceFloor);
    hi.var = std::max(ss_hi / n_hi, kVarianceFloor);
    lo.weight = n_lo / n;
    hi.weight = n_hi / n;
  }

  if (lo.mean > hi.mean) std::swap(lo, hi);
  if (hi.mean - lo.mean < kMinMeanSeparation) {
    throw Error(Errc::DegenerateUnimodal, "fitted component means coincide");
  }
  MagnitudeModel model;
  model.mu_com = lo.mean;
  model.mu_pri = hi.mean;
  model.var_com = lo.var;
  model.var_pri = hi.var;
  model.weight_com = lo.weight;
  model.log_likelihood = ll;
  model.iterations = iter;
  return model;
}

double posterior_private(const MagnitudeModel& model, double x) {
  const double a = std::log(model.weight_com) + log_normal(x, model.mu_com, model.var_com);
  const double b = std::log(model.weight_pri()) + log_normal(x, model.mu_pri, model.var_pri);
  // logistic of the log-odds, written to stay finite for large |b - a|
  const double diff = b - a;
  if (diff >= 0.0) return 1.0 / (1.0 + std::exp(-diff));
  const double e = std::exp(diff);
  return e / (1.0 + e);
}

}  // namespace lead
