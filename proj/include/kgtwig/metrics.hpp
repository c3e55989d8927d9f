// Copyright 2026 The kgtwig Authors.
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

#ifndef KGTWIG_METRICS_HPP_
#define KGTWIG_METRICS_HPP_

#include <span>
#include <stdexcept>

namespace kgtwig {

// Coefficient of determination, 1 - SS_res / SS_tot.
inline double r_squared(std::span<const double> truth, std::span<const double> predicted) {
  if (truth.size() != predicted.size()) throw std::invalid_argument("r_squared: length mismatch");
  if (truth.empty()) throw std::invalid_argument("r_squared: empty input");
  double mean = 0.0;
  for (double t : truth) mean += t;
  mean /= static_cast<double>(truth.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ss_res += (truth[i] - predicted[i]) * (truth[i] - predicted[i]);
    ss_tot += (truth[i] - mean) * (truth[i] - mean);
  }
  if (ss_tot == 0.0) throw std::domain_error("r_squared: undefined when all true values are identical");
  return 1.0 - ss_res / ss_tot;
}

}  // namespace kgtwig

#endif  // KGTWIG_METRICS_HPP_
