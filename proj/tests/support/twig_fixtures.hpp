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

#ifndef KGTWIG_TESTS_SUPPORT_TWIG_FIXTURES_HPP_
#define KGTWIG_TESTS_SUPPORT_TWIG_FIXTURES_HPP_

#include <algorithm>
#include <cmath>
#include <limits>

#include "kgtwig/twig_train.hpp"

namespace kgtwig::testing {

// Smallest |pre-activation| of any leaky unit over a batch. Finite
// differences are only meaningful when this is well above the step size,
// i.e. no perturbation can cross a kink.
inline double kink_margin(const TwigModel& model, const RankBatch& batch) {
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& row : batch.features->rows) {
    ForwardTrace t;
    model.network.forward(encode(batch.config, row, model.norm), &t);
    for (std::size_t l = 0; l + 1 < t.pre.size(); ++l) {
      for (double z : t.pre[l]) margin = std::min(margin, std::abs(z));
    }
  }
  return margin;
}

}  // namespace kgtwig::testing

#endif  // KGTWIG_TESTS_SUPPORT_TWIG_FIXTURES_HPP_
