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

// KGE training losses over (positive, k negatives) score groups, with
// analytic gradients with respect to every score.

#ifndef KGTWIG_KGE_LOSS_HPP_
#define KGTWIG_KGE_LOSS_HPP_

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "kgtwig/hyperparams.hpp"

namespace kgtwig {

namespace detail {

// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace detail

struct LossResult {
  double value = 0.0;
  std::vector<double> d_positive;  // dL / d f(pos_i)
  std::vector<double> d_negative;  // dL / d f(neg_ij), row-major by positive
};

// `negative` holds k scores per positive, grouped by positive. Reductions:
// margin ranking averages over the n*k pairs, BCE over all n*(1+k) scores,
// cross entropy over the n positives.
inline LossResult compute_loss(LossKind kind, std::span<const double> positive,
                               std::span<const double> negative, std::optional<double> margin = {}) {
  const std::size_t n = positive.size();
  if (n == 0) throw std::invalid_argument("compute_loss: no positives");
  if (negative.size() % n != 0 || negative.empty()) {
    throw std::invalid_argument("compute_loss: negatives must be k >= 1 per positive");
  }
  const std::size_t k = negative.size() / n;
  LossResult r;
  r.d_positive.assign(n, 0.0);
  r.d_negative.assign(negative.size(), 0.0);

  switch (kind) {
    case LossKind::kMarginRanking: {
      if (!margin) throw std::invalid_argument("margin ranking loss requires a margin");
      const double scale = 1.0 / static_cast<double>(n * k);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
          const double v = *margin - positive[i] + negative[i * k + j];
          if (v > 0.0) {
            r.value += v * scale;
            r.d_positive[i] -= scale;
            r.d_negative[i * k + j] += scale;
          }
        }
      }
      break;
    }
    case LossKind::kBinaryCrossEntropy: {
      const double scale = 1.0 / static_cast<double>(n * (k + 1));
      for (std::size_t i = 0; i < n; ++i) {
        // label 1: -log sigmoid(x) = softplus(-x)
        r.value += detail::softplus(-positive[i]) * scale;
        r.d_positive[i] = (detail::sigmoid(positive[i]) - 1.0) * scale;
      }
      for (std::size_t m = 0; m < negative.size(); ++m) {
        // label 0: -log(1 - sigmoid(x)) = softplus(x)
        r.value += detail::softplus(negative[m]) * scale;
        r.d_negative[m] = detail::sigmoid(negative[m]) * scale;
      }
      break;
    }
    case LossKind::kCrossEntropy: {
      const double scale = 1.0 / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) {
        double hi = positive[i];
        for (std::size_t j = 0; j < k; ++j) hi = std::max(hi, negative[i * k + j]);
        double z = std::exp(positive[i] - hi);
        for (std::size_t j = 0; j < k; ++j) z += std::exp(negative[i * k + j] - hi);
        const double log_z = hi + std::log(z);
        r.value += (log_z - positive[i]) * scale;
        r.d_positive[i] = (std::exp(positive[i] - log_z) - 1.0) * scale;
        for (std::size_t j = 0; j < k; ++j) {
          r.d_negative[i * k + j] = std::exp(negative[i * k + j] - log_z) * scale;
        }
      }
      break;
    }
  }
  return r;
}

inline double loss(LossKind kind, std::span<const double> positive, std::span<const double> negative,
                   std::optional<double> margin = {}) {
  return compute_loss(kind, positive, negative, margin).value;
}

// N3 penalty: sum of |x|^3 over the given coordinates.
inline double n3_penalty(std::span<const double> coords) {
  double acc = 0.0;
  for (double x : coords) acc += std::abs(x) * x * x;
  return acc;
}

// Adds weight * d/dx sum |x|^3 into grad.
inline void accumulate_n3_gradient(std::span<const double> coords, double weight, std::span<double> grad) {
  for (std::size_t i = 0; i < coords.size(); ++i) grad[i] += weight * 3.0 * coords[i] * std::abs(coords[i]);
}

}  // namespace kgtwig

#endif  // KGTWIG_KGE_LOSS_HPP_
