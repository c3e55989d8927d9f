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

// ComplEx training: shuffled mini-batches, sampled negatives, N3
// regularization on batch-touched rows, dense Adam.

#ifndef KGTWIG_KGE_TRAINER_HPP_
#define KGTWIG_KGE_TRAINER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kgtwig/adam.hpp"
#include "kgtwig/complex_model.hpp"
#include "kgtwig/hyperparams.hpp"
#include "kgtwig/kg_store.hpp"
#include "kgtwig/kge_loss.hpp"
#include "kgtwig/negative_sampler.hpp"

namespace kgtwig {

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainOptions {
  std::size_t batch_size = 128;
};

struct TrainResult {
  ComplexModel model;
  std::vector<double> epoch_losses;  // mean batch objective per epoch
};

// Marks rows touched by a batch so each is regularized once.
class TouchedRows {
 public:
  explicit TouchedRows(std::size_t rows) : stamp_(rows, 0) {}

  void begin() {
    ++epoch_;
    rows_.clear();
  }
  void touch(std::size_t row) {
    if (stamp_[row] != epoch_) {
      stamp_[row] = epoch_;
      rows_.push_back(row);
    }
  }
  const std::vector<std::size_t>& rows() const noexcept { return rows_; }

 private:
  std::vector<std::uint64_t> stamp_;
  std::vector<std::size_t> rows_;
  std::uint64_t epoch_ = 0;
};

// Batch objective: loss over the groups plus
// reg * (sum of |x|^3 over touched entity/relation rows) / batch size.
// `negatives` holds k entries per positive. Adds the gradient into `grad`
// when it is non-empty; returns the objective value.
inline double batch_objective(const ComplexModel& model, const HyperparamConfig& config,
                              std::span<const Triple> positives, std::span<const Triple> negatives,
                              std::span<double> grad, TouchedRows* touched = nullptr) {
  std::vector<double> pos(positives.size()), neg(negatives.size());
  for (std::size_t i = 0; i < positives.size(); ++i) pos[i] = model.score(positives[i]);
  for (std::size_t i = 0; i < negatives.size(); ++i) neg[i] = model.score(negatives[i]);
  const LossResult lr = compute_loss(config.loss, pos, neg, config.margin);

  TouchedRows local(model.entity_count() + model.relation_count());
  TouchedRows& rows = touched ? *touched : local;
  rows.begin();
  auto touch = [&](const Triple& t) {
    rows.touch(t.s);
    rows.touch(t.o);
    rows.touch(model.entity_count() + t.p);
  };
  for (const Triple& t : positives) touch(t);
  for (const Triple& t : negatives) touch(t);

  const double reg_weight = config.reg_coefficient / static_cast<double>(positives.size());
  const std::size_t width = model.row_width();
  double reg = 0.0;
  const auto params = model.params();
  for (std::size_t row : rows.rows()) reg += n3_penalty(params.subspan(row * width, width));

  if (!grad.empty()) {
    for (std::size_t i = 0; i < positives.size(); ++i) {
      model.accumulate_score_gradient(positives[i], lr.d_positive[i], grad);
    }
    for (std::size_t i = 0; i < negatives.size(); ++i) {
      model.accumulate_score_gradient(negatives[i], lr.d_negative[i], grad);
    }
    if (reg_weight != 0.0) {
      for (std::size_t row : rows.rows()) {
        accumulate_n3_gradient(params.subspan(row * width, width), reg_weight,
                               grad.subspan(row * width, width));
      }
    }
  }
  return lr.value + reg_weight * reg;
}

inline TrainResult train_with_log(const KnowledgeGraph& kg, const HyperparamConfig& config,
                                  std::uint64_t seed, const TrainOptions& options = {}) {
  config.validate();
  if (options.batch_size == 0) throw std::invalid_argument("train: batch size must be >= 1");
  TrainResult result{ComplexModel::initialize(kg.entity_count(), kg.relation_count(),
                                              static_cast<std::size_t>(config.dimension), seed),
                     {}};
  ComplexModel& model = result.model;
  if (config.epochs == 0) return result;

  const SamplerStats sampler = build_sampler_stats(kg);
  // Separate stream from initialization so the init is seed-stable.
  std::mt19937_64 rng(seed ^ 0x5851f42d4c957f2dULL);
  Adam adam(model.params().size(), {config.learning_rate});
  std::vector<double> grad(model.params().size(), 0.0);
  TouchedRows touched(kg.entity_count() + kg.relation_count());

  const auto& train = kg.train();
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<Triple> positives, negatives;
  const auto k = static_cast<std::size_t>(config.negatives);
  const std::size_t width = model.row_width();

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
      const std::size_t end = std::min(order.size(), start + options.batch_size);
      positives.clear();
      negatives.clear();
      for (std::size_t i = start; i < end; ++i) {
        const Triple& t = train[order[i]];
        positives.push_back(t);
        auto negs = sample_negatives(config.sampler, t, k, sampler, rng);
        negatives.insert(negatives.end(), negs.begin(), negs.end());
      }
      const double value = batch_objective(model, config, positives, negatives, grad, &touched);
      if (!std::isfinite(value)) {
        throw TrainingError("non-finite training loss at epoch " + std::to_string(epoch) +
                            ", batch " + std::to_string(batches));
      }
      adam.step(model.params(), grad);
      for (std::size_t row : touched.rows()) {
        std::fill_n(grad.begin() + static_cast<std::ptrdiff_t>(row * width), width, 0.0);
      }
      epoch_loss += value;
      ++batches;
    }
    result.epoch_losses.push_back(epoch_loss / static_cast<double>(batches));
  }
  if (!model.all_finite()) throw TrainingError("non-finite embeddings after training");
  return result;
}

inline ComplexModel train(const KnowledgeGraph& kg, const HyperparamConfig& config, std::uint64_t seed,
                          const TrainOptions& options = {}) {
  return train_with_log(kg, config, seed, options).model;
}

// Mean objective over the whole training split with negatives drawn from
// a fixed stream, so two models can be compared on identical samples.
inline double training_objective(const ComplexModel& model, const KnowledgeGraph& kg,
                                 const HyperparamConfig& config, std::uint64_t sample_seed,
                                 std::size_t batch_size = 128) {
  const SamplerStats sampler = build_sampler_stats(kg);
  std::mt19937_64 rng(sample_seed);
  const auto k = static_cast<std::size_t>(config.negatives);
  double total = 0.0;
  std::size_t batches = 0;
  std::vector<Triple> positives, negatives;
  for (std::size_t start = 0; start < kg.train().size(); start += batch_size) {
    const std::size_t end = std::min(kg.train().size(), start + batch_size);
    positives.assign(kg.train().begin() + static_cast<std::ptrdiff_t>(start),
                     kg.train().begin() + static_cast<std::ptrdiff_t>(end));
    negatives.clear();
    for (const Triple& t : positives) {
      auto negs = sample_negatives(config.sampler, t, k, sampler, rng);
      negatives.insert(negatives.end(), negs.begin(), negs.end());
    }
    total += batch_objective(model, config, positives, negatives, {});
    ++batches;
  }
  return total / static_cast<double>(batches);
}

}  // namespace kgtwig

#endif  // KGTWIG_KGE_TRAINER_HPP_
