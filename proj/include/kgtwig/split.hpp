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

// Partitions of the hyperparameter grid into training, test and
// finetuning configurations.

#ifndef KGTWIG_SPLIT_HPP_
#define KGTWIG_SPLIT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace kgtwig {

enum class SplitMode : std::uint8_t { kUnseenHyperparameters, kHoldoutKg };

inline std::string_view split_mode_name(SplitMode m) {
  return m == SplitMode::kUnseenHyperparameters ? "unseen-hyperparameters" : "holdout-kg";
}

inline SplitMode parse_split_mode(std::string_view name) {
  if (name == "unseen-hyperparameters") return SplitMode::kUnseenHyperparameters;
  if (name == "holdout-kg") return SplitMode::kHoldoutKg;
  throw std::invalid_argument("unknown split mode '" + std::string(name) + "'");
}

struct SplitPlan {
  SplitMode mode = SplitMode::kUnseenHyperparameters;
  double test_fraction = 0.10;
  std::string holdout_kg;
  double shot_fraction = 0.0;  // 0, 0.05 or 0.25 in the standard protocol
  std::uint64_t split_seed = 0;
  // Evaluate the held-out KG on its finetuning configs as well.
  bool include_finetune_in_test = false;

  void validate() const {
    if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
      throw std::invalid_argument("SplitPlan: test fraction must lie in [0, 1)");
    }
    if (!(shot_fraction >= 0.0 && shot_fraction < 1.0)) {
      throw std::invalid_argument("SplitPlan: shot fraction must lie in [0, 1)");
    }
    if (mode == SplitMode::kHoldoutKg && holdout_kg.empty()) {
      throw std::invalid_argument("SplitPlan: holdout-kg mode needs a held-out KG name");
    }
  }
};

inline void to_json(nlohmann::json& j, const SplitPlan& p) {
  j = nlohmann::json{{"mode", split_mode_name(p.mode)},
                     {"test_fraction", p.test_fraction},
                     {"holdout_kg", p.holdout_kg},
                     {"shot_fraction", p.shot_fraction},
                     {"split_seed", p.split_seed},
                     {"include_finetune_in_test", p.include_finetune_in_test}};
}

inline void from_json(const nlohmann::json& j, SplitPlan& p) {
  p = SplitPlan{};
  if (j.contains("mode")) p.mode = parse_split_mode(j.at("mode").get<std::string>());
  p.test_fraction = j.value("test_fraction", 0.10);
  p.holdout_kg = j.value("holdout_kg", std::string{});
  p.shot_fraction = j.value("shot_fraction", 0.0);
  p.split_seed = j.value("split_seed", std::uint64_t{0});
  p.include_finetune_in_test = j.value("include_finetune_in_test", false);
}

// Indices into the enumerated grid, each list sorted ascending.
struct ConfigSplit {
  std::vector<std::size_t> train;         // training configs of the seen KGs
  std::vector<std::size_t> test;          // held-out configs of the seen KGs
  std::vector<std::size_t> finetune;      // held-out KG: finetuning configs
  std::vector<std::size_t> holdout_test;  // held-out KG: evaluation configs

  friend bool operator==(const ConfigSplit&, const ConfigSplit&) = default;
};

// Nearest count, at least one for a positive fraction.
inline std::size_t fraction_count(double fraction, std::size_t n) {
  if (fraction <= 0.0 || n == 0) return 0;
  const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  return std::clamp<std::size_t>(k, 1, n);
}

namespace detail {

inline std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

}  // namespace detail

// The same held-out set applies to every seen KG. A pure function of
// (grid size, plan).
inline ConfigSplit make_split(std::size_t grid_size, const SplitPlan& plan) {
  plan.validate();
  ConfigSplit split;
  const auto order = detail::shuffled_indices(grid_size, plan.split_seed);
  const std::size_t n_test = fraction_count(plan.test_fraction, grid_size);
  split.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  std::sort(split.test.begin(), split.test.end());
  std::sort(split.train.begin(), split.train.end());

  if (plan.mode == SplitMode::kHoldoutKg) {
    const auto shot_order = detail::shuffled_indices(grid_size, plan.split_seed ^ 0xa0761d6478bd642fULL);
    const std::size_t n_shot = fraction_count(plan.shot_fraction, grid_size);
    split.finetune.assign(shot_order.begin(), shot_order.begin() + static_cast<std::ptrdiff_t>(n_shot));
    if (plan.include_finetune_in_test) {
      split.holdout_test = shot_order;
    } else {
      split.holdout_test.assign(shot_order.begin() + static_cast<std::ptrdiff_t>(n_shot), shot_order.end());
    }
    std::sort(split.finetune.begin(), split.finetune.end());
    std::sort(split.holdout_test.begin(), split.holdout_test.end());
  }
  return split;
}

}  // namespace kgtwig

#endif  // KGTWIG_SPLIT_HPP_
