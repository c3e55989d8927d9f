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

#ifndef KGTWIG_GRID_HPP_
#define KGTWIG_GRID_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kgtwig/hyperparams.hpp"
#include "kgtwig/util.hpp"

namespace kgtwig {

// Hyperparameter value lists; the defaults are the full search grid.
struct GridSpec {
  std::vector<SamplerKind> samplers{SamplerKind::kBasic, SamplerKind::kBernoulli, SamplerKind::kPseudoTyped};
  std::vector<int> negatives{5, 25, 125};
  std::vector<LossKind> losses{LossKind::kMarginRanking, LossKind::kBinaryCrossEntropy, LossKind::kCrossEntropy};
  std::vector<double> margins{0.5, 1.0, 2.0};
  std::vector<double> learning_rates{1e-2, 1e-4, 1e-6};
  std::vector<int> dimensions{50, 100, 250};
  std::vector<double> reg_coefficients{1e-2, 1e-4, 1e-6};
  int epochs = 100;
  std::vector<std::uint64_t> replicate_seeds{1, 2, 3, 4};

  void validate() const {
    if (samplers.empty() || negatives.empty() || losses.empty() || learning_rates.empty() ||
        dimensions.empty() || reg_coefficients.empty()) {
      throw std::invalid_argument("GridSpec: every value list must be non-empty");
    }
    for (LossKind l : losses) {
      if (l == LossKind::kMarginRanking && margins.empty()) {
        throw std::invalid_argument("GridSpec: margin_ranking needs at least one margin");
      }
    }
    if (replicate_seeds.empty()) throw std::invalid_argument("GridSpec: no replicate seeds");
  }
};

inline void to_json(nlohmann::json& j, const GridSpec& g) {
  std::vector<std::string> samplers, losses;
  for (auto s : g.samplers) samplers.emplace_back(sampler_name(s));
  for (auto l : g.losses) losses.emplace_back(loss_name(l));
  j = nlohmann::json{{"samplers", samplers},
                     {"negatives", g.negatives},
                     {"losses", losses},
                     {"margins", g.margins},
                     {"learning_rates", g.learning_rates},
                     {"dimensions", g.dimensions},
                     {"reg_coefficients", g.reg_coefficients},
                     {"epochs", g.epochs},
                     {"seeds", g.replicate_seeds}};
}

// Missing keys keep their defaults.
inline void from_json(const nlohmann::json& j, GridSpec& g) {
  g = GridSpec{};
  if (j.contains("samplers")) {
    g.samplers.clear();
    for (const auto& s : j.at("samplers")) g.samplers.push_back(parse_sampler(s.get<std::string>()));
  }
  if (j.contains("losses")) {
    g.losses.clear();
    for (const auto& s : j.at("losses")) g.losses.push_back(parse_loss(s.get<std::string>()));
  }
  if (j.contains("negatives")) j.at("negatives").get_to(g.negatives);
  if (j.contains("margins")) j.at("margins").get_to(g.margins);
  if (j.contains("learning_rates")) j.at("learning_rates").get_to(g.learning_rates);
  if (j.contains("dimensions")) j.at("dimensions").get_to(g.dimensions);
  if (j.contains("reg_coefficients")) j.at("reg_coefficients").get_to(g.reg_coefficients);
  if (j.contains("epochs")) j.at("epochs").get_to(g.epochs);
  if (j.contains("seeds")) j.at("seeds").get_to(g.replicate_seeds);
  g.validate();
}

// Nested in field order sampler, negatives, loss, margin, learning rate,
// dimension, regularization; margins only expand margin-ranking configs.
inline std::vector<HyperparamConfig> enumerate_grid(const GridSpec& spec) {
  spec.validate();
  std::vector<HyperparamConfig> out;
  for (SamplerKind sampler : spec.samplers) {
    for (int neg : spec.negatives) {
      for (LossKind loss : spec.losses) {
        std::vector<std::optional<double>> margins;
        if (loss == LossKind::kMarginRanking) {
          for (double m : spec.margins) margins.emplace_back(m);
        } else {
          margins.emplace_back(std::nullopt);
        }
        for (const auto& margin : margins) {
          for (double lr : spec.learning_rates) {
            for (int dim : spec.dimensions) {
              for (double reg : spec.reg_coefficients) {
                HyperparamConfig c;
                c.sampler = sampler;
                c.negatives = neg;
                c.loss = loss;
                c.margin = margin;
                c.learning_rate = lr;
                c.dimension = dim;
                c.reg_coefficient = reg;
                c.epochs = spec.epochs;
                c.validate();
                out.push_back(c);
              }
            }
          }
        }
      }
    }
  }
  return out;
}

// Identity of the enumerated grid (order-sensitive) plus its seeds.
inline std::string grid_hash(const GridSpec& spec) {
  std::string text;
  for (const auto& c : enumerate_grid(spec)) text += c.canonical_string() + "\n";
  for (auto s : spec.replicate_seeds) text += "seed=" + std::to_string(s) + "\n";
  return to_hex(fnv1a64(text));
}

}  // namespace kgtwig

#endif  // KGTWIG_GRID_HPP_
