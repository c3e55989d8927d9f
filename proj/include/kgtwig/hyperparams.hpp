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

#ifndef KGTWIG_HYPERPARAMS_HPP_
#define KGTWIG_HYPERPARAMS_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "kgtwig/util.hpp"

namespace kgtwig {

enum class SamplerKind : std::uint8_t { kBasic, kBernoulli, kPseudoTyped };
enum class LossKind : std::uint8_t { kMarginRanking, kBinaryCrossEntropy, kCrossEntropy };

inline std::string_view sampler_name(SamplerKind k) {
  switch (k) {
    case SamplerKind::kBasic: return "basic";
    case SamplerKind::kBernoulli: return "bernoulli";
    case SamplerKind::kPseudoTyped: return "pseudo_typed";
  }
  return "?";
}

inline SamplerKind parse_sampler(std::string_view name) {
  if (name == "basic") return SamplerKind::kBasic;
  if (name == "bernoulli") return SamplerKind::kBernoulli;
  if (name == "pseudo_typed") return SamplerKind::kPseudoTyped;
  throw std::invalid_argument("unknown negative sampler '" + std::string(name) + "'");
}

inline std::string_view loss_name(LossKind k) {
  switch (k) {
    case LossKind::kMarginRanking: return "margin_ranking";
    case LossKind::kBinaryCrossEntropy: return "bce";
    case LossKind::kCrossEntropy: return "cross_entropy";
  }
  return "?";
}

inline LossKind parse_loss(std::string_view name) {
  if (name == "margin_ranking") return LossKind::kMarginRanking;
  if (name == "bce") return LossKind::kBinaryCrossEntropy;
  if (name == "cross_entropy") return LossKind::kCrossEntropy;
  throw std::invalid_argument("unknown loss '" + std::string(name) + "'");
}

// One point of the KGE hyperparameter grid.
struct HyperparamConfig {
  SamplerKind sampler = SamplerKind::kBasic;
  int negatives = 5;
  LossKind loss = LossKind::kCrossEntropy;
  std::optional<double> margin;  // present iff loss == kMarginRanking
  double learning_rate = 1e-2;
  int dimension = 50;
  double reg_coefficient = 1e-6;
  int epochs = 100;

  void validate() const {
    if ((loss == LossKind::kMarginRanking) != margin.has_value()) {
      throw std::invalid_argument("margin must be set exactly when loss is margin_ranking");
    }
    if (margin && !(*margin > 0.0)) throw std::invalid_argument("margin must be positive");
    if (negatives < 1) throw std::invalid_argument("negatives per positive must be >= 1");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
    if (dimension < 1) throw std::invalid_argument("dimension must be >= 1");
    if (!(reg_coefficient >= 0.0)) throw std::invalid_argument("reg coefficient must be >= 0");
    if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  }

  // Sorted key=value pairs; the basis of the config identity hash.
  std::string canonical_string() const {
    std::string out;
    out += "dimension=" + std::to_string(dimension);
    out += ";epochs=" + std::to_string(epochs);
    out += ";learning_rate=" + format_double(learning_rate);
    out += ";loss=" + std::string(loss_name(loss));
    out += ";margin=" + (margin ? format_double(*margin) : std::string("none"));
    out += ";negatives=" + std::to_string(negatives);
    out += ";reg_coefficient=" + format_double(reg_coefficient);
    out += ";sampler=" + std::string(sampler_name(sampler));
    return out;
  }

  std::string hash() const { return to_hex(fnv1a64(canonical_string())); }

  friend bool operator==(const HyperparamConfig&, const HyperparamConfig&) = default;
};

inline void to_json(nlohmann::json& j, const HyperparamConfig& c) {
  j = nlohmann::json{{"sampler", sampler_name(c.sampler)},
                     {"negatives", c.negatives},
                     {"loss", loss_name(c.loss)},
                     {"margin", c.margin ? nlohmann::json(*c.margin) : nlohmann::json(nullptr)},
                     {"learning_rate", c.learning_rate},
                     {"dimension", c.dimension},
                     {"reg_coefficient", c.reg_coefficient},
                     {"epochs", c.epochs}};
}

inline void from_json(const nlohmann::json& j, HyperparamConfig& c) {
  c.sampler = parse_sampler(j.at("sampler").get<std::string>());
  c.negatives = j.at("negatives").get<int>();
  c.loss = parse_loss(j.at("loss").get<std::string>());
  if (j.contains("margin") && !j.at("margin").is_null()) {
    c.margin = j.at("margin").get<double>();
  } else {
    c.margin.reset();
  }
  c.learning_rate = j.at("learning_rate").get<double>();
  c.dimension = j.at("dimension").get<int>();
  c.reg_coefficient = j.at("reg_coefficient").get<double>();
  c.epochs = j.value("epochs", 100);
  c.validate();
}

}  // namespace kgtwig

#endif  // KGTWIG_HYPERPARAMS_HPP_
