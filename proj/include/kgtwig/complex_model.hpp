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

// ComplEx embeddings and scoring.

#ifndef KGTWIG_COMPLEX_MODEL_HPP_
#define KGTWIG_COMPLEX_MODEL_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kgtwig/hyperparams.hpp"
#include "kgtwig/kg_store.hpp"

namespace kgtwig {

// Entity rows come first in the flat parameter vector, then relation rows.
// Each row stores d real parts followed by d imaginary parts.
class ComplexModel {
 public:
  ComplexModel() = default;

  ComplexModel(std::size_t entity_count, std::size_t relation_count, std::size_t dimension,
               std::uint64_t seed)
      : entity_count_(entity_count),
        relation_count_(relation_count),
        dim_(dimension),
        seed_(seed),
        params_((entity_count + relation_count) * 2 * dimension, 0.0) {
    if (dimension == 0) throw std::invalid_argument("ComplexModel: dimension must be >= 1");
  }

  // i.i.d. N(0, 1/d) coordinates.
  static ComplexModel initialize(std::size_t entity_count, std::size_t relation_count,
                                 std::size_t dimension, std::uint64_t seed) {
    ComplexModel m(entity_count, relation_count, dimension, seed);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(dimension)));
    for (double& x : m.params_) x = normal(rng);
    return m;
  }

  std::size_t entity_count() const noexcept { return entity_count_; }
  std::size_t relation_count() const noexcept { return relation_count_; }
  std::size_t dimension() const noexcept { return dim_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t row_width() const noexcept { return 2 * dim_; }

  std::span<double> params() noexcept { return params_; }
  std::span<const double> params() const noexcept { return params_; }

  std::size_t entity_offset(EntityId e) const {
    if (e >= entity_count_) throw std::out_of_range("entity id " + std::to_string(e) + " out of range");
    return static_cast<std::size_t>(e) * row_width();
  }
  std::size_t relation_offset(RelationId r) const {
    if (r >= relation_count_) {
      throw std::out_of_range("relation id " + std::to_string(r) + " out of range");
    }
    return (entity_count_ + static_cast<std::size_t>(r)) * row_width();
  }

  std::span<double> entity(EntityId e) { return {params_.data() + entity_offset(e), row_width()}; }
  std::span<const double> entity(EntityId e) const {
    return {params_.data() + entity_offset(e), row_width()};
  }
  std::span<double> relation(RelationId r) { return {params_.data() + relation_offset(r), row_width()}; }
  std::span<const double> relation(RelationId r) const {
    return {params_.data() + relation_offset(r), row_width()};
  }

  // Re(<e_s, e_p, conj(e_o)>).
  double score(const Triple& t) const {
    const double* s = params_.data() + entity_offset(t.s);
    const double* p = params_.data() + relation_offset(t.p);
    const double* o = params_.data() + entity_offset(t.o);
    const std::size_t d = dim_;
    double acc = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double rs = s[k], is = s[d + k];
      const double rp = p[k], ip = p[d + k];
      const double ro = o[k], io = o[d + k];
      acc += rs * rp * ro + is * rp * io + rs * ip * io - is * ip * ro;
    }
    return acc;
  }

  // Adds weight * d score / d theta into `grad` (same layout as params()).
  void accumulate_score_gradient(const Triple& t, double weight, std::span<double> grad) const {
    const std::size_t so = entity_offset(t.s), po = relation_offset(t.p), oo = entity_offset(t.o);
    const double* s = params_.data() + so;
    const double* p = params_.data() + po;
    const double* o = params_.data() + oo;
    double* gs = grad.data() + so;
    double* gp = grad.data() + po;
    double* go = grad.data() + oo;
    const std::size_t d = dim_;
    for (std::size_t k = 0; k < d; ++k) {
      const double rs = s[k], is = s[d + k];
      const double rp = p[k], ip = p[d + k];
      const double ro = o[k], io = o[d + k];
      gs[k] += weight * (rp * ro + ip * io);
      gs[d + k] += weight * (rp * io - ip * ro);
      gp[k] += weight * (rs * ro + is * io);
      gp[d + k] += weight * (rs * io - is * ro);
      go[k] += weight * (rs * rp - is * ip);
      go[d + k] += weight * (is * rp + rs * ip);
    }
  }

  bool all_finite() const {
    for (double x : params_) {
      if (!std::isfinite(x)) return false;
    }
    return true;
  }

  friend bool operator==(const ComplexModel&, const ComplexModel&) = default;

 private:
  std::size_t entity_count_ = 0;
  std::size_t relation_count_ = 0;
  std::size_t dim_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<double> params_;
};

inline double score(const ComplexModel& model, const Triple& t) { return model.score(t); }

inline nlohmann::json complex_checkpoint_json(const ComplexModel& model, const HyperparamConfig& config) {
  auto rows = [&](std::size_t count, bool entities) {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i = 0; i < count; ++i) {
      auto row = entities ? model.entity(static_cast<EntityId>(i))
                          : model.relation(static_cast<RelationId>(i));
      arr.push_back(std::vector<double>(row.begin(), row.end()));
    }
    return arr;
  };
  return nlohmann::json{{"format", "kgtwig-complex-v1"},
                        {"config", config},
                        {"seed", model.seed()},
                        {"dimension", model.dimension()},
                        {"entities", rows(model.entity_count(), true)},
                        {"relations", rows(model.relation_count(), false)}};
}

inline ComplexModel complex_from_checkpoint_json(const nlohmann::json& j) {
  if (j.value("format", "") != "kgtwig-complex-v1") {
    throw std::runtime_error("not a ComplEx checkpoint");
  }
  const auto& ents = j.at("entities");
  const auto& rels = j.at("relations");
  ComplexModel model(ents.size(), rels.size(), j.at("dimension").get<std::size_t>(),
                     j.at("seed").get<std::uint64_t>());
  for (std::size_t i = 0; i < ents.size(); ++i) {
    auto dst = model.entity(static_cast<EntityId>(i));
    const auto src = ents[i].get<std::vector<double>>();
    if (src.size() != dst.size()) throw std::runtime_error("checkpoint row width mismatch");
    std::copy(src.begin(), src.end(), dst.begin());
  }
  for (std::size_t i = 0; i < rels.size(); ++i) {
    auto dst = model.relation(static_cast<RelationId>(i));
    const auto src = rels[i].get<std::vector<double>>();
    if (src.size() != dst.size()) throw std::runtime_error("checkpoint row width mismatch");
    std::copy(src.begin(), src.end(), dst.begin());
  }
  return model;
}

}  // namespace kgtwig

#endif  // KGTWIG_COMPLEX_MODEL_HPP_
