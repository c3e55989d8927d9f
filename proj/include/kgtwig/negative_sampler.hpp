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

// Negative samplers: Basic, Bernoulli and pseudo-typed corruption.

#ifndef KGTWIG_NEGATIVE_SAMPLER_HPP_
#define KGTWIG_NEGATIVE_SAMPLER_HPP_

#include <algorithm>
#include <random>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "kgtwig/hyperparams.hpp"
#include "kgtwig/kg_store.hpp"

namespace kgtwig {

// Per-relation statistics gathered once from the training split.
struct SamplerStats {
  std::size_t entity_count = 0;
  std::vector<double> head_probability;           // P(corrupt head), Bernoulli
  std::vector<std::vector<EntityId>> head_domain;  // distinct training subjects per relation
  std::vector<std::vector<EntityId>> tail_domain;  // distinct training objects per relation
};

inline SamplerStats build_sampler_stats(const KnowledgeGraph& kg) {
  SamplerStats st;
  st.entity_count = kg.entity_count();
  const auto r = kg.relation_count();
  st.head_probability.assign(r, 0.5);
  st.head_domain.resize(r);
  st.tail_domain.resize(r);

  std::vector<std::size_t> triples_per_relation(r, 0);
  for (const Triple& t : kg.train()) {
    ++triples_per_relation[t.p];
    st.head_domain[t.p].push_back(t.s);
    st.tail_domain[t.p].push_back(t.o);
  }
  for (std::size_t p = 0; p < r; ++p) {
    for (auto* dom : {&st.head_domain[p], &st.tail_domain[p]}) {
      std::sort(dom->begin(), dom->end());
      dom->erase(std::unique(dom->begin(), dom->end()), dom->end());
    }
    if (triples_per_relation[p] == 0) continue;
    const double n = static_cast<double>(triples_per_relation[p]);
    const double tph = n / static_cast<double>(st.head_domain[p].size());
    const double hpt = n / static_cast<double>(st.tail_domain[p].size());
    st.head_probability[p] = tph / (tph + hpt);
  }
  return st;
}

// Every returned negative differs from `positive` in exactly one of s, o.
template <class Rng>
std::vector<Triple> sample_negatives(SamplerKind kind, const Triple& positive, std::size_t k,
                                     const SamplerStats& stats, Rng& rng) {
  if (k == 0) throw std::invalid_argument("sample_negatives: k must be >= 1");
  if (stats.entity_count < 2) {
    throw std::invalid_argument("sample_negatives: need at least two entities to corrupt");
  }
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<EntityId> any_entity(0, static_cast<EntityId>(stats.entity_count - 2));

  // Uniform over all entities except `current`.
  auto uniform_other = [&](EntityId current) {
    EntityId e = any_entity(rng);
    return e >= current ? e + 1 : e;
  };
  // Uniform over `domain` except `current`; Basic replacement when the
  // domain offers no alternative.
  auto typed_other = [&](const std::vector<EntityId>& domain, EntityId current) {
    if (domain.size() <= 1) return uniform_other(current);
    const bool has_current = std::binary_search(domain.begin(), domain.end(), current);
    const std::size_t choices = domain.size() - (has_current ? 1 : 0);
    if (choices == 0) return uniform_other(current);
    std::uniform_int_distribution<std::size_t> pick(0, choices - 1);
    std::size_t idx = pick(rng);
    if (has_current) {
      const auto pos = static_cast<std::size_t>(
          std::lower_bound(domain.begin(), domain.end(), current) - domain.begin());
      if (idx >= pos) ++idx;
    }
    return domain[idx];
  };

  std::vector<Triple> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    double p_head = 0.5;
    if (kind == SamplerKind::kBernoulli && positive.p < stats.head_probability.size()) {
      p_head = stats.head_probability[positive.p];
    }
    const bool corrupt_head = coin(rng) < p_head;
    Triple neg = positive;
    if (kind == SamplerKind::kPseudoTyped && positive.p < stats.head_domain.size()) {
      if (corrupt_head) {
        neg.s = typed_other(stats.head_domain[positive.p], positive.s);
      } else {
        neg.o = typed_other(stats.tail_domain[positive.p], positive.o);
      }
    } else if (corrupt_head) {
      neg.s = uniform_other(positive.s);
    } else {
      neg.o = uniform_other(positive.o);
    }
    out.push_back(neg);
  }
  return out;
}

}  // namespace kgtwig

#endif  // KGTWIG_NEGATIVE_SAMPLER_HPP_
