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

// Independent reference implementations used to check the library.

#ifndef KGTWIG_TESTS_SUPPORT_ORACLES_HPP_
#define KGTWIG_TESTS_SUPPORT_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <span>
#include <vector>

#include "kgtwig/complex_model.hpp"
#include "kgtwig/graph_features.hpp"
#include "kgtwig/kg_store.hpp"

namespace kgtwig::testing {

// Recomputes every feature of one query by scanning the training list,
// with no shared precomputation.
inline QueryFeatureVector brute_force_features(const KnowledgeGraph& kg, const Triple& q, Direction dir) {
  const auto& train = kg.train();
  auto degree = [&](EntityId e) {
    double d = 0;
    for (const auto& t : train) d += (t.s == e) + (t.o == e);
    return d;
  };
  auto freq = [&](RelationId p) {
    double f = 0;
    for (const auto& t : train) f += (t.p == p);
    return f;
  };
  struct Side {
    double min_deg = 0, max_deg = 0, mean_deg = 0, num_nb = 0;
    double min_f = 0, max_f = 0, mean_f = 0, num_edges = 0;
  };
  auto side = [&](EntityId e) {
    Side s;
    std::set<EntityId> nbs;
    std::vector<double> freqs;
    std::set<RelationId> preds;
    for (const auto& t : train) {
      if (t.s == e) {
        nbs.insert(t.o);
        freqs.push_back(freq(t.p));
        preds.insert(t.p);
      }
      if (t.o == e) {
        nbs.insert(t.s);
        freqs.push_back(freq(t.p));
        preds.insert(t.p);
      }
    }
    s.num_nb = static_cast<double>(nbs.size());
    if (!nbs.empty()) {
      std::vector<double> degs;
      for (EntityId n : nbs) degs.push_back(degree(n));
      s.min_deg = *std::min_element(degs.begin(), degs.end());
      s.max_deg = *std::max_element(degs.begin(), degs.end());
      double total = 0;
      for (double d : degs) total += d;
      s.mean_deg = total / static_cast<double>(degs.size());
    }
    if (!freqs.empty()) {
      s.min_f = *std::min_element(freqs.begin(), freqs.end());
      s.max_f = *std::max_element(freqs.begin(), freqs.end());
      double total = 0;
      for (double f : freqs) total += f;
      s.mean_f = total / static_cast<double>(freqs.size());
    }
    s.num_edges = static_cast<double>(preds.size());
    return s;
  };
  double sp = 0, op = 0, so = 0;
  for (const auto& t : train) {
    sp += (t.s == q.s && t.p == q.p);
    op += (t.o == q.o && t.p == q.p);
    so += (t.s == q.s && t.o == q.o);
  }
  const Side S = side(q.s), O = side(q.o);
  QueryFeatureVector v;
  v.values = {dir == Direction::kHead ? 1.0 : 0.0,
              degree(q.s),
              degree(q.o),
              freq(q.p),
              sp,
              op,
              so,
              S.min_deg,
              S.max_deg,
              S.mean_deg,
              O.min_deg,
              O.max_deg,
              O.mean_deg,
              S.num_nb,
              O.num_nb,
              S.min_f,
              S.max_f,
              S.mean_f,
              O.min_f,
              O.max_f,
              O.mean_f,
              S.num_edges,
              O.num_edges};
  return v;
}

// Scores every substitution, drops known triples other than the answer,
// sorts descending and reads off the mid-tie position of the answer.
inline double brute_force_rank(const ComplexModel& model, const KnowledgeGraph& kg, const Triple& q, Direction dir) {
  struct Cand {
    double score;
    bool is_answer;
  };
  std::vector<Cand> cands;
  for (EntityId e = 0; e < kg.entity_count(); ++e) {
    Triple c = q;
    (dir == Direction::kHead ? c.s : c.o) = e;
    const bool is_answer = c == q;
    if (!is_answer && kg.contains(c)) continue;
    cands.push_back({model.score(c), is_answer});
  }
  std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.score > b.score; });
  std::size_t pos = 0;
  while (!cands[pos].is_answer) ++pos;
  const double s = cands[pos].score;
  std::size_t first = pos, last = pos;
  while (first > 0 && cands[first - 1].score == s) --first;
  while (last + 1 < cands.size() && cands[last + 1].score == s) ++last;
  // positions first..last (1-based first+1..last+1) share the score
  return (static_cast<double>(first + 1) + static_cast<double>(last + 1)) / 2.0;
}

// Central finite differences of f at x, one coordinate at a time.
inline std::vector<double> finite_difference_gradient(const std::function<double()>& f, std::span<double> x,
                                                      double h = 1e-5) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = f();
    x[i] = saved - h;
    const double down = f();
    x[i] = saved;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// |a - n| / max(|a|, |n|, floor); the floor keeps near-zero gradients from
// producing meaningless ratios.
inline double max_relative_error(std::span<const double> analytic, std::span<const double> numeric,
                                 double floor = 1e-6) {
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric[i]), floor});
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
  }
  return worst;
}

}  // namespace kgtwig::testing

#endif  // KGTWIG_TESTS_SUPPORT_ORACLES_HPP_
