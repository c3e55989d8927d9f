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

// Per-query structural features computed from the training split only.

#ifndef KGTWIG_GRAPH_FEATURES_HPP_
#define KGTWIG_GRAPH_FEATURES_HPP_

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kgtwig/kg_store.hpp"
#include "kgtwig/util.hpp"

namespace kgtwig {

enum class Direction : std::uint8_t { kHead, kTail };

inline std::string_view direction_name(Direction d) { return d == Direction::kHead ? "head" : "tail"; }

inline Direction parse_direction(std::string_view name) {
  if (name == "head") return Direction::kHead;
  if (name == "tail") return Direction::kTail;
  throw std::invalid_argument("unknown direction '" + std::string(name) + "'");
}

// Column order of the structural feature vector.
enum class Feature : std::size_t {
  kIsHead,
  kSDeg,
  kODeg,
  kPFreq,
  kSPCofreq,
  kOPCofreq,
  kSOCofreq,
  kSMinDegNeighbour,
  kSMaxDegNeighbour,
  kSMeanDegNeighbour,
  kOMinDegNeighbour,
  kOMaxDegNeighbour,
  kOMeanDegNeighbour,
  kSNumNeighbours,
  kONumNeighbours,
  kSMinFreqEdge,
  kSMaxFreqEdge,
  kSMeanFreqEdge,
  kOMinFreqEdge,
  kOMaxFreqEdge,
  kOMeanFreqEdge,
  kSNumEdges,
  kONumEdges,
};

inline constexpr std::size_t kNumStructuralFeatures = 23;

inline constexpr std::array<std::string_view, kNumStructuralFeatures> kFeatureNames = {
    "is_head",
    "s_deg",
    "o_deg",
    "p_freq",
    "s_p_cofreq",
    "o_p_cofreq",
    "s_o_cofreq",
    "s_min_deg_neighbour",
    "s_max_deg_neighbour",
    "s_mean_deg_neighbour",
    "o_min_deg_neighbour",
    "o_max_deg_neighbour",
    "o_mean_deg_neighbour",
    "s_num_neighbours",
    "o_num_neighbours",
    "s_min_freq_edge",
    "s_max_freq_edge",
    "s_mean_freq_edge",
    "o_min_freq_edge",
    "o_max_freq_edge",
    "o_mean_freq_edge",
    "s_num_edges",
    "o_num_edges",
};

struct QueryFeatureVector {
  std::array<double, kNumStructuralFeatures> values{};

  double operator[](Feature f) const { return values[static_cast<std::size_t>(f)]; }
  double& operator[](Feature f) { return values[static_cast<std::size_t>(f)]; }

  friend bool operator==(const QueryFeatureVector&, const QueryFeatureVector&) = default;
};

struct NodeStats {
  std::uint64_t degree = 0;
  std::vector<EntityId> neighbors;             // sorted, distinct
  std::vector<RelationId> incident_predicates;  // one entry per incident triple end
};

namespace detail {

inline std::uint64_t pair_key(std::uint32_t a, std::uint32_t b) {
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

}  // namespace detail

struct GlobalStats {
  std::vector<std::uint64_t> predicate_frequency;  // indexed by relation id
  std::unordered_map<std::uint64_t, std::uint64_t> sp_cofreq;
  std::unordered_map<std::uint64_t, std::uint64_t> op_cofreq;
  std::unordered_map<std::uint64_t, std::uint64_t> so_cofreq;

  std::uint64_t p_freq(RelationId p) const {
    return p < predicate_frequency.size() ? predicate_frequency[p] : 0;
  }
  std::uint64_t sp(EntityId s, RelationId p) const { return lookup(sp_cofreq, detail::pair_key(s, p)); }
  std::uint64_t op(EntityId o, RelationId p) const { return lookup(op_cofreq, detail::pair_key(o, p)); }
  std::uint64_t so(EntityId s, EntityId o) const { return lookup(so_cofreq, detail::pair_key(s, o)); }

 private:
  static std::uint64_t lookup(const std::unordered_map<std::uint64_t, std::uint64_t>& m,
                              std::uint64_t key) {
    auto it = m.find(key);
    return it == m.end() ? 0 : it->second;
  }
};

// Per-node aggregates that featurize_query needs, precomputed once.
struct NodeSummary {
  double num_neighbours = 0;
  double min_deg_neighbour = 0;
  double max_deg_neighbour = 0;
  double mean_deg_neighbour = 0;
  double min_freq_edge = 0;
  double max_freq_edge = 0;
  double mean_freq_edge = 0;
  double num_edges = 0;
};

struct GraphStats {
  std::vector<NodeStats> nodes;  // indexed by entity id
  GlobalStats global;
  std::vector<NodeSummary> summaries;
  std::size_t train_triples = 0;
};

// Degree is undirected incidence: each training triple adds one to both
// endpoints, so a self-loop adds two to its node.
inline GraphStats build_stats(const KnowledgeGraph& kg) {
  GraphStats stats;
  const auto n = kg.entity_count();
  stats.nodes.resize(n);
  stats.global.predicate_frequency.assign(kg.relation_count(), 0);
  stats.train_triples = kg.train().size();

  for (const Triple& t : kg.train()) {
    auto& s = stats.nodes[t.s];
    auto& o = stats.nodes[t.o];
    s.degree += 1;
    o.degree += 1;
    s.incident_predicates.push_back(t.p);
    o.incident_predicates.push_back(t.p);
    s.neighbors.push_back(t.o);
    o.neighbors.push_back(t.s);
    stats.global.predicate_frequency[t.p] += 1;
    stats.global.sp_cofreq[detail::pair_key(t.s, t.p)] += 1;
    stats.global.op_cofreq[detail::pair_key(t.o, t.p)] += 1;
    stats.global.so_cofreq[detail::pair_key(t.s, t.o)] += 1;
  }

  stats.summaries.resize(n);
  for (std::size_t e = 0; e < n; ++e) {
    auto& node = stats.nodes[e];
    std::sort(node.neighbors.begin(), node.neighbors.end());
    node.neighbors.erase(std::unique(node.neighbors.begin(), node.neighbors.end()),
                         node.neighbors.end());

    NodeSummary& sum = stats.summaries[e];
    sum.num_neighbours = static_cast<double>(node.neighbors.size());
    if (!node.neighbors.empty()) {
      std::uint64_t lo = std::numeric_limits<std::uint64_t>::max(), hi = 0, total = 0;
      for (EntityId nb : node.neighbors) {
        const auto d = stats.nodes[nb].degree;
        lo = std::min(lo, d);
        hi = std::max(hi, d);
        total += d;
      }
      sum.min_deg_neighbour = static_cast<double>(lo);
      sum.max_deg_neighbour = static_cast<double>(hi);
      sum.mean_deg_neighbour = static_cast<double>(total) / static_cast<double>(node.neighbors.size());
    }
    if (!node.incident_predicates.empty()) {
      std::uint64_t lo = std::numeric_limits<std::uint64_t>::max(), hi = 0, total = 0;
      for (RelationId p : node.incident_predicates) {
        const auto f = stats.global.predicate_frequency[p];
        lo = std::min(lo, f);
        hi = std::max(hi, f);
        total += f;
      }
      sum.min_freq_edge = static_cast<double>(lo);
      sum.max_freq_edge = static_cast<double>(hi);
      sum.mean_freq_edge =
          static_cast<double>(total) / static_cast<double>(node.incident_predicates.size());
      auto preds = node.incident_predicates;
      std::sort(preds.begin(), preds.end());
      sum.num_edges = static_cast<double>(std::unique(preds.begin(), preds.end()) - preds.begin());
    }
  }
  return stats;
}

// Both endpoint groups always describe the ground-truth triple; only the
// is_head flag depends on the direction.
inline QueryFeatureVector featurize_query(const Triple& t, Direction direction, const GraphStats& stats) {
  QueryFeatureVector fv;
  const auto& g = stats.global;
  const auto deg = [&](EntityId e) {
    return e < stats.nodes.size() ? static_cast<double>(stats.nodes[e].degree) : 0.0;
  };
  const NodeSummary empty{};
  const NodeSummary& ss = t.s < stats.summaries.size() ? stats.summaries[t.s] : empty;
  const NodeSummary& os = t.o < stats.summaries.size() ? stats.summaries[t.o] : empty;

  fv[Feature::kIsHead] = direction == Direction::kHead ? 1.0 : 0.0;
  fv[Feature::kSDeg] = deg(t.s);
  fv[Feature::kODeg] = deg(t.o);
  fv[Feature::kPFreq] = static_cast<double>(g.p_freq(t.p));
  fv[Feature::kSPCofreq] = static_cast<double>(g.sp(t.s, t.p));
  fv[Feature::kOPCofreq] = static_cast<double>(g.op(t.o, t.p));
  fv[Feature::kSOCofreq] = static_cast<double>(g.so(t.s, t.o));
  fv[Feature::kSMinDegNeighbour] = ss.min_deg_neighbour;
  fv[Feature::kSMaxDegNeighbour] = ss.max_deg_neighbour;
  fv[Feature::kSMeanDegNeighbour] = ss.mean_deg_neighbour;
  fv[Feature::kOMinDegNeighbour] = os.min_deg_neighbour;
  fv[Feature::kOMaxDegNeighbour] = os.max_deg_neighbour;
  fv[Feature::kOMeanDegNeighbour] = os.mean_deg_neighbour;
  fv[Feature::kSNumNeighbours] = ss.num_neighbours;
  fv[Feature::kONumNeighbours] = os.num_neighbours;
  fv[Feature::kSMinFreqEdge] = ss.min_freq_edge;
  fv[Feature::kSMaxFreqEdge] = ss.max_freq_edge;
  fv[Feature::kSMeanFreqEdge] = ss.mean_freq_edge;
  fv[Feature::kOMinFreqEdge] = os.min_freq_edge;
  fv[Feature::kOMaxFreqEdge] = os.max_freq_edge;
  fv[Feature::kOMeanFreqEdge] = os.mean_freq_edge;
  fv[Feature::kSNumEdges] = ss.num_edges;
  fv[Feature::kONumEdges] = os.num_edges;
  return fv;
}

struct QueryKey {
  std::size_t triple_index = 0;
  Direction direction = Direction::kHead;

  friend bool operator==(const QueryKey&, const QueryKey&) = default;
};

// Two rows per triple of the chosen split: head query, then tail query.
struct FeatureTable {
  std::string kg_name;
  Split split = Split::kTest;
  std::vector<QueryKey> keys;
  std::vector<QueryFeatureVector> rows;

  std::size_t size() const noexcept { return rows.size(); }
};

inline FeatureTable featurize_kg(const KnowledgeGraph& kg, const GraphStats& stats, Split split) {
  FeatureTable table;
  table.kg_name = kg.name();
  table.split = split;
  const auto& triples = kg.split(split);
  table.keys.reserve(2 * triples.size());
  table.rows.reserve(2 * triples.size());
  for (std::size_t i = 0; i < triples.size(); ++i) {
    for (Direction d : {Direction::kHead, Direction::kTail}) {
      table.keys.push_back({i, d});
      table.rows.push_back(featurize_query(triples[i], d, stats));
    }
  }
  return table;
}

inline FeatureTable featurize_kg(const KnowledgeGraph& kg, Split split) {
  return featurize_kg(kg, build_stats(kg), split);
}

inline std::string feature_table_to_csv(const FeatureTable& table) {
  std::string out = "triple_index,direction";
  for (auto name : kFeatureNames) {
    out += ',';
    out += name;
  }
  out += '\n';
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out += std::to_string(table.keys[r].triple_index);
    out += ',';
    out += direction_name(table.keys[r].direction);
    for (double v : table.rows[r].values) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

}  // namespace kgtwig

#endif  // KGTWIG_GRAPH_FEATURES_HPP_
