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

// Rank-based link prediction evaluation and MRR.

#ifndef KGTWIG_LP_EVAL_HPP_
#define KGTWIG_LP_EVAL_HPP_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "kgtwig/complex_model.hpp"
#include "kgtwig/graph_features.hpp"
#include "kgtwig/hyperparams.hpp"
#include "kgtwig/kg_store.hpp"
#include "kgtwig/util.hpp"

namespace kgtwig {

enum class TiePolicy : std::uint8_t { kRealistic, kOptimistic, kPessimistic };

inline std::string_view tie_policy_name(TiePolicy p) {
  switch (p) {
    case TiePolicy::kRealistic: return "realistic";
    case TiePolicy::kOptimistic: return "optimistic";
    case TiePolicy::kPessimistic: return "pessimistic";
  }
  return "?";
}

inline TiePolicy parse_tie_policy(std::string_view name) {
  if (name == "realistic") return TiePolicy::kRealistic;
  if (name == "optimistic") return TiePolicy::kOptimistic;
  if (name == "pessimistic") return TiePolicy::kPessimistic;
  throw std::invalid_argument("unknown tie policy '" + std::string(name) + "'");
}

struct RankOptions {
  bool filtered = true;
  TiePolicy tie_policy = TiePolicy::kRealistic;
};

inline double rank_from_counts(std::size_t higher, std::size_t tied, TiePolicy policy) {
  switch (policy) {
    case TiePolicy::kOptimistic: return 1.0 + static_cast<double>(higher);
    case TiePolicy::kPessimistic: return 1.0 + static_cast<double>(higher + tied);
    case TiePolicy::kRealistic: break;
  }
  return 1.0 + static_cast<double>(higher) + static_cast<double>(tied) / 2.0;
}

// Rank of `true_score` among the surviving candidate scores (excluding the
// true answer itself).
inline double rank_among(double true_score, std::span<const double> other_scores,
                         TiePolicy policy = TiePolicy::kRealistic) {
  std::size_t higher = 0, tied = 0;
  for (double s : other_scores) {
    if (s > true_score) {
      ++higher;
    } else if (s == true_score) {
      ++tied;
    }
  }
  return rank_from_counts(higher, tied, policy);
}

// A head query (?, p, o) substitutes every entity for s; a tail query
// (s, p, ?) substitutes for o. Known triples other than the answer are
// dropped from the candidate list when filtering.
inline double rank_query(const ComplexModel& model, const Triple& query, Direction direction,
                         const KnowledgeGraph& kg, const RankOptions& options = {}) {
  const double true_score = model.score(query);
  const auto n = static_cast<EntityId>(kg.entity_count());
  const EntityId answer = direction == Direction::kHead ? query.s : query.o;
  std::size_t higher = 0, tied = 0;
  Triple candidate = query;
  for (EntityId e = 0; e < n; ++e) {
    if (e == answer) continue;
    (direction == Direction::kHead ? candidate.s : candidate.o) = e;
    if (options.filtered && kg.contains(candidate)) continue;
    const double s = model.score(candidate);
    if (s > true_score) {
      ++higher;
    } else if (s == true_score) {
      ++tied;
    }
  }
  return rank_from_counts(higher, tied, options.tie_policy);
}

inline double mrr(std::span<const double> ranks) {
  if (ranks.empty()) throw std::invalid_argument("mrr: empty rank sequence");
  double acc = 0.0;
  for (double r : ranks) {
    if (!(r >= 1.0)) throw std::invalid_argument("mrr: rank below 1");
    acc += 1.0 / r;
  }
  return acc / static_cast<double>(ranks.size());
}

struct RankRecord {
  std::size_t triple_index = 0;
  Direction direction = Direction::kHead;
  double rank = 1.0;

  friend bool operator==(const RankRecord&, const RankRecord&) = default;
};

struct RunResult {
  std::string kg_name;
  HyperparamConfig config;
  std::uint64_t seed = 0;
  RankOptions eval_options;
  std::vector<RankRecord> ranks;
  double mrr = 0.0;

  std::vector<double> rank_values() const {
    std::vector<double> out;
    out.reserve(ranks.size());
    for (const auto& r : ranks) out.push_back(r.rank);
    return out;
  }
};

// Records follow test-split order, head query before tail query.
inline RunResult evaluate(const ComplexModel& model, const KnowledgeGraph& kg, const HyperparamConfig& config,
                          std::uint64_t seed, const RankOptions& options = {}) {
  RunResult result;
  result.kg_name = kg.name();
  result.config = config;
  result.seed = seed;
  result.eval_options = options;
  result.ranks.reserve(2 * kg.test().size());
  for (std::size_t i = 0; i < kg.test().size(); ++i) {
    for (Direction d : {Direction::kHead, Direction::kTail}) {
      result.ranks.push_back({i, d, rank_query(model, kg.test()[i], d, kg, options)});
    }
  }
  result.mrr = mrr(result.rank_values());
  return result;
}

// --- persistence: <root>/<kg>/<config-hash>/<seed>.{csv,json} ---

struct RunPaths {
  std::filesystem::path csv;
  std::filesystem::path json;
};

inline RunPaths run_paths(const std::filesystem::path& root, std::string_view kg_name,
                          const HyperparamConfig& config, std::uint64_t seed) {
  const auto dir = root / std::string(kg_name) / config.hash();
  return {dir / (std::to_string(seed) + ".csv"), dir / (std::to_string(seed) + ".json")};
}

inline std::string ranks_to_csv(const std::vector<RankRecord>& ranks) {
  std::string out = "triple_index,direction,rank\n";
  for (const auto& r : ranks) {
    out += std::to_string(r.triple_index);
    out += ',';
    out += direction_name(r.direction);
    out += ',';
    out += format_double(r.rank);
    out += '\n';
  }
  return out;
}

inline std::vector<RankRecord> ranks_from_csv(const std::string& text) {
  std::vector<RankRecord> out;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "triple_index,direction,rank") {
    throw std::runtime_error("rank file: bad header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw std::runtime_error("rank file: malformed line '" + line + "'");
    }
    RankRecord r;
    r.triple_index = std::stoull(line.substr(0, c1));
    r.direction = parse_direction(line.substr(c1 + 1, c2 - c1 - 1));
    r.rank = parse_double(std::string_view(line).substr(c2 + 1));
    out.push_back(r);
  }
  return out;
}

inline nlohmann::json run_sidecar_json(const RunResult& r, std::string_view csv_text) {
  return nlohmann::json{{"kg", r.kg_name},
                        {"config", r.config},
                        {"config_hash", r.config.hash()},
                        {"seed", r.seed},
                        {"filtered", r.eval_options.filtered},
                        {"tie_policy", tie_policy_name(r.eval_options.tie_policy)},
                        {"num_queries", r.ranks.size()},
                        {"mrr", r.mrr},
                        {"ranks_fnv1a", to_hex(fnv1a64(csv_text))}};
}

// The sidecar is written last and marks the run as complete.
inline RunPaths save_run_result(const std::filesystem::path& root, const RunResult& r) {
  const auto paths = run_paths(root, r.kg_name, r.config, r.seed);
  const std::string csv = ranks_to_csv(r.ranks);
  write_file_atomic(paths.csv, csv);
  write_file_atomic(paths.json, run_sidecar_json(r, csv).dump(2) + "\n");
  return paths;
}

class CorruptRunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Loads and verifies a stored run: the rank file must match the recorded
// content hash and the stored MRR must equal the recomputed one.
inline RunResult load_run_result(const std::filesystem::path& json_path) {
  nlohmann::json side;
  try {
    side = nlohmann::json::parse(read_file(json_path));
  } catch (const nlohmann::json::exception& e) {
    throw CorruptRunError(json_path.string() + ": " + e.what());
  }
  auto csv_path = json_path;
  csv_path.replace_extension(".csv");
  const std::string csv = read_file(csv_path);
  if (to_hex(fnv1a64(csv)) != side.at("ranks_fnv1a").get<std::string>()) {
    throw CorruptRunError(csv_path.string() + ": content hash mismatch");
  }
  RunResult r;
  r.kg_name = side.at("kg").get<std::string>();
  r.config = side.at("config").get<HyperparamConfig>();
  if (r.config.hash() != side.at("config_hash").get<std::string>()) {
    throw CorruptRunError(json_path.string() + ": config hash mismatch");
  }
  r.seed = side.at("seed").get<std::uint64_t>();
  r.eval_options.filtered = side.at("filtered").get<bool>();
  r.eval_options.tie_policy = parse_tie_policy(side.at("tie_policy").get<std::string>());
  r.ranks = ranks_from_csv(csv);
  r.mrr = side.at("mrr").get<double>();
  if (std::abs(mrr(r.rank_values()) - r.mrr) > 1e-12) {
    throw CorruptRunError(json_path.string() + ": stored MRR disagrees with rank records");
  }
  return r;
}

}  // namespace kgtwig

#endif  // KGTWIG_LP_EVAL_HPP_
