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

// Knowledge graph storage: label dictionaries plus fixed train/valid/test
// splits of integer-indexed triples.

#ifndef KGTWIG_KG_STORE_HPP_
#define KGTWIG_KG_STORE_HPP_

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "kgtwig/util.hpp"

namespace kgtwig {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

struct Triple {
  EntityId s = 0;
  RelationId p = 0;
  EntityId o = 0;

  friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct TripleHash {
  std::size_t operator()(const Triple& t) const noexcept {
    std::uint64_t h = (static_cast<std::uint64_t>(t.s) << 32) ^ t.o;
    h ^= static_cast<std::uint64_t>(t.p) * 0x9e3779b97f4a7c15ULL;
    h ^= h >> 29;
    return static_cast<std::size_t>(h * 0xbf58476d1ce4e5b9ULL);
  }
};

enum class Split { kTrain, kValid, kTest };

inline std::string_view split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kValid: return "valid";
    case Split::kTest: return "test";
  }
  return "?";
}

inline Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "valid") return Split::kValid;
  if (name == "test") return Split::kTest;
  throw std::invalid_argument("unknown split '" + std::string(name) + "'");
}

class ParseError : public std::runtime_error {
 public:
  ParseError(std::string file, std::size_t line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bijection between labels and dense ids, assigned in first-seen order.
class Dictionary {
 public:
  std::uint32_t intern(std::string_view label) {
    auto it = ids_.find(std::string(label));
    if (it != ids_.end()) return it->second;
    const auto id = static_cast<std::uint32_t>(labels_.size());
    labels_.emplace_back(label);
    ids_.emplace(labels_.back(), id);
    return id;
  }

  std::optional<std::uint32_t> find(std::string_view label) const {
    auto it = ids_.find(std::string(label));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& label(std::uint32_t id) const { return labels_.at(id); }
  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  friend bool operator==(const Dictionary& a, const Dictionary& b) { return a.labels_ == b.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::uint32_t> ids_;
};

using LabeledTriple = std::array<std::string, 3>;

// Immutable after construction; safe to share across threads.
class KnowledgeGraph {
 public:
  // Interns labels over train, then valid, then test, and validates the
  // split invariants. `source_names` label the splits in error messages.
  static KnowledgeGraph from_labeled(std::string name, const std::vector<LabeledTriple>& train,
                                     const std::vector<LabeledTriple>& valid,
                                     const std::vector<LabeledTriple>& test,
                                     std::array<std::string, 3> source_names = {"train", "valid",
                                                                                "test"}) {
    KnowledgeGraph kg;
    kg.name_ = std::move(name);
    const std::vector<LabeledTriple>* inputs[3] = {&train, &valid, &test};
    std::vector<Triple>* outputs[3] = {&kg.train_, &kg.valid_, &kg.test_};
    for (int i = 0; i < 3; ++i) {
      outputs[i]->reserve(inputs[i]->size());
      for (const auto& [s, p, o] : *inputs[i]) {
        Triple t;
        t.s = kg.entities_.intern(s);
        t.p = kg.relations_.intern(p);
        t.o = kg.entities_.intern(o);
        outputs[i]->push_back(t);
      }
    }
    if (kg.train_.empty()) throw ValidationError(source_names[0] + ": empty split");
    if (kg.test_.empty()) throw ValidationError(source_names[2] + ": empty split");

    std::unordered_set<Triple, TripleHash> seen[3];
    for (int i = 0; i < 3; ++i) {
      seen[i].reserve(outputs[i]->size());
      for (std::size_t k = 0; k < outputs[i]->size(); ++k) {
        const Triple& t = (*outputs[i])[k];
        if (!seen[i].insert(t).second) {
          throw ValidationError(source_names[i] + ": duplicate triple at line " +
                                std::to_string(k + 1) + " (" + kg.describe(t) + ")");
        }
        for (int j = 0; j < i; ++j) {
          if (seen[j].count(t)) {
            throw ValidationError(source_names[i] + ": triple " + kg.describe(t) +
                                  " also appears in " + source_names[j]);
          }
        }
      }
    }
    kg.known_.reserve(kg.train_.size() + kg.valid_.size() + kg.test_.size());
    for (auto& s : seen) kg.known_.merge(s);
    return kg;
  }

  const std::string& name() const noexcept { return name_; }
  const Dictionary& entities() const noexcept { return entities_; }
  const Dictionary& relations() const noexcept { return relations_; }
  const std::vector<Triple>& train() const noexcept { return train_; }
  const std::vector<Triple>& valid() const noexcept { return valid_; }
  const std::vector<Triple>& test() const noexcept { return test_; }

  const std::vector<Triple>& split(Split which) const noexcept {
    switch (which) {
      case Split::kTrain: return train_;
      case Split::kValid: return valid_;
      case Split::kTest: return test_;
    }
    return train_;
  }

  std::size_t entity_count() const noexcept { return entities_.size(); }
  std::size_t relation_count() const noexcept { return relations_.size(); }

  // True if the triple appears in any split.
  bool contains(const Triple& t) const { return known_.count(t) != 0; }

  std::string describe(const Triple& t) const {
    return "(" + entities_.label(t.s) + ", " + relations_.label(t.p) + ", " +
           entities_.label(t.o) + ")";
  }

 private:
  KnowledgeGraph() = default;

  std::string name_;
  Dictionary entities_;
  Dictionary relations_;
  std::vector<Triple> train_;
  std::vector<Triple> valid_;
  std::vector<Triple> test_;
  std::unordered_set<Triple, TripleHash> known_;
};

namespace detail {

inline std::vector<LabeledTriple> read_triple_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  std::vector<LabeledTriple> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    LabeledTriple fields;
    std::size_t count = 0;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      const auto piece = line.substr(start, tab == std::string::npos ? std::string::npos : tab - start);
      if (count < 3) fields[count] = piece;
      ++count;
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (count != 3) {
      throw ParseError(path.string(), line_no,
                       "expected 3 tab-separated fields, found " + std::to_string(count));
    }
    for (const auto& f : fields) {
      if (f.empty()) throw ParseError(path.string(), line_no, "empty field");
    }
    out.push_back(std::move(fields));
  }
  return out;
}

}  // namespace detail

inline KnowledgeGraph parse_kg(const std::filesystem::path& train_file,
                               const std::filesystem::path& valid_file,
                               const std::filesystem::path& test_file, std::string name = {}) {
  if (name.empty()) name = train_file.parent_path().filename().string();
  auto train = detail::read_triple_file(train_file);
  auto valid = detail::read_triple_file(valid_file);
  auto test = detail::read_triple_file(test_file);
  return KnowledgeGraph::from_labeled(std::move(name), train, valid, test,
                                      {train_file.string(), valid_file.string(), test_file.string()});
}

inline std::size_t entity_count(const KnowledgeGraph& kg) noexcept { return kg.entity_count(); }

inline std::string split_to_tsv(const KnowledgeGraph& kg, Split split) {
  std::string out;
  for (const Triple& t : kg.split(split)) {
    out += kg.entities().label(t.s);
    out += '\t';
    out += kg.relations().label(t.p);
    out += '\t';
    out += kg.entities().label(t.o);
    out += '\n';
  }
  return out;
}

inline void write_kg_tsv(const KnowledgeGraph& kg, const std::filesystem::path& dir) {
  for (Split s : {Split::kTrain, Split::kValid, Split::kTest}) {
    write_file_atomic(dir / (std::string(split_name(s)) + ".txt"), split_to_tsv(kg, s));
  }
}

// Dictionary dump for reproducibility audits: labels listed in id order.
inline nlohmann::json dictionaries_to_json(const KnowledgeGraph& kg) {
  return nlohmann::json{{"name", kg.name()},
                        {"entities", kg.entities().labels()},
                        {"relations", kg.relations().labels()},
                        {"split_sizes",
                         {{"train", kg.train().size()},
                          {"valid", kg.valid().size()},
                          {"test", kg.test().size()}}}};
}

}  // namespace kgtwig

#endif  // KGTWIG_KG_STORE_HPP_
