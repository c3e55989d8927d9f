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

// Assembles rank batches from stored ground truth and runs the
// unseen-hyperparameter and held-out-KG protocols end to end.

#ifndef KGTWIG_EXPERIMENT_HPP_
#define KGTWIG_EXPERIMENT_HPP_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "kgtwig/graph_features.hpp"
#include "kgtwig/grid.hpp"
#include "kgtwig/lp_eval.hpp"
#include "kgtwig/metrics.hpp"
#include "kgtwig/split.hpp"
#include "kgtwig/twig_train.hpp"

namespace kgtwig {

class MissingCellError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Test-split feature tables plus rank records for each
// (kg, config, replicate) cell.
class GroundTruth {
 public:
  void add_kg(std::string name, std::size_t entity_count, FeatureTable features) {
    if (index_.count(name)) throw std::invalid_argument("GroundTruth: duplicate KG " + name);
    index_[name] = kgs_.size();
    kgs_.push_back({name, entity_count, std::make_shared<const FeatureTable>(std::move(features))});
  }

  void add_kg(const KnowledgeGraph& kg) { add_kg(kg.name(), kg.entity_count(), featurize_kg(kg, Split::kTest)); }

  void add_run(RunResult r) {
    const Entry& e = entry(r.kg_name);
    if (r.ranks.size() != e.features->size()) {
      throw std::invalid_argument("GroundTruth: run " + r.kg_name + "/" + r.config.hash() +
                                  " has a different query count than the KG's test features");
    }
    for (std::size_t i = 0; i < r.ranks.size(); ++i) {
      if (r.ranks[i].triple_index != e.features->keys[i].triple_index ||
          r.ranks[i].direction != e.features->keys[i].direction) {
        throw std::invalid_argument("GroundTruth: rank records out of query order for " + r.kg_name);
      }
    }
    auto key = std::make_tuple(r.kg_name, r.config.hash(), r.seed);
    runs_.insert_or_assign(std::move(key), std::move(r));
  }

  const RunResult& run(const std::string& kg, const HyperparamConfig& config, std::uint64_t seed) const {
    auto it = runs_.find(std::make_tuple(kg, config.hash(), seed));
    if (it == runs_.end()) {
      throw MissingCellError("missing ground-truth cell " + kg + "/" + config.hash() + "/" +
                             std::to_string(seed) + " (" + config.canonical_string() + ")");
    }
    return it->second;
  }

  RankBatch batch(const std::string& kg, const HyperparamConfig& config, std::uint64_t seed) const {
    const Entry& e = entry(kg);
    const RunResult& r = run(kg, config, seed);
    return RankBatch{kg, config, seed, e.entity_count, e.features, r.rank_values()};
  }

  std::vector<std::string> kg_names() const {
    std::vector<std::string> out;
    for (const auto& e : kgs_) out.push_back(e.name);
    return out;
  }

  std::size_t run_count() const noexcept { return runs_.size(); }

 private:
  struct Entry {
    std::string name;
    std::size_t entity_count;
    std::shared_ptr<const FeatureTable> features;
  };

  const Entry& entry(const std::string& kg) const {
    auto it = index_.find(kg);
    if (it == index_.end()) throw std::invalid_argument("GroundTruth: unknown KG " + kg);
    return kgs_[it->second];
  }

  std::vector<Entry> kgs_;
  std::map<std::string, std::size_t> index_;
  std::map<std::tuple<std::string, std::string, std::uint64_t>, RunResult> runs_;
};

// Loads every stored cell of the grid for the given KGs; absent cells are
// left out and reported when an experiment asks for them. With `eval` set,
// cells produced under another ranking protocol count as absent.
inline GroundTruth load_ground_truth(const std::vector<KnowledgeGraph>& kgs, const GridSpec& spec,
                                     const std::filesystem::path& root, const RankOptions* eval = nullptr) {
  GroundTruth gt;
  const auto configs = enumerate_grid(spec);
  for (const auto& kg : kgs) {
    gt.add_kg(kg);
    for (const auto& c : configs) {
      for (auto seed : spec.replicate_seeds) {
        const auto paths = run_paths(root, kg.name(), c, seed);
        if (!std::filesystem::exists(paths.json)) continue;
        RunResult r = load_run_result(paths.json);
        if (eval && (r.eval_options.filtered != eval->filtered || r.eval_options.tie_policy != eval->tie_policy)) {
          continue;
        }
        gt.add_run(std::move(r));
      }
    }
  }
  return gt;
}

struct ExperimentSettings {
  TwigSettings twig;
  int finetune_epochs = 10;
  double finetune_learning_rate = 5e-3;
};

struct ConfigPrediction {
  HyperparamConfig config;
  double true_mrr = 0.0;  // mean over replicates
  double predicted_mrr = 0.0;
};

struct KgReport {
  std::string kg;
  std::string role;  // "seen" or "holdout"
  std::vector<ConfigPrediction> pairs;
  std::optional<double> r2;
  std::string note;
};

struct ExperimentReport {
  SplitPlan plan;
  std::string grid_hash;
  std::vector<std::uint64_t> seeds;
  std::string checkpoint_id;
  std::vector<KgReport> kgs;

  const KgReport& kg(const std::string& name) const {
    for (const auto& k : kgs) {
      if (k.kg == name) return k;
    }
    throw std::out_of_range("report has no KG " + name);
  }
};

inline std::string checkpoint_id(const TwigModel& model) {
  return to_hex(fnv1a64(twig_checkpoint_json(model).dump()));
}

namespace detail {

inline std::vector<std::string> seen_kgs(const GroundTruth& gt, const SplitPlan& plan) {
  std::vector<std::string> out;
  bool found = plan.mode != SplitMode::kHoldoutKg;
  for (const auto& name : gt.kg_names()) {
    if (plan.mode == SplitMode::kHoldoutKg && name == plan.holdout_kg) {
      found = true;
      continue;
    }
    out.push_back(name);
  }
  if (!found) throw std::invalid_argument("held-out KG " + plan.holdout_kg + " has no ground truth");
  return out;
}

inline std::vector<RankBatch> batches_for(const GroundTruth& gt, const std::vector<std::string>& kgs,
                                          const std::vector<HyperparamConfig>& configs,
                                          const std::vector<std::size_t>& which,
                                          const std::vector<std::uint64_t>& seeds) {
  std::vector<RankBatch> out;
  for (const auto& kg : kgs) {
    for (std::size_t idx : which) {
      for (auto seed : seeds) out.push_back(gt.batch(kg, configs.at(idx), seed));
    }
  }
  return out;
}

}  // namespace detail

inline std::vector<RankBatch> training_batches(const GroundTruth& gt, const std::vector<HyperparamConfig>& configs,
                                               const std::vector<std::uint64_t>& seeds, const SplitPlan& plan,
                                               const ConfigSplit& split) {
  return detail::batches_for(gt, detail::seen_kgs(gt, plan), configs, split.train, seeds);
}

inline std::vector<RankBatch> finetune_batches(const GroundTruth& gt, const std::vector<HyperparamConfig>& configs,
                                               const std::vector<std::uint64_t>& seeds, const SplitPlan& plan,
                                               const ConfigSplit& split) {
  if (plan.mode != SplitMode::kHoldoutKg) return {};
  return detail::batches_for(gt, {plan.holdout_kg}, configs, split.finetune, seeds);
}

// Per-KG R² between replicate-mean true MRR and predicted MRR over the
// evaluation configs of each KG.
inline ExperimentReport evaluate_twig(const TwigModel& model, const GroundTruth& gt,
                                      const std::vector<HyperparamConfig>& configs,
                                      const std::vector<std::uint64_t>& seeds, const SplitPlan& plan,
                                      const ConfigSplit& split, std::string grid_hash = {}) {
  ExperimentReport report;
  report.plan = plan;
  report.grid_hash = std::move(grid_hash);
  report.seeds = seeds;
  report.checkpoint_id = checkpoint_id(model);

  auto assess = [&](const std::string& kg, const std::string& role, const std::vector<std::size_t>& which) {
    KgReport kr;
    kr.kg = kg;
    kr.role = role;
    std::vector<double> truth, pred;
    for (std::size_t idx : which) {
      const auto& c = configs.at(idx);
      double mean = 0.0;
      for (auto seed : seeds) mean += gt.run(kg, c, seed).mrr;
      mean /= static_cast<double>(seeds.size());
      // Features and config are identical across replicates, so one
      // prediction serves every seed.
      const double predicted = predict_mrr(model, gt.batch(kg, c, seeds.front()));
      kr.pairs.push_back({c, mean, predicted});
      truth.push_back(mean);
      pred.push_back(predicted);
    }
    if (truth.empty()) {
      kr.note = "no evaluation configs";
    } else {
      try {
        kr.r2 = r_squared(truth, pred);
      } catch (const std::exception& e) {
        kr.note = e.what();
      }
    }
    report.kgs.push_back(std::move(kr));
  };

  for (const auto& kg : detail::seen_kgs(gt, plan)) assess(kg, "seen", split.test);
  if (plan.mode == SplitMode::kHoldoutKg) assess(plan.holdout_kg, "holdout", split.holdout_test);
  return report;
}

// Train on the seen KGs' training configs, finetune on the held-out KG's
// shot configs when requested, then evaluate.
inline ExperimentReport run_experiment(const GroundTruth& gt, const GridSpec& spec, const SplitPlan& plan,
                                       const ExperimentSettings& settings, TwigModel* trained = nullptr) {
  const auto configs = enumerate_grid(spec);
  const ConfigSplit split = make_split(configs.size(), plan);
  const auto train_runs = training_batches(gt, configs, spec.replicate_seeds, plan, split);
  TwigModel model = train_twig(train_runs, settings.twig);
  if (plan.mode == SplitMode::kHoldoutKg && !split.finetune.empty()) {
    const auto ft_runs = finetune_batches(gt, configs, spec.replicate_seeds, plan, split);
    model = finetune_twig(std::move(model), ft_runs, settings.finetune_epochs, settings.finetune_learning_rate,
                          settings.twig.seed);
  }
  ExperimentReport report = evaluate_twig(model, gt, configs, spec.replicate_seeds, plan, split, grid_hash(spec));
  if (trained) *trained = std::move(model);
  return report;
}

inline nlohmann::json report_to_json(const ExperimentReport& r) {
  nlohmann::json kgs = nlohmann::json::array();
  for (const auto& k : r.kgs) {
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : k.pairs) {
      pairs.push_back({{"config_hash", p.config.hash()},
                       {"config", p.config},
                       {"true_mrr", p.true_mrr},
                       {"predicted_mrr", p.predicted_mrr}});
    }
    kgs.push_back({{"kg", k.kg},
                   {"role", k.role},
                   {"r2", k.r2 ? nlohmann::json(*k.r2) : nlohmann::json(nullptr)},
                   {"note", k.note},
                   {"pairs", pairs}});
  }
  return nlohmann::json{{"format", "kgtwig-report-v1"},
                        {"plan", r.plan},
                        {"provenance", {{"grid_hash", r.grid_hash}, {"seeds", r.seeds}, {"checkpoint_id", r.checkpoint_id}}},
                        {"kgs", kgs}};
}

// Recomputes every stored R² from its stored pairs; returns the largest
// absolute discrepancy (0 when all match or are absent on both sides).
inline double verify_report_json(const nlohmann::json& report) {
  double worst = 0.0;
  for (const auto& k : report.at("kgs")) {
    std::vector<double> truth, pred;
    for (const auto& p : k.at("pairs")) {
      truth.push_back(p.at("true_mrr").get<double>());
      pred.push_back(p.at("predicted_mrr").get<double>());
    }
    std::optional<double> recomputed;
    try {
      if (!truth.empty()) recomputed = r_squared(truth, pred);
    } catch (const std::domain_error&) {
    }
    const bool stored = !k.at("r2").is_null();
    if (stored != recomputed.has_value()) return std::numeric_limits<double>::infinity();
    if (stored) worst = std::max(worst, std::abs(k.at("r2").get<double>() - *recomputed));
  }
  return worst;
}

}  // namespace kgtwig

#endif  // KGTWIG_EXPERIMENT_HPP_
