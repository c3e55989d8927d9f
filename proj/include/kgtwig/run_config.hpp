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

// Run configuration file (JSON) shared by the CLI subcommands.
//
//   {
//     "kgs":   [{"name": "umls", "train": "...", "valid": "...", "test": "..."}],
//     "grid":  {"samplers": ["basic"], "negatives": [5, 25], ..., "seeds": [1, 2]},
//     "split": {"mode": "holdout-kg", "holdout_kg": "umls", "shot_fraction": 0.05},
//     "twig":  {"phase1_epochs": 5, "phase2_epochs": 10, "learning_rate": 0.005},
//     "finetune": {"epochs": 10, "learning_rate": 0.005},
//     "eval":  {"filtered": true, "tie_policy": "realistic"},
//     "train": {"batch_size": 128}
//   }
//
// Relative KG paths resolve against the config file's directory.

#ifndef KGTWIG_RUN_CONFIG_HPP_
#define KGTWIG_RUN_CONFIG_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kgtwig/experiment.hpp"
#include "kgtwig/grid.hpp"
#include "kgtwig/kg_store.hpp"
#include "kgtwig/kge_trainer.hpp"
#include "kgtwig/lp_eval.hpp"
#include "kgtwig/split.hpp"
#include "kgtwig/twig_train.hpp"
#include "kgtwig/util.hpp"

namespace kgtwig {

struct KgSource {
  std::string name;
  std::filesystem::path train, valid, test;
};

struct RunConfig {
  std::vector<KgSource> kgs;
  GridSpec grid;
  SplitPlan split;
  ExperimentSettings experiment;
  RankOptions eval;
  TrainOptions train;

  std::vector<KnowledgeGraph> load_kgs() const {
    std::vector<KnowledgeGraph> out;
    for (const auto& k : kgs) out.push_back(parse_kg(k.train, k.valid, k.test, k.name));
    return out;
  }
};

inline RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  RunConfig rc;
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };
  for (const auto& k : j.value("kgs", nlohmann::json::array())) {
    rc.kgs.push_back({k.at("name").get<std::string>(), resolve(k.at("train").get<std::string>()),
                      resolve(k.at("valid").get<std::string>()), resolve(k.at("test").get<std::string>())});
  }
  if (j.contains("grid")) rc.grid = j.at("grid").get<GridSpec>();
  if (j.contains("split")) rc.split = j.at("split").get<SplitPlan>();
  if (j.contains("twig")) rc.experiment.twig = j.at("twig").get<TwigSettings>();
  if (j.contains("finetune")) {
    rc.experiment.finetune_epochs = j.at("finetune").value("epochs", 10);
    rc.experiment.finetune_learning_rate = j.at("finetune").value("learning_rate", 5e-3);
  }
  if (j.contains("eval")) {
    rc.eval.filtered = j.at("eval").value("filtered", true);
    rc.eval.tie_policy = parse_tie_policy(j.at("eval").value("tie_policy", std::string("realistic")));
  }
  if (j.contains("train")) rc.train.batch_size = j.at("train").value("batch_size", std::size_t{128});
  return rc;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(nlohmann::json::parse(read_file(path)), path.parent_path());
}

inline nlohmann::json run_config_to_json(const RunConfig& rc) {
  nlohmann::json kgs = nlohmann::json::array();
  for (const auto& k : rc.kgs) {
    kgs.push_back({{"name", k.name}, {"train", k.train.string()}, {"valid", k.valid.string()}, {"test", k.test.string()}});
  }
  return nlohmann::json{{"kgs", kgs},
                        {"grid", rc.grid},
                        {"split", rc.split},
                        {"twig", rc.experiment.twig},
                        {"finetune",
                         {{"epochs", rc.experiment.finetune_epochs},
                          {"learning_rate", rc.experiment.finetune_learning_rate}}},
                        {"eval", {{"filtered", rc.eval.filtered}, {"tie_policy", tie_policy_name(rc.eval.tie_policy)}}},
                        {"train", {{"batch_size", rc.train.batch_size}}}};
}

}  // namespace kgtwig

#endif  // KGTWIG_RUN_CONFIG_HPP_
