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

// Two-phase training, finetuning, MRR prediction and checkpoints for the
// rank simulator.

#ifndef KGTWIG_TWIG_TRAIN_HPP_
#define KGTWIG_TWIG_TRAIN_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kgtwig/adam.hpp"
#include "kgtwig/graph_features.hpp"
#include "kgtwig/hyperparams.hpp"
#include "kgtwig/lp_eval.hpp"
#include "kgtwig/twig_net.hpp"

namespace kgtwig {

// All queries of one (KG, config, replicate) run. Rows are the raw feature
// vectors of the KG's test queries; they are encoded with the model's
// frozen normalization statistics at use.
struct RankBatch {
  std::string kg_name;
  HyperparamConfig config;
  std::uint64_t seed = 0;
  std::size_t entity_count = 0;
  std::shared_ptr<const FeatureTable> features;
  std::vector<double> ranks;  // aligned with features->rows

  std::size_t size() const noexcept { return ranks.size(); }

  void validate() const {
    if (!features) throw std::invalid_argument("RankBatch " + kg_name + ": no feature table");
    if (features->size() != ranks.size() || ranks.empty()) {
      throw std::invalid_argument("RankBatch " + kg_name + "/" + config.hash() +
                                  ": rank count does not match feature rows");
    }
    if (entity_count == 0) throw std::invalid_argument("RankBatch: entity count must be >= 1");
  }
};

struct TwigSettings {
  int phase1_epochs = 5;
  int phase2_epochs = 10;
  double learning_rate = 5e-3;
  double mse_weight = 1.0;
  std::uint64_t seed = 0;
  TwigArchitecture architecture;
};

inline void to_json(nlohmann::json& j, const TwigSettings& s) {
  j = nlohmann::json{{"phase1_epochs", s.phase1_epochs}, {"phase2_epochs", s.phase2_epochs},
                     {"learning_rate", s.learning_rate}, {"mse_weight", s.mse_weight},
                     {"seed", s.seed},                   {"architecture", s.architecture}};
}

inline void from_json(const nlohmann::json& j, TwigSettings& s) {
  s = TwigSettings{};
  s.phase1_epochs = j.value("phase1_epochs", 5);
  s.phase2_epochs = j.value("phase2_epochs", 10);
  s.learning_rate = j.value("learning_rate", 5e-3);
  s.mse_weight = j.value("mse_weight", 1.0);
  s.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("architecture")) s.architecture = j.at("architecture").get<TwigArchitecture>();
}

enum class TwigPhase : std::uint8_t { kInitialized, kPhase1, kPhase2, kFinetuned };

inline std::string_view phase_name(TwigPhase p) {
  switch (p) {
    case TwigPhase::kInitialized: return "initialized";
    case TwigPhase::kPhase1: return "phase1";
    case TwigPhase::kPhase2: return "phase2";
    case TwigPhase::kFinetuned: return "finetuned";
  }
  return "?";
}

inline TwigPhase parse_phase(std::string_view name) {
  if (name == "initialized") return TwigPhase::kInitialized;
  if (name == "phase1") return TwigPhase::kPhase1;
  if (name == "phase2") return TwigPhase::kPhase2;
  if (name == "finetuned") return TwigPhase::kFinetuned;
  throw std::invalid_argument("unknown training phase '" + std::string(name) + "'");
}

struct BatchId {
  std::string kg;
  std::string config_hash;
  std::uint64_t seed = 0;

  friend bool operator==(const BatchId&, const BatchId&) = default;
};

struct FinetuneRecord {
  int epochs = 0;
  double learning_rate = 0.0;
  std::uint64_t seed = 0;
  std::vector<BatchId> manifest;

  friend bool operator==(const FinetuneRecord&, const FinetuneRecord&) = default;
};

struct TwigModel {
  TwigNetwork network;
  NormStats norm;
  TwigPhase phase = TwigPhase::kInitialized;
  TwigSettings settings;
  std::vector<BatchId> manifest;
  std::vector<FinetuneRecord> finetunes;

  double forward(const EncodedInput& input) const { return network.forward(input); }
};

inline double forward(const TwigModel& model, const EncodedInput& input) { return model.forward(input); }

struct TwigTrace {
  std::vector<double> phase1_losses;  // mean batch loss per epoch
  std::vector<double> phase2_losses;
};

class TwigTrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline BatchId batch_id(const RankBatch& b) { return {b.kg_name, b.config.hash(), b.seed}; }

inline std::string describe(const RankBatch& b) {
  return b.kg_name + "/" + b.config.hash() + "/" + std::to_string(b.seed);
}

}  // namespace detail

// KL + mse_weight * MSE on one batch (mse_weight 0 gives the first-phase
// loss). Adds the parameter gradient into `grad` when it is non-empty.
inline double batch_loss(const TwigModel& model, const RankBatch& batch, double mse_weight,
                         std::span<double> grad = {}) {
  batch.validate();
  const auto& rows = batch.features->rows;
  const std::size_t n = rows.size();
  std::vector<EncodedInput> inputs(n);
  std::vector<ForwardTrace> traces(grad.empty() ? 0 : n);
  std::vector<double> outputs(n);
  for (std::size_t i = 0; i < n; ++i) {
    inputs[i] = encode(batch.config, rows[i], model.norm);
    outputs[i] = model.network.forward(inputs[i], grad.empty() ? nullptr : &traces[i]);
  }
  BatchLoss kl = kl_loss_with_grad(outputs, batch.ranks, batch.entity_count);
  double value = kl.value;
  if (mse_weight != 0.0) {
    const BatchLoss mse = mse_loss_with_grad(outputs, batch.ranks, batch.entity_count);
    value += mse_weight * mse.value;
    for (std::size_t i = 0; i < n; ++i) kl.d_output[i] += mse_weight * mse.d_output[i];
  }
  if (!grad.empty()) {
    for (std::size_t i = 0; i < n; ++i) model.network.backward(inputs[i], traces[i], kl.d_output[i], grad);
  }
  return value;
}

namespace detail {

inline std::vector<double> run_epochs(TwigModel& model, std::span<const RankBatch> runs, int epochs,
                                      double mse_weight, Adam& adam, std::mt19937_64& rng) {
  std::vector<double> losses;
  std::vector<std::size_t> order(runs.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad(model.network.params().size());
  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t idx : order) {
      std::fill(grad.begin(), grad.end(), 0.0);
      const double value = batch_loss(model, runs[idx], mse_weight, grad);
      if (!std::isfinite(value)) {
        throw TwigTrainingError("non-finite loss on batch " + describe(runs[idx]) + " at epoch " +
                                std::to_string(epoch));
      }
      adam.step(model.network.params(), grad);
      total += value;
    }
    losses.push_back(total / static_cast<double>(runs.size()));
  }
  return losses;
}

}  // namespace detail

// Normalization statistics over every training row: a feature table shared
// by several batches counts once per batch.
inline NormStats fit_norm_stats(std::span<const RankBatch> runs) {
  std::map<const FeatureTable*, double> weights;
  std::vector<const FeatureTable*> order;
  for (const auto& b : runs) {
    b.validate();
    if (weights[b.features.get()]++ == 0.0) order.push_back(b.features.get());
  }
  std::vector<WeightedRows> groups;
  for (const FeatureTable* t : order) groups.push_back({t->rows, weights[t]});
  return fit_norm_stats(std::span<const WeightedRows>(groups));
}

inline TwigModel init_twig(std::span<const RankBatch> runs, const TwigSettings& settings) {
  TwigModel model;
  model.settings = settings;
  model.network = TwigNetwork(settings.architecture);
  model.network.initialize(settings.seed);
  model.norm = fit_norm_stats(runs);
  for (const auto& b : runs) model.manifest.push_back(detail::batch_id(b));
  return model;
}

// Phase one minimizes KL alone, phase two KL + MSE; one Adam step per
// batch, batch order reshuffled every epoch.
inline TwigModel train_twig(std::span<const RankBatch> runs, const TwigSettings& settings = {},
                            TwigTrace* trace = nullptr) {
  if (runs.empty()) throw std::invalid_argument("train_twig: no training batches");
  if (settings.phase1_epochs < 0 || settings.phase2_epochs < 0) {
    throw std::invalid_argument("train_twig: negative epoch count");
  }
  TwigModel model = init_twig(runs, settings);
  std::mt19937_64 rng(settings.seed ^ 0x2545f4914f6cdd1dULL);
  Adam adam(model.network.params().size(), {settings.learning_rate});
  auto p1 = detail::run_epochs(model, runs, settings.phase1_epochs, 0.0, adam, rng);
  if (settings.phase1_epochs > 0) model.phase = TwigPhase::kPhase1;
  auto p2 = detail::run_epochs(model, runs, settings.phase2_epochs, settings.mse_weight, adam, rng);
  if (settings.phase2_epochs > 0) model.phase = TwigPhase::kPhase2;
  if (trace) {
    trace->phase1_losses = std::move(p1);
    trace->phase2_losses = std::move(p2);
  }
  return model;
}

// Continues second-phase training on `runs`; normalization statistics are
// kept from pretraining.
inline TwigModel finetune_twig(TwigModel model, std::span<const RankBatch> runs, int epochs,
                               double learning_rate, std::uint64_t seed, std::vector<double>* losses = nullptr) {
  if (epochs < 0) throw std::invalid_argument("finetune_twig: negative epoch count");
  if (epochs == 0) return model;
  if (runs.empty()) throw std::invalid_argument("finetune_twig: no finetuning batches");
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  Adam adam(model.network.params().size(), {learning_rate});
  auto l = detail::run_epochs(model, runs, epochs, model.settings.mse_weight, adam, rng);
  if (losses) *losses = std::move(l);
  FinetuneRecord rec{epochs, learning_rate, seed, {}};
  for (const auto& b : runs) rec.manifest.push_back(detail::batch_id(b));
  model.finetunes.push_back(std::move(rec));
  model.phase = TwigPhase::kFinetuned;
  return model;
}

inline std::vector<double> predict_outputs(const TwigModel& model, const RankBatch& batch) {
  batch.validate();
  std::vector<double> out;
  out.reserve(batch.size());
  for (const auto& row : batch.features->rows) out.push_back(model.forward(encode(batch.config, row, model.norm)));
  return out;
}

inline std::vector<double> predict_ranks(const TwigModel& model, const RankBatch& batch) {
  auto out = predict_outputs(model, batch);
  for (double& y : out) y = denormalize_rank(y, batch.entity_count);
  return out;
}

inline double predict_mrr(const TwigModel& model, const RankBatch& batch) { return mrr(predict_ranks(model, batch)); }

// Mean batch loss (KL + mse_weight * MSE) over `runs`.
inline double mean_loss(const TwigModel& model, std::span<const RankBatch> runs, double mse_weight) {
  double total = 0.0;
  for (const auto& b : runs) total += batch_loss(model, b, mse_weight);
  return total / static_cast<double>(runs.size());
}

// --- checkpoints ---

inline nlohmann::json batch_ids_json(const std::vector<BatchId>& ids) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& id : ids) arr.push_back({{"kg", id.kg}, {"config_hash", id.config_hash}, {"seed", id.seed}});
  return arr;
}

inline std::vector<BatchId> batch_ids_from_json(const nlohmann::json& arr) {
  std::vector<BatchId> ids;
  for (const auto& e : arr) {
    ids.push_back({e.at("kg").get<std::string>(), e.at("config_hash").get<std::string>(),
                   e.at("seed").get<std::uint64_t>()});
  }
  return ids;
}

inline nlohmann::json twig_checkpoint_json(const TwigModel& m) {
  nlohmann::json finetunes = nlohmann::json::array();
  for (const auto& f : m.finetunes) {
    finetunes.push_back({{"epochs", f.epochs},
                         {"learning_rate", f.learning_rate},
                         {"seed", f.seed},
                         {"manifest", batch_ids_json(f.manifest)}});
  }
  const auto params = m.network.params();
  return nlohmann::json{{"format", "kgtwig-twig-v1"},
                        {"phase", phase_name(m.phase)},
                        {"settings", m.settings},
                        {"seed", m.settings.seed},
                        {"params", std::vector<double>(params.begin(), params.end())},
                        {"norm", {{"mean", m.norm.mean}, {"stddev", m.norm.stddev}}},
                        {"manifest", batch_ids_json(m.manifest)},
                        {"finetunes", finetunes}};
}

inline TwigModel twig_from_checkpoint_json(const nlohmann::json& j) {
  if (j.value("format", "") != "kgtwig-twig-v1") throw std::runtime_error("not a TWIG checkpoint");
  TwigModel m;
  m.settings = j.at("settings").get<TwigSettings>();
  m.network = TwigNetwork(m.settings.architecture);
  const auto params = j.at("params").get<std::vector<double>>();
  if (params.size() != m.network.params().size()) throw std::runtime_error("TWIG checkpoint: parameter count mismatch");
  std::copy(params.begin(), params.end(), m.network.params().begin());
  m.norm.mean = j.at("norm").at("mean").get<std::array<double, kNumStructuralFeatures>>();
  m.norm.stddev = j.at("norm").at("stddev").get<std::array<double, kNumStructuralFeatures>>();
  m.phase = parse_phase(j.at("phase").get<std::string>());
  m.manifest = batch_ids_from_json(j.at("manifest"));
  for (const auto& f : j.at("finetunes")) {
    m.finetunes.push_back({f.at("epochs").get<int>(), f.at("learning_rate").get<double>(),
                           f.at("seed").get<std::uint64_t>(), batch_ids_from_json(f.at("manifest"))});
  }
  return m;
}

inline void save_twig_checkpoint(const std::filesystem::path& path, const TwigModel& m) {
  write_file_atomic(path, twig_checkpoint_json(m).dump(1) + "\n");
}

inline TwigModel load_twig_checkpoint(const std::filesystem::path& path) {
  return twig_from_checkpoint_json(nlohmann::json::parse(read_file(path)));
}

}  // namespace kgtwig

#endif  // KGTWIG_TWIG_TRAIN_HPP_
