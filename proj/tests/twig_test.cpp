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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "kgtwig/twig_train.hpp"
#include "support/oracles.hpp"
#include "support/synthetic_kg.hpp"
#include "support/temp_dir.hpp"
#include "support/twig_fixtures.hpp"

namespace kgtwig {
namespace {

// Ranks follow a fixed function of degree and learning rate, so a model
// can fit them.
std::vector<RankBatch> synthetic_batches(const KnowledgeGraph& kg, const std::vector<HyperparamConfig>& configs) {
  auto table = std::make_shared<const FeatureTable>(featurize_kg(kg, Split::kTest));
  const double n = static_cast<double>(kg.entity_count());
  std::vector<RankBatch> out;
  for (const auto& c : configs) {
    RankBatch b{kg.name(), c, 1, kg.entity_count(), table, {}};
    for (const auto& row : table->rows) {
      const double z = 0.3 * row[Feature::kSDeg] - 0.2 * row[Feature::kODeg] - (std::log10(c.learning_rate) + 3.0);
      b.ranks.push_back(1.0 + (n - 1.0) / (1.0 + std::exp(-z / 3.0)));
    }
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<HyperparamConfig> lr_configs() {
  std::vector<HyperparamConfig> out;
  for (double lr : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}) {
    HyperparamConfig c;
    c.learning_rate = lr;
    out.push_back(c);
  }
  return out;
}

TEST(TwigLossTest, KlHandExample) {
  // true (1,1) vs predicted ranks (1,3) with N = 5: outputs 0 and 0.5
  const std::vector<double> outputs{0.0, 0.5}, ranks{1.0, 1.0};
  const double expected = 0.5 * std::log(0.5 / 0.75) + 0.5 * std::log(0.5 / 0.25);
  EXPECT_NEAR(kl_loss(outputs, ranks, 5), expected, 1e-12);
  EXPECT_NEAR(expected, 0.1438, 5e-5);
}

TEST(TwigLossTest, IdenticalInputsGiveZeroLoss) {
  const std::vector<double> outputs{0.0, 0.5, 1.0}, ranks{1.0, 3.0, 5.0};
  EXPECT_EQ(kl_loss(outputs, ranks, 5), 0.0);
  EXPECT_EQ(mse_loss(outputs, ranks, 5), 0.0);
}

TEST(TwigLossTest, KlIsNonNegative) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> out(4), ranks(4);
    for (auto& x : out) x = u(rng);
    for (auto& r : ranks) r = 1.0 + 99.0 * u(rng);
    EXPECT_GE(kl_loss(out, ranks, 100), 0.0);
  }
}

TEST(TwigLossTest, LossGradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int i = 0; i < 10; ++i) {
    std::vector<double> out(5), ranks(5);
    for (auto& x : out) x = u(rng);
    for (auto& r : ranks) r = 1.0 + 49.0 * u(rng);
    const auto kl = kl_loss_with_grad(out, ranks, 50);
    EXPECT_LT(testing::max_relative_error(
                  kl.d_output, testing::finite_difference_gradient([&] { return kl_loss(out, ranks, 50); }, out)),
              1e-6);
    const auto mse = mse_loss_with_grad(out, ranks, 50);
    EXPECT_LT(testing::max_relative_error(
                  mse.d_output, testing::finite_difference_gradient([&] { return mse_loss(out, ranks, 50); }, out)),
              1e-6);
  }
}

TEST(TwigLossTest, RankNormalizationRoundTrip) {
  EXPECT_DOUBLE_EQ(normalize_rank(1.0, 11), 0.0);
  EXPECT_DOUBLE_EQ(normalize_rank(11.0, 11), 1.0);
  EXPECT_DOUBLE_EQ(denormalize_rank(0.5, 11), 6.0);
  EXPECT_DOUBLE_EQ(normalize_rank(1.0, 1), 0.0);
}

TEST(TwigNetworkTest, ShapesAndOutputRange) {
  TwigNetwork net;
  net.initialize(3);
  // 23*16+16 + 16*8+8 + 12*8+8 + 8*6+6 + 14*8+8 + 8*1+1
  EXPECT_EQ(net.params().size(), 384u + 136u + 104u + 54u + 120u + 9u);
  EncodedInput in;
  in.structure.fill(1e6);
  in.hyper.fill(-1e6);
  const double y = net.forward(in);
  EXPECT_GT(y, 0.0);
  EXPECT_LT(y, 1.0);
  in.structure[0] = std::nan("");
  EXPECT_THROW(net.forward(in), std::invalid_argument);
}

TEST(TwigNetworkTest, HyperparameterEncoding) {
  HyperparamConfig c;
  c.sampler = SamplerKind::kBernoulli;
  c.loss = LossKind::kMarginRanking;
  c.margin = 0.5;
  c.learning_rate = 1e-3;
  c.reg_coefficient = 0.0;
  c.negatives = 25;
  c.dimension = 100;
  const auto h = encode_hyperparams(c);
  const std::array<double, kNumHyperFeatures> expected{0, 1, 0, 1, 0, 0, -3.0, -12.0, 0.5, 0.2, 0.4, 1};
  for (std::size_t i = 0; i < kNumHyperFeatures; ++i) EXPECT_NEAR(h[i], expected[i], 1e-12) << i;
}

TEST(TwigNetworkTest, NormStatsStandardizeAndGuardZeroVariance) {
  std::vector<QueryFeatureVector> rows(3);
  for (std::size_t i = 0; i < 3; ++i) {
    rows[i].values.fill(7.0);
    rows[i].values[1] = static_cast<double>(i);
  }
  const auto ns = fit_norm_stats(std::span<const QueryFeatureVector>(rows));
  EXPECT_DOUBLE_EQ(ns.mean[1], 1.0);
  EXPECT_DOUBLE_EQ(ns.stddev[0], 1.0);
  const auto in = encode(HyperparamConfig{}, rows[2], ns);
  EXPECT_DOUBLE_EQ(in.structure[0], 0.0);
  EXPECT_NEAR(in.structure[1], 1.0 / ns.stddev[1], 1e-15);
}

TEST(TwigNetworkTest, BatchLossGradientMatchesFiniteDifferences) {
  const auto kg = testing::make_random_kg(25, 3, 80, 4, 11);
  const auto batches = synthetic_batches(kg, lr_configs());
  TwigSettings settings;
  int checked = 0;
  for (std::uint64_t seed = 0; checked < 10; ++seed) {
    ASSERT_LT(seed, 100u) << "too few instances away from activation kinks";
    settings.seed = seed;
    auto model = init_twig(batches, settings);
    const auto& b = batches[seed % batches.size()];
    if (testing::kink_margin(model, b) < 1e-3) continue;
    std::vector<double> analytic(model.network.params().size(), 0.0);
    batch_loss(model, b, 1.0, analytic);
    const auto numeric = testing::finite_difference_gradient([&] { return batch_loss(model, b, 1.0); },
                                                             model.network.params());
    EXPECT_LT(testing::max_relative_error(analytic, numeric), 1e-4) << "seed " << seed;
    ++checked;
  }
}

TEST(TwigTrainTest, TrainingReducesLossAndIsDeterministic) {
  const auto kg = testing::make_random_kg(40, 4, 200, 15, 12);
  const auto batches = synthetic_batches(kg, lr_configs());
  TwigSettings settings;
  settings.seed = 4;
  TwigTrace trace;
  const auto model = train_twig(batches, settings, &trace);
  ASSERT_EQ(trace.phase1_losses.size(), 5u);
  ASSERT_EQ(trace.phase2_losses.size(), 10u);
  EXPECT_LT(trace.phase2_losses.back(), trace.phase2_losses.front());
  EXPECT_LT(mean_loss(model, batches, 1.0), mean_loss(init_twig(batches, settings), batches, 1.0));
  EXPECT_EQ(model.phase, TwigPhase::kPhase2);
  EXPECT_EQ(model.manifest.size(), batches.size());
  EXPECT_EQ(train_twig(batches, settings).network, model.network);
}

TEST(TwigTrainTest, FinetuneKeepsNormStatsAndRecordsManifest) {
  const auto kg_a = testing::make_random_kg(40, 4, 200, 15, 12, "a");
  const auto kg_b = testing::make_random_kg(60, 4, 300, 15, 13, "b");
  const auto train_runs = synthetic_batches(kg_a, lr_configs());
  const auto tune_runs = synthetic_batches(kg_b, lr_configs());
  const auto model = train_twig(train_runs, {.phase1_epochs = 1, .phase2_epochs = 1});
  EXPECT_EQ(finetune_twig(model, tune_runs, 0, 5e-3, 1).network, model.network);
  std::vector<double> losses;
  const auto tuned = finetune_twig(model, tune_runs, 3, 5e-3, 1, &losses);
  EXPECT_EQ(losses.size(), 3u);
  EXPECT_EQ(tuned.norm, model.norm);
  EXPECT_EQ(tuned.phase, TwigPhase::kFinetuned);
  ASSERT_EQ(tuned.finetunes.size(), 1u);
  EXPECT_EQ(tuned.finetunes[0].manifest.size(), tune_runs.size());
  EXPECT_FALSE(tuned.network == model.network);
}

TEST(TwigTrainTest, CheckpointRoundTripPredictsIdentically) {
  testing::TempDir dir;
  const auto kg = testing::make_random_kg(30, 3, 120, 10, 14);
  const auto runs = synthetic_batches(kg, lr_configs());
  const auto model = finetune_twig(train_twig(runs, {.phase1_epochs = 1, .phase2_epochs = 1}), runs, 1, 1e-3, 2);
  save_twig_checkpoint(dir.path() / "twig.json", model);
  const auto back = load_twig_checkpoint(dir.path() / "twig.json");
  EXPECT_EQ(back.network, model.network);
  EXPECT_EQ(back.norm, model.norm);
  EXPECT_EQ(back.phase, model.phase);
  EXPECT_EQ(back.manifest, model.manifest);
  EXPECT_EQ(back.finetunes, model.finetunes);
  for (const auto& b : runs) EXPECT_EQ(predict_ranks(back, b), predict_ranks(model, b));
}

TEST(TwigTrainTest, MismatchedBatchIsRejected) {
  const auto kg = testing::make_random_kg(30, 3, 120, 10, 14);
  auto runs = synthetic_batches(kg, lr_configs());
  runs[0].ranks.pop_back();
  EXPECT_THROW(train_twig(runs), std::invalid_argument);
}

}  // namespace
}  // namespace kgtwig
