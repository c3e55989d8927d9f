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

// The rank simulator network: a structure branch and a hyperparameter
// branch run independently, their outputs are concatenated and passed
// through an integration block ending in a sigmoid. The output is a
// normalized rank in (0, 1); rank r maps to (r - 1) / (N - 1).

#ifndef KGTWIG_TWIG_NET_HPP_
#define KGTWIG_TWIG_NET_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kgtwig/graph_features.hpp"
#include "kgtwig/hyperparams.hpp"
#include "kgtwig/kge_loss.hpp"

namespace kgtwig {

inline constexpr std::size_t kNumHyperFeatures = 12;

// Hyperparameter block layout.
enum class HyperFeature : std::size_t {
  kSamplerBasic,
  kSamplerBernoulli,
  kSamplerPseudoTyped,
  kLossMarginRanking,
  kLossBce,
  kLossCrossEntropy,
  kLog10LearningRate,
  kLog10RegCoefficient,
  kMargin,
  kNegativesScaled,
  kDimensionScaled,
  kMarginPresent,
};

inline constexpr double kNegativesScale = 125.0;
inline constexpr double kDimensionScale = 250.0;
inline constexpr double kMinLogArgument = 1e-12;

struct EncodedInput {
  std::array<double, kNumHyperFeatures> hyper{};
  std::array<double, kNumStructuralFeatures> structure{};

  friend bool operator==(const EncodedInput&, const EncodedInput&) = default;
};

// Per-feature z-score statistics, fitted on TWIG training rows only.
struct NormStats {
  std::array<double, kNumStructuralFeatures> mean{};
  std::array<double, kNumStructuralFeatures> stddev{};

  NormStats() { stddev.fill(1.0); }

  friend bool operator==(const NormStats&, const NormStats&) = default;
};

// Weighted fit: each row set contributes `weight` copies of its rows.
struct WeightedRows {
  std::span<const QueryFeatureVector> rows;
  double weight = 1.0;
};

inline NormStats fit_norm_stats(std::span<const WeightedRows> groups) {
  NormStats ns;
  double count = 0.0;
  std::array<double, kNumStructuralFeatures> sum{};
  for (const auto& g : groups) {
    for (const auto& row : g.rows) {
      for (std::size_t f = 0; f < kNumStructuralFeatures; ++f) sum[f] += g.weight * row.values[f];
    }
    count += g.weight * static_cast<double>(g.rows.size());
  }
  if (count <= 0.0) throw std::invalid_argument("fit_norm_stats: no rows");
  for (std::size_t f = 0; f < kNumStructuralFeatures; ++f) ns.mean[f] = sum[f] / count;
  std::array<double, kNumStructuralFeatures> sq{};
  for (const auto& g : groups) {
    for (const auto& row : g.rows) {
      for (std::size_t f = 0; f < kNumStructuralFeatures; ++f) {
        const double d = row.values[f] - ns.mean[f];
        sq[f] += g.weight * d * d;
      }
    }
  }
  for (std::size_t f = 0; f < kNumStructuralFeatures; ++f) {
    const double sd = std::sqrt(sq[f] / count);
    // Constant columns are centred but not scaled.
    ns.stddev[f] = sd > 0.0 ? sd : 1.0;
  }
  return ns;
}

inline NormStats fit_norm_stats(std::span<const QueryFeatureVector> rows) {
  const WeightedRows g{rows, 1.0};
  return fit_norm_stats(std::span<const WeightedRows>(&g, 1));
}

inline std::array<double, kNumHyperFeatures> encode_hyperparams(const HyperparamConfig& c) {
  std::array<double, kNumHyperFeatures> h{};
  auto at = [&](HyperFeature f) -> double& { return h[static_cast<std::size_t>(f)]; };
  at(HyperFeature::kSamplerBasic) = c.sampler == SamplerKind::kBasic;
  at(HyperFeature::kSamplerBernoulli) = c.sampler == SamplerKind::kBernoulli;
  at(HyperFeature::kSamplerPseudoTyped) = c.sampler == SamplerKind::kPseudoTyped;
  at(HyperFeature::kLossMarginRanking) = c.loss == LossKind::kMarginRanking;
  at(HyperFeature::kLossBce) = c.loss == LossKind::kBinaryCrossEntropy;
  at(HyperFeature::kLossCrossEntropy) = c.loss == LossKind::kCrossEntropy;
  at(HyperFeature::kLog10LearningRate) = std::log10(std::max(c.learning_rate, kMinLogArgument));
  at(HyperFeature::kLog10RegCoefficient) = std::log10(std::max(c.reg_coefficient, kMinLogArgument));
  at(HyperFeature::kMargin) = c.margin.value_or(0.0);
  at(HyperFeature::kNegativesScaled) = static_cast<double>(c.negatives) / kNegativesScale;
  at(HyperFeature::kDimensionScaled) = static_cast<double>(c.dimension) / kDimensionScale;
  at(HyperFeature::kMarginPresent) = c.margin.has_value() ? 1.0 : 0.0;
  return h;
}

inline EncodedInput encode(const HyperparamConfig& config, const QueryFeatureVector& fv, const NormStats& norm) {
  EncodedInput in;
  in.hyper = encode_hyperparams(config);
  for (std::size_t f = 0; f < kNumStructuralFeatures; ++f) {
    in.structure[f] = (fv.values[f] - norm.mean[f]) / norm.stddev[f];
  }
  return in;
}

struct TwigArchitecture {
  std::size_t structure_hidden = 16;
  std::size_t structure_out = 8;
  std::size_t hyper_hidden = 8;
  std::size_t hyper_out = 6;
  std::size_t integration_hidden = 8;
  double leaky_slope = 0.01;

  friend bool operator==(const TwigArchitecture&, const TwigArchitecture&) = default;
};

inline void to_json(nlohmann::json& j, const TwigArchitecture& a) {
  j = nlohmann::json{{"structure_hidden", a.structure_hidden}, {"structure_out", a.structure_out},
                     {"hyper_hidden", a.hyper_hidden},         {"hyper_out", a.hyper_out},
                     {"integration_hidden", a.integration_hidden}, {"leaky_slope", a.leaky_slope}};
}

inline void from_json(const nlohmann::json& j, TwigArchitecture& a) {
  j.at("structure_hidden").get_to(a.structure_hidden);
  j.at("structure_out").get_to(a.structure_out);
  j.at("hyper_hidden").get_to(a.hyper_hidden);
  j.at("hyper_out").get_to(a.hyper_out);
  j.at("integration_hidden").get_to(a.integration_hidden);
  j.at("leaky_slope").get_to(a.leaky_slope);
}

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t weight_offset = 0;  // out x in, row-major
  std::size_t bias_offset = 0;
};

// Intermediate values of one forward pass, kept for backpropagation.
struct ForwardTrace {
  std::array<std::vector<double>, 6> pre;   // z per layer
  std::array<std::vector<double>, 6> post;  // activation per layer
  std::vector<double> concat;
  double output = 0.0;
};

class TwigNetwork {
 public:
  // The final logit is clamped here so the output stays strictly inside (0, 1).
  static constexpr double kMaxLogit = 30.0;

  enum Layer : std::size_t { kStruct1, kStruct2, kHyper1, kHyper2, kIntegrate1, kIntegrate2 };

  TwigNetwork() : TwigNetwork(TwigArchitecture{}) {}

  explicit TwigNetwork(const TwigArchitecture& arch) : arch_(arch) {
    const std::size_t dims[6][2] = {
        {kNumStructuralFeatures, arch.structure_hidden},
        {arch.structure_hidden, arch.structure_out},
        {kNumHyperFeatures, arch.hyper_hidden},
        {arch.hyper_hidden, arch.hyper_out},
        {arch.structure_out + arch.hyper_out, arch.integration_hidden},
        {arch.integration_hidden, 1},
    };
    std::size_t offset = 0;
    for (std::size_t l = 0; l < 6; ++l) {
      if (dims[l][0] == 0 || dims[l][1] == 0) throw std::invalid_argument("TwigNetwork: zero-width layer");
      layers_[l] = {dims[l][0], dims[l][1], offset, offset + dims[l][0] * dims[l][1]};
      offset += dims[l][0] * dims[l][1] + dims[l][1];
    }
    params_.assign(offset, 0.0);
  }

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
  void initialize(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (const auto& layer : layers_) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
      std::uniform_real_distribution<double> u(-bound, bound);
      for (std::size_t i = 0; i < layer.in * layer.out + layer.out; ++i) params_[layer.weight_offset + i] = u(rng);
    }
  }

  const TwigArchitecture& architecture() const noexcept { return arch_; }
  const DenseLayer& layer(std::size_t l) const { return layers_.at(l); }
  std::span<double> params() noexcept { return params_; }
  std::span<const double> params() const noexcept { return params_; }

  double forward(const EncodedInput& input, ForwardTrace* trace = nullptr) const {
    for (double v : input.structure) {
      if (!std::isfinite(v)) throw std::invalid_argument("TwigNetwork::forward: non-finite input");
    }
    for (double v : input.hyper) {
      if (!std::isfinite(v)) throw std::invalid_argument("TwigNetwork::forward: non-finite input");
    }
    ForwardTrace local;
    ForwardTrace& t = trace ? *trace : local;
    run_layer(kStruct1, input.structure.data(), t, true);
    run_layer(kStruct2, t.post[kStruct1].data(), t, true);
    run_layer(kHyper1, input.hyper.data(), t, true);
    run_layer(kHyper2, t.post[kHyper1].data(), t, true);
    t.concat.assign(t.post[kStruct2].begin(), t.post[kStruct2].end());
    t.concat.insert(t.concat.end(), t.post[kHyper2].begin(), t.post[kHyper2].end());
    run_layer(kIntegrate1, t.concat.data(), t, true);
    run_layer(kIntegrate2, t.post[kIntegrate1].data(), t, false);
    t.output = detail::sigmoid(std::clamp(t.pre[kIntegrate2][0], -kMaxLogit, kMaxLogit));
    t.post[kIntegrate2][0] = t.output;
    return t.output;
  }

  // Adds d_output * d output / d theta into `grad`, given the trace of the
  // forward pass for `input`.
  void backward(const EncodedInput& input, const ForwardTrace& t, double d_output, std::span<double> grad) const {
    const bool saturated = std::abs(t.pre[kIntegrate2][0]) >= kMaxLogit;
    std::vector<double> dz{saturated ? 0.0 : d_output * t.output * (1.0 - t.output)};
    std::vector<double> d_in;
    back_layer(kIntegrate2, t.post[kIntegrate1].data(), dz, grad, &d_in);
    dz = leaky_grad(kIntegrate1, t, d_in);
    back_layer(kIntegrate1, t.concat.data(), dz, grad, &d_in);
    const std::size_t so = arch_.structure_out;
    std::vector<double> d_struct(d_in.begin(), d_in.begin() + static_cast<std::ptrdiff_t>(so));
    std::vector<double> d_hyper(d_in.begin() + static_cast<std::ptrdiff_t>(so), d_in.end());

    dz = leaky_grad(kStruct2, t, d_struct);
    back_layer(kStruct2, t.post[kStruct1].data(), dz, grad, &d_in);
    dz = leaky_grad(kStruct1, t, d_in);
    back_layer(kStruct1, input.structure.data(), dz, grad, nullptr);

    dz = leaky_grad(kHyper2, t, d_hyper);
    back_layer(kHyper2, t.post[kHyper1].data(), dz, grad, &d_in);
    dz = leaky_grad(kHyper1, t, d_in);
    back_layer(kHyper1, input.hyper.data(), dz, grad, nullptr);
  }

  friend bool operator==(const TwigNetwork& a, const TwigNetwork& b) {
    return a.arch_ == b.arch_ && a.params_ == b.params_;
  }

 private:
  void run_layer(Layer l, const double* in, ForwardTrace& t, bool leaky) const {
    const DenseLayer& L = layers_[l];
    auto& z = t.pre[l];
    auto& a = t.post[l];
    z.assign(L.out, 0.0);
    a.assign(L.out, 0.0);
    const double* w = params_.data() + L.weight_offset;
    const double* b = params_.data() + L.bias_offset;
    for (std::size_t o = 0; o < L.out; ++o) {
      double acc = b[o];
      for (std::size_t i = 0; i < L.in; ++i) acc += w[o * L.in + i] * in[i];
      z[o] = acc;
      a[o] = leaky ? (acc > 0.0 ? acc : arch_.leaky_slope * acc) : acc;
    }
  }

  std::vector<double> leaky_grad(Layer l, const ForwardTrace& t, const std::vector<double>& d_post) const {
    std::vector<double> dz(d_post.size());
    for (std::size_t i = 0; i < dz.size(); ++i) {
      dz[i] = d_post[i] * (t.pre[l][i] > 0.0 ? 1.0 : arch_.leaky_slope);
    }
    return dz;
  }

  void back_layer(Layer l, const double* in, const std::vector<double>& dz, std::span<double> grad,
                  std::vector<double>* d_in) const {
    const DenseLayer& L = layers_[l];
    const double* w = params_.data() + L.weight_offset;
    double* gw = grad.data() + L.weight_offset;
    double* gb = grad.data() + L.bias_offset;
    if (d_in) d_in->assign(L.in, 0.0);
    for (std::size_t o = 0; o < L.out; ++o) {
      gb[o] += dz[o];
      for (std::size_t i = 0; i < L.in; ++i) {
        gw[o * L.in + i] += dz[o] * in[i];
        if (d_in) (*d_in)[i] += w[o * L.in + i] * dz[o];
      }
    }
  }

  TwigArchitecture arch_;
  std::array<DenseLayer, 6> layers_{};
  std::vector<double> params_;
};

// --- batch losses over normalized outputs ---

struct BatchLoss {
  double value = 0.0;
  std::vector<double> d_output;
};

inline double denormalize_rank(double output, std::size_t entity_count) {
  return 1.0 + static_cast<double>(entity_count - 1) * output;
}

inline double normalize_rank(double rank, std::size_t entity_count) {
  if (entity_count <= 1) return 0.0;
  return (rank - 1.0) / static_cast<double>(entity_count - 1);
}

// KL(p_true || p_pred) where each distribution puts reciprocal-rank mass on
// the batch members; predictions are denormalized to rank scale first.
inline BatchLoss kl_loss_with_grad(std::span<const double> outputs, std::span<const double> true_ranks,
                                   std::size_t entity_count) {
  if (outputs.size() != true_ranks.size() || outputs.empty()) {
    throw std::invalid_argument("kl_loss: batches must be non-empty and equally sized");
  }
  if (entity_count == 0) throw std::invalid_argument("kl_loss: entity count must be >= 1");
  const std::size_t n = outputs.size();
  std::vector<double> pred(n), p(n), q(n);
  double sp = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    pred[i] = denormalize_rank(outputs[i], entity_count);
    sp += 1.0 / true_ranks[i];
    sq += 1.0 / pred[i];
  }
  BatchLoss r;
  r.d_output.assign(n, 0.0);
  const double scale = static_cast<double>(entity_count - 1);
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = (1.0 / true_ranks[i]) / sp;
    q[i] = (1.0 / pred[i]) / sq;
    if (p[i] > 0.0) r.value += p[i] * std::log(p[i] / q[i]);
    r.d_output[i] = scale * (p[i] - q[i]) / pred[i];
  }
  // Rounding can leave a -1e-17 residue for identical distributions.
  r.value = std::max(r.value, 0.0);
  return r;
}

inline double kl_loss(std::span<const double> outputs, std::span<const double> true_ranks, std::size_t entity_count) {
  return kl_loss_with_grad(outputs, true_ranks, entity_count).value;
}

inline BatchLoss mse_loss_with_grad(std::span<const double> outputs, std::span<const double> true_ranks,
                                    std::size_t entity_count) {
  if (outputs.size() != true_ranks.size() || outputs.empty()) {
    throw std::invalid_argument("mse_loss: batches must be non-empty and equally sized");
  }
  const double n = static_cast<double>(outputs.size());
  BatchLoss r;
  r.d_output.assign(outputs.size(), 0.0);
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const double diff = outputs[i] - normalize_rank(true_ranks[i], entity_count);
    r.value += diff * diff / n;
    r.d_output[i] = 2.0 * diff / n;
  }
  return r;
}

inline double mse_loss(std::span<const double> outputs, std::span<const double> true_ranks, std::size_t entity_count) {
  return mse_loss_with_grad(outputs, true_ranks, entity_count).value;
}

}  // namespace kgtwig

#endif  // KGTWIG_TWIG_NET_HPP_
