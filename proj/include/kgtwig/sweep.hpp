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

// Ground-truth generation: train and evaluate ComplEx for every
// (KG, config, replicate) cell, persisting each run as it completes.

#ifndef KGTWIG_SWEEP_HPP_
#define KGTWIG_SWEEP_HPP_

#include <atomic>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "kgtwig/grid.hpp"
#include "kgtwig/kg_store.hpp"
#include "kgtwig/kge_trainer.hpp"
#include "kgtwig/lp_eval.hpp"

namespace kgtwig {

inline constexpr const char* kWorkersEnv = "KGTWIG_WORKERS";

// Explicit request, else $KGTWIG_WORKERS, else one worker.
inline std::size_t resolve_workers(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv(kWorkersEnv); env && *env) {
    std::size_t v = 0;
    const char* end = env + std::strlen(env);
    const auto [ptr, ec] = std::from_chars(env, end, v);
    if (ec != std::errc() || ptr != end || v == 0) {
      throw std::invalid_argument(std::string(kWorkersEnv) + " must be a positive integer, got '" + env + "'");
    }
    return v;
  }
  return 1;
}

struct SweepOptions {
  std::filesystem::path root;
  std::size_t workers = 0;
  RankOptions eval;
  TrainOptions train;
  std::function<void(const std::string&)> log;
};

struct SweepFailure {
  std::string kg;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string error;
};

struct SweepSummary {
  std::size_t trained = 0;
  std::size_t skipped = 0;
  std::vector<SweepFailure> failures;
  std::vector<RunResult> results;  // successful cells in (kg, config, seed) order
};

namespace detail {

// A stored cell counts as done only if it loads, verifies and was produced
// under the same evaluation protocol.
inline std::optional<RunResult> load_completed(const RunPaths& paths, const RankOptions& eval) {
  if (!std::filesystem::exists(paths.json)) return std::nullopt;
  try {
    RunResult r = load_run_result(paths.json);
    if (r.eval_options.filtered != eval.filtered || r.eval_options.tie_policy != eval.tie_policy) {
      return std::nullopt;
    }
    return r;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace detail

inline SweepSummary generate_ground_truth(const std::vector<KnowledgeGraph>& kgs, const GridSpec& spec,
                                          const SweepOptions& options) {
  const auto configs = enumerate_grid(spec);
  struct Job {
    const KnowledgeGraph* kg;
    const HyperparamConfig* config;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const auto& kg : kgs) {
    for (const auto& c : configs) {
      for (auto seed : spec.replicate_seeds) jobs.push_back({&kg, &c, seed});
    }
  }

  std::vector<std::optional<RunResult>> slots(jobs.size());
  std::vector<std::optional<SweepFailure>> failures(jobs.size());
  std::vector<char> reused(jobs.size(), 0);
  std::atomic<std::size_t> next{0};
  std::mutex log_mu;
  auto log = [&](const std::string& msg) {
    if (!options.log) return;
    std::lock_guard<std::mutex> lock(log_mu);
    options.log(msg);
  };

  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
      const Job& job = jobs[i];
      const auto paths = run_paths(options.root, job.kg->name(), *job.config, job.seed);
      const std::string cell = job.kg->name() + "/" + job.config->hash() + "/" + std::to_string(job.seed);
      if (auto done = detail::load_completed(paths, options.eval)) {
        slots[i] = std::move(done);
        reused[i] = 1;
        continue;
      }
      try {
        const ComplexModel model = train(*job.kg, *job.config, job.seed, options.train);
        RunResult r = evaluate(model, *job.kg, *job.config, job.seed, options.eval);
        save_run_result(options.root, r);
        log("done " + cell + " mrr=" + format_double(r.mrr));
        slots[i] = std::move(r);
      } catch (const std::exception& e) {
        log("FAILED " + cell + ": " + e.what());
        failures[i] = SweepFailure{job.kg->name(), job.config->hash(), job.seed, e.what()};
      }
    }
  };

  const std::size_t n_workers = std::min(resolve_workers(options.workers), std::max<std::size_t>(jobs.size(), 1));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  SweepSummary summary;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (slots[i]) {
      (reused[i] ? summary.skipped : summary.trained) += 1;
      summary.results.push_back(std::move(*slots[i]));
    } else if (failures[i]) {
      summary.failures.push_back(std::move(*failures[i]));
    }
  }
  return summary;
}

}  // namespace kgtwig

#endif  // KGTWIG_SWEEP_HPP_
