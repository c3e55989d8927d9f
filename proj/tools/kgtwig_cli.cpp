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

// Command-line front end. Every subcommand that touches an experiment works
// inside a run directory:
//
//   <run>/manifest.json         config snapshot, grid hash, artifact list
//   <run>/ground_truth/...      per-cell rank files written by `sweep`
//   <run>/twig.json             default checkpoint of `train-twig`
//   <run>/report.json           default output of `evaluate`

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "kgtwig/kgtwig.hpp"

namespace fs = std::filesystem;
using namespace kgtwig;

namespace {

struct KgArgs {
  std::string dir, train, valid, test, name;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--kg-dir", dir, "directory holding train.txt, valid.txt, test.txt");
    cmd->add_option("--train", train, "training split file");
    cmd->add_option("--valid", valid, "validation split file");
    cmd->add_option("--test", test, "test split file");
    cmd->add_option("--name", name, "KG name (default: directory name)");
  }

  KnowledgeGraph load() const {
    if (!dir.empty()) {
      const fs::path d(dir);
      return parse_kg(d / "train.txt", d / "valid.txt", d / "test.txt",
                      name.empty() ? fs::absolute(d).lexically_normal().filename().string() : name);
    }
    if (train.empty() || valid.empty() || test.empty()) {
      throw std::invalid_argument("give --kg-dir or all of --train, --valid, --test");
    }
    return parse_kg(train, valid, test, name);
  }
};

// Config file plus command-line overrides of the split plan and seeds.
struct ExperimentArgs {
  std::string config, run_dir;
  std::vector<std::uint64_t> seeds;
  std::optional<std::string> mode, holdout;
  std::optional<double> shot, test_fraction;
  std::optional<std::uint64_t> split_seed;
  std::optional<std::string> tie_policy;
  bool raw = false;
  bool include_finetune = false;

  void add_to(CLI::App* cmd, bool split_options) {
    cmd->add_option("--config", config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--run-dir", run_dir, "run directory")->required();
    cmd->add_option("--seeds", seeds, "replicate seeds, overriding the config")->delimiter(',');
    cmd->add_option("--tie-policy", tie_policy, "realistic, optimistic or pessimistic");
    cmd->add_flag("--raw", raw, "rank against all candidates instead of the filtered set");
    if (!split_options) return;
    cmd->add_option("--mode", mode, "unseen-hyperparameters or holdout-kg");
    cmd->add_option("--holdout", holdout, "held-out KG name (implies --mode holdout-kg)");
    cmd->add_option("--shot", shot, "fraction of the held-out KG's configs used for finetuning");
    cmd->add_option("--test-fraction", test_fraction, "fraction of configs held out on seen KGs");
    cmd->add_option("--split-seed", split_seed, "seed of the config split");
    cmd->add_flag("--include-finetune-in-test", include_finetune,
                  "also evaluate the held-out KG on its finetuning configs");
  }

  RunConfig load() const {
    RunConfig rc = load_run_config(config);
    if (!seeds.empty()) rc.grid.replicate_seeds = seeds;
    if (tie_policy) rc.eval.tie_policy = parse_tie_policy(*tie_policy);
    if (raw) rc.eval.filtered = false;
    if (mode) rc.split.mode = parse_split_mode(*mode);
    if (holdout) {
      rc.split.mode = SplitMode::kHoldoutKg;
      rc.split.holdout_kg = *holdout;
    }
    if (shot) rc.split.shot_fraction = *shot;
    if (test_fraction) rc.split.test_fraction = *test_fraction;
    if (split_seed) rc.split.split_seed = *split_seed;
    if (include_finetune) rc.split.include_finetune_in_test = true;
    rc.grid.validate();
    rc.split.validate();
    return rc;
  }

  fs::path ground_truth() const { return fs::path(run_dir) / "ground_truth"; }
};

void log_line(const std::string& msg) { std::cerr << msg << '\n'; }

// Records an output in <run>/manifest.json, keeping earlier entries.
void update_manifest(const fs::path& run_dir, const RunConfig& rc, const std::string& command,
                     const fs::path& output, nlohmann::json extra = nlohmann::json::object()) {
  const fs::path path = run_dir / "manifest.json";
  nlohmann::json m = fs::exists(path) ? nlohmann::json::parse(read_file(path)) : nlohmann::json::object();
  m["format"] = "kgtwig-run-v1";
  m["config"] = run_config_to_json(rc);
  m["grid_hash"] = grid_hash(rc.grid);
  m["grid_size"] = enumerate_grid(rc.grid).size();
  extra["command"] = command;
  if (!output.empty()) {
    extra["path"] = fs::relative(output, run_dir).generic_string();
    if (fs::is_regular_file(output)) extra["fnv1a"] = to_hex(fnv1a64(read_file(output)));
  }
  m["artifacts"][command] = extra;
  write_file_atomic(path, m.dump(2) + "\n");
}

void write_output(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_file_atomic(out, text);
  }
}

struct Prepared {
  RunConfig rc;
  std::vector<HyperparamConfig> configs;
  ConfigSplit split;
  GroundTruth gt;
};

Prepared prepare(const ExperimentArgs& args) {
  Prepared p;
  p.rc = args.load();
  p.configs = enumerate_grid(p.rc.grid);
  p.split = make_split(p.configs.size(), p.rc.split);
  p.gt = load_ground_truth(p.rc.load_kgs(), p.rc.grid, args.ground_truth(), &p.rc.eval);
  return p;
}

int cmd_parse(const KgArgs& kg_args, const std::string& out_dir) {
  const KnowledgeGraph kg = kg_args.load();
  std::cout << kg.name() << ": " << kg.entity_count() << " entities, " << kg.relation_count() << " relations, "
            << kg.train().size() << '/' << kg.valid().size() << '/' << kg.test().size()
            << " train/valid/test triples\n";
  if (!out_dir.empty()) {
    write_kg_tsv(kg, out_dir);
    write_file_atomic(fs::path(out_dir) / "dictionaries.json", dictionaries_to_json(kg).dump(2) + "\n");
  }
  return 0;
}

int cmd_featurize(const KgArgs& kg_args, const std::string& split, const std::string& out) {
  const KnowledgeGraph kg = kg_args.load();
  write_output(out, feature_table_to_csv(featurize_kg(kg, parse_split(split))));
  return 0;
}

int cmd_sweep(const ExperimentArgs& args, std::size_t workers) {
  const RunConfig rc = args.load();
  const auto kgs = rc.load_kgs();
  SweepOptions opts;
  opts.root = args.ground_truth();
  opts.workers = workers;
  opts.eval = rc.eval;
  opts.train = rc.train;
  opts.log = log_line;
  const SweepSummary s = generate_ground_truth(kgs, rc.grid, opts);
  std::cout << "trained " << s.trained << ", reused " << s.skipped << ", failed " << s.failures.size() << '\n';
  for (const auto& f : s.failures) std::cout << "failed " << f.kg << '/' << f.config_hash << '/' << f.seed << ": " << f.error << '\n';
  update_manifest(args.run_dir, rc, "sweep", args.ground_truth(),
                  {{"trained", s.trained}, {"reused", s.skipped}, {"failed", s.failures.size()}});
  return s.failures.empty() ? 0 : 1;
}

int cmd_train_twig(const ExperimentArgs& args, std::string out) {
  Prepared p = prepare(args);
  if (out.empty()) out = (fs::path(args.run_dir) / "twig.json").string();
  const auto runs = training_batches(p.gt, p.configs, p.rc.grid.replicate_seeds, p.rc.split, p.split);
  log_line("training on " + std::to_string(runs.size()) + " rank batches");
  TwigTrace trace;
  const TwigModel model = train_twig(runs, p.rc.experiment.twig, &trace);
  for (std::size_t i = 0; i < trace.phase1_losses.size(); ++i) {
    log_line("phase 1 epoch " + std::to_string(i + 1) + " loss " + format_double(trace.phase1_losses[i]));
  }
  for (std::size_t i = 0; i < trace.phase2_losses.size(); ++i) {
    log_line("phase 2 epoch " + std::to_string(i + 1) + " loss " + format_double(trace.phase2_losses[i]));
  }
  save_twig_checkpoint(out, model);
  update_manifest(args.run_dir, p.rc, "train-twig", out, {{"split", p.rc.split}, {"batches", runs.size()}});
  std::cout << out << '\n';
  return 0;
}

int cmd_finetune_twig(const ExperimentArgs& args, const std::string& in, std::string out) {
  Prepared p = prepare(args);
  if (p.rc.split.mode != SplitMode::kHoldoutKg) throw std::invalid_argument("finetuning needs a held-out KG");
  if (out.empty()) out = (fs::path(args.run_dir) / "twig_finetuned.json").string();
  const auto runs = finetune_batches(p.gt, p.configs, p.rc.grid.replicate_seeds, p.rc.split, p.split);
  log_line("finetuning on " + std::to_string(runs.size()) + " rank batches of " + p.rc.split.holdout_kg);
  TwigModel model = load_twig_checkpoint(in);
  if (!runs.empty()) {
    const auto& ex = p.rc.experiment;
    model = finetune_twig(std::move(model), runs, ex.finetune_epochs, ex.finetune_learning_rate, ex.twig.seed);
  }
  save_twig_checkpoint(out, model);
  update_manifest(args.run_dir, p.rc, "finetune-twig", out, {{"split", p.rc.split}, {"batches", runs.size()}});
  std::cout << out << '\n';
  return 0;
}

void print_report(const nlohmann::json& report) {
  for (const auto& k : report.at("kgs")) {
    std::cout << k.at("kg").get<std::string>() << " (" << k.at("role").get<std::string>() << ", "
              << k.at("pairs").size() << " configs): R2 = "
              << (k.at("r2").is_null() ? "n/a" : format_double(k.at("r2").get<double>()));
    const auto note = k.value("note", std::string{});
    if (!note.empty()) std::cout << " [" << note << "]";
    std::cout << '\n';
  }
}

int cmd_evaluate(const ExperimentArgs& args, const std::string& checkpoint, std::string out) {
  Prepared p = prepare(args);
  if (out.empty()) out = (fs::path(args.run_dir) / "report.json").string();
  const TwigModel model = load_twig_checkpoint(checkpoint);
  const ExperimentReport report =
      evaluate_twig(model, p.gt, p.configs, p.rc.grid.replicate_seeds, p.rc.split, p.split, grid_hash(p.rc.grid));
  const auto j = report_to_json(report);
  write_file_atomic(out, j.dump(2) + "\n");
  update_manifest(args.run_dir, p.rc, "evaluate", out, {{"split", p.rc.split}});
  print_report(j);
  return 0;
}

int cmd_report(const std::string& path) {
  const auto j = nlohmann::json::parse(read_file(path));
  print_report(j);
  const double gap = verify_report_json(j);
  if (gap > 1e-10) {
    std::cout << "verification FAILED: stored R2 differs from recomputed by " << format_double(gap) << '\n';
    return 1;
  }
  std::cout << "verification ok\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kgtwig: ComplEx ground truth, structural features and TWIG simulation"};
  app.require_subcommand(1);

  KgArgs parse_kg_args, feat_kg_args;
  std::string parse_out, feat_split = "test", feat_out;
  auto* parse = app.add_subcommand("parse", "parse and validate a KG; optionally write normalized files");
  parse_kg_args.add_to(parse);
  parse->add_option("--out", parse_out, "directory for normalized TSV files and dictionaries.json");

  auto* featurize = app.add_subcommand("featurize", "structural features for every query of a split (CSV)");
  feat_kg_args.add_to(featurize);
  featurize->add_option("--split", feat_split, "train, valid or test");
  featurize->add_option("--out", feat_out, "output CSV (default: stdout)");

  ExperimentArgs sweep_args, train_args, ft_args, eval_args;
  std::size_t workers = 0;
  auto* sweep = app.add_subcommand("sweep", "train and evaluate ComplEx on every (KG, config, seed) cell");
  sweep_args.add_to(sweep, false);
  sweep->add_option("--workers", workers, std::string("worker threads (default: $") + kWorkersEnv + " or 1)");

  std::string train_out;
  auto* train_twig_cmd = app.add_subcommand("train-twig", "train TWIG on the seen KGs' training configs");
  train_args.add_to(train_twig_cmd, true);
  train_twig_cmd->add_option("--out", train_out, "checkpoint path (default: <run>/twig.json)");

  std::string ft_in, ft_out;
  auto* ft = app.add_subcommand("finetune-twig", "finetune a checkpoint on the held-out KG's shot configs");
  ft_args.add_to(ft, true);
  ft->add_option("--checkpoint", ft_in, "pretrained checkpoint")->required()->check(CLI::ExistingFile);
  ft->add_option("--out", ft_out, "checkpoint path (default: <run>/twig_finetuned.json)");

  std::string eval_ckpt, eval_out;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "predict MRR on held-out configs and write a report");
  eval_args.add_to(evaluate_cmd, true);
  evaluate_cmd->add_option("--checkpoint", eval_ckpt, "TWIG checkpoint")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--out", eval_out, "report path (default: <run>/report.json)");

  std::string report_path;
  auto* report = app.add_subcommand("report", "print a report and recheck its R2 values");
  report->add_option("report", report_path, "report JSON")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*parse) return cmd_parse(parse_kg_args, parse_out);
    if (*featurize) return cmd_featurize(feat_kg_args, feat_split, feat_out);
    if (*sweep) return cmd_sweep(sweep_args, workers);
    if (*train_twig_cmd) return cmd_train_twig(train_args, train_out);
    if (*ft) return cmd_finetune_twig(ft_args, ft_in, ft_out);
    if (*evaluate_cmd) return cmd_evaluate(eval_args, eval_ckpt, eval_out);
    if (*report) return cmd_report(report_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
