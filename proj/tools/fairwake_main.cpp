// tools/fairwake_main.cpp

// Copyright 2026  The Fairwake Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// fairwake — single command-line entry point for the wake-word bias
// toolkit. Subcommands: train, distill, evaluate, report, synth, augment.
// Exit codes: 0 success, 1 configuration/usage error, 2 data/runtime error.
// FAIRWAKE_LOG (debug|info|warn|error|silent) controls diagnostics on stderr.

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fairwake/checkpoint.hpp"
#include "fairwake/config.hpp"
#include "fairwake/corpus.hpp"
#include "fairwake/fairness.hpp"
#include "fairwake/training.hpp"

namespace fs = std::filesystem;
using namespace fairwake;

namespace {

struct CommonArgs {
  std::string manifest;
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int epochs = 0;
  int batch_size = 0;
  int hidden_size = 0;
  int threads = -1;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* epochs_opt = nullptr;
  CLI::Option* batch_opt = nullptr;
  CLI::Option* hidden_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
};

void add_common_training_flags(CLI::App* sub, CommonArgs& args) {
  sub->add_option("--manifest", args.manifest, "corpus manifest (JSON Lines)")
      ->required();
  sub->add_option("--out", args.out, "output directory")->required();
  sub->add_option("--config", args.config, "run config file (JSON)");
  args.seed_opt = sub->add_option("--seed", args.seed, "RNG seed (overrides config)");
  args.epochs_opt =
      sub->add_option("--epochs", args.epochs, "max epochs (overrides config)");
  args.batch_opt = sub->add_option("--batch-size", args.batch_size,
                                   "mini-batch size (overrides config)");
  args.hidden_opt = sub->add_option("--hidden-size", args.hidden_size,
                                    "GRU hidden units (overrides config)");
  args.threads_opt =
      sub->add_option("--threads", args.threads, "worker threads (0 = auto)");
}

PipelineConfig resolve_config(const CommonArgs& args) {
  PipelineConfig cfg;
  if (!args.config.empty()) cfg = load_pipeline_config(args.config);
  if (args.seed_opt != nullptr && args.seed_opt->count() > 0)
    cfg.train.seed = args.seed;
  if (args.epochs_opt != nullptr && args.epochs_opt->count() > 0)
    cfg.train.max_epochs = args.epochs;
  if (args.batch_opt != nullptr && args.batch_opt->count() > 0)
    cfg.train.batch_size = args.batch_size;
  if (args.hidden_opt != nullptr && args.hidden_opt->count() > 0)
    cfg.train.model.hidden_size = args.hidden_size;
  if (args.threads_opt != nullptr && args.threads_opt->count() > 0)
    cfg.train.n_threads = args.threads;
  return cfg;
}

void write_training_outputs(const fs::path& out, const TrainConfig& cfg,
                            const TrainResult& result) {
  save_history(out / "history.json", result.history);
  const fs::path selected = cfg.checkpoint_dir / result.history.selected_checkpoint;
  fs::copy_file(selected, out / "checkpoint.ckpt",
                fs::copy_options::overwrite_existing);
  std::cout << "selected epoch " << result.history.selected_epoch << "\n"
            << "checkpoint: " << (out / "checkpoint.ckpt").string() << "\n"
            << "history: " << (out / "history.json").string() << "\n";
}

int cmd_train(const CommonArgs& args) {
  PipelineConfig cfg = resolve_config(args);
  const fs::path out(args.out);
  fs::create_directories(out);
  LoadedCorpus corpus = load_corpus(args.manifest, cfg.train.n_threads);
  cfg.policy.impulse_responses = corpus.rir_pool;
  cfg.train.checkpoint_dir = out / "checkpoints";
  const TrainResult result = train(cfg.train, corpus, cfg.policy);
  write_training_outputs(out, cfg.train, result);
  return 0;
}

int cmd_distill(const CommonArgs& args, const std::string& student_init,
                const std::string& teacher_logits) {
  PipelineConfig cfg = resolve_config(args);
  const fs::path out(args.out);
  fs::create_directories(out);
  const Checkpoint student = load_checkpoint(student_init);
  cfg.train.model = student.params.config;
  LoadedCorpus corpus = load_corpus(args.manifest, cfg.train.n_threads);
  cfg.policy.impulse_responses = corpus.rir_pool;
  cfg.train.checkpoint_dir = out / "checkpoints";
  const TeacherLogits teacher = load_teacher_logits(teacher_logits);
  const TrainResult result =
      distill(student.params, teacher, cfg.kd, cfg.train, corpus, cfg.policy);
  write_training_outputs(out, cfg.train, result);
  return 0;
}

int cmd_evaluate(const CommonArgs& args, const std::string& checkpoint,
                 const std::string& split, const std::string& logits_out) {
  const fs::path out(args.out);
  fs::create_directories(out);
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  if (ckpt.params.config.input_size != kMfccCoeffs)
    throw DimensionError("checkpoint expects " +
                         std::to_string(ckpt.params.config.input_size) +
                         "-dimensional features; the pipeline produces 13");
  const int threads = args.threads_opt->count() > 0 ? args.threads : 0;
  const LoadedCorpus corpus = load_corpus(args.manifest, threads);

  const std::vector<TrainWindow>* windows = nullptr;
  if (split == "train")
    windows = &corpus.train;
  else if (split == "validation")
    windows = &corpus.validation;
  else if (split == "test")
    windows = &corpus.test;
  else
    throw ConfigError("--split must be train|validation|test");
  if (windows->empty())
    throw DataError("no windows in the '" + split + "' split");

  const auto preds = evaluate_model(ckpt.params, *windows);
  save_predictions(out / "predictions.jsonl", preds);
  std::cout << "predictions: " << (out / "predictions.jsonl").string() << " ("
            << preds.size() << " windows)\n";

  if (!logits_out.empty()) {
    const TeacherLogits logits = export_toy_teacher_logits(ckpt.params, corpus);
    save_teacher_logits(logits_out, logits);
    std::cout << "teacher logits: " << logits_out << " (" << logits.size()
              << " windows)\n";
  }
  return 0;
}

int cmd_report(const CommonArgs& args, const std::string& predictions,
               const std::string& baseline_path, const std::string& attributes_csv,
               int min_support) {
  const fs::path out(args.out);
  fs::create_directories(out);
  const auto manifest = load_manifest(args.manifest);
  const auto preds = load_predictions(predictions);

  std::vector<std::string> attributes;
  std::stringstream ss(attributes_csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) attributes.push_back(item);

  FairnessReport baseline;
  const FairnessReport* baseline_ptr = nullptr;
  if (!baseline_path.empty()) {
    baseline = load_report(baseline_path);
    baseline_ptr = &baseline;
  }
  const FairnessReport report = build_report(
      preds, manifest, attributes, min_support, baseline_ptr, baseline_path);
  for (const auto& section : report.attributes)
    if (!section.pd_note.empty())
      log::warn("attribute '" + section.attribute + "': " + section.pd_note);

  save_report(out / "report.json", report);
  const std::string text = render_report_text(report);
  std::ofstream os(out / "report.txt", std::ios::trunc);
  os << text;
  std::cout << text;
  return 0;
}

int cmd_synth(const CommonArgs& args) {
  SynthSpec spec = load_synth_spec(args.config);
  if (args.seed_opt->count() > 0) spec.seed = args.seed;
  const fs::path manifest = synth_corpus(spec, args.out);
  std::cout << "manifest: " << manifest.string() << "\n";
  return 0;
}

int cmd_augment(const CommonArgs& args, const std::string& split) {
  PipelineConfig cfg = resolve_config(args);
  const fs::path out(args.out);
  const fs::path base = fs::path(args.manifest).parent_path();
  const auto rows = load_manifest(args.manifest);

  for (const auto& u : rows)
    if (u.role == "rir") {
      const Waveform w = read_wav(base / u.audio_path);
      cfg.policy.impulse_responses.push_back({w.samples, w.sample_rate, u.id});
    }

  std::vector<std::size_t> selected;
  std::vector<PolicyItem> items;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Utterance& u = rows[i];
    if (u.is_resource() || u.split != split) continue;
    PolicyItem item;
    item.wave = read_wav(base / u.audio_path);
    item.label = u.label_index();
    items.push_back(std::move(item));
    selected.push_back(i);
  }
  const int threads = args.threads_opt->count() > 0 ? args.threads : 0;
  std::vector<std::optional<Waveform>> augmented;
  if (!items.empty())
    augmented = apply_policy_sparse(items, cfg.policy, cfg.train.seed, threads);

  int transformed = 0;
  std::vector<bool> done(rows.size(), false);
  for (std::size_t k = 0; k < selected.size(); ++k) {
    const Utterance& u = rows[selected[k]];
    const fs::path dest = out / u.audio_path;
    fs::create_directories(dest.parent_path());
    if (augmented[k].has_value()) {
      write_wav(dest, *augmented[k]);
      ++transformed;
    } else {
      fs::copy_file(base / u.audio_path, dest,
                    fs::copy_options::overwrite_existing);
    }
    done[selected[k]] = true;
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (done[i]) continue;
    const fs::path dest = out / rows[i].audio_path;
    fs::create_directories(dest.parent_path());
    fs::copy_file(base / rows[i].audio_path, dest,
                  fs::copy_options::overwrite_existing);
  }
  save_manifest(out / "manifest.jsonl", rows);
  std::cout << "manifest: " << (out / "manifest.jsonl").string() << " ("
            << transformed << " of " << items.size() << " '" << split
            << "' files transformed)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "fairwake — demographics-agnostic bias mitigation for wake-word detection"};
  app.require_subcommand(1);

  CommonArgs train_args;
  CLI::App* train_cmd = app.add_subcommand("train", "train a baseline detector");
  add_common_training_flags(train_cmd, train_args);

  CommonArgs distill_args;
  std::string student_init;
  std::string teacher_logits;
  CLI::App* distill_cmd =
      app.add_subcommand("distill", "fine-tune a student against teacher logits");
  add_common_training_flags(distill_cmd, distill_args);
  distill_cmd->add_option("--student-init", student_init,
                          "baseline checkpoint to initialize the student")
      ->required();
  distill_cmd->add_option("--teacher-logits", teacher_logits,
                          "teacher logits file (JSON Lines)")
      ->required();

  CommonArgs eval_args;
  std::string eval_checkpoint;
  std::string eval_split = "test";
  std::string eval_logits_out;
  CLI::App* eval_cmd =
      app.add_subcommand("evaluate", "score windows with a trained checkpoint");
  eval_cmd->add_option("--manifest", eval_args.manifest, "corpus manifest")
      ->required();
  eval_cmd->add_option("--out", eval_args.out, "output directory")->required();
  eval_cmd->add_option("--checkpoint", eval_checkpoint, "model checkpoint")
      ->required();
  eval_cmd->add_option("--split", eval_split, "split to score (default test)");
  eval_cmd->add_option("--teacher-logits-out", eval_logits_out,
                       "also export train+validation logits to this file");
  eval_args.threads_opt =
      eval_cmd->add_option("--threads", eval_args.threads, "worker threads");
  eval_args.seed_opt =
      eval_cmd->add_option("--seed", eval_args.seed, "unused; kept for uniformity");

  CommonArgs report_args;
  std::string predictions;
  std::string baseline_report;
  std::string attributes = "sex,age,accent";
  int min_support = kDefaultMinSupport;
  CLI::App* report_cmd =
      app.add_subcommand("report", "build the fairness report from predictions");
  report_cmd->add_option("--manifest", report_args.manifest, "corpus manifest")
      ->required();
  report_cmd->add_option("--predictions", predictions, "predictions JSON Lines")
      ->required();
  report_cmd->add_option("--out", report_args.out, "output directory")->required();
  report_cmd->add_option("--baseline-report", baseline_report,
                         "baseline report.json for RRPD");
  report_cmd->add_option("--attributes", attributes,
                         "comma-separated attributes (default sex,age,accent)");
  report_cmd->add_option("--min-support", min_support,
                         "minimum positive windows per group (default 20)");

  CommonArgs synth_args;
  CLI::App* synth_cmd =
      app.add_subcommand("synth", "generate a synthetic biased corpus");
  synth_cmd->add_option("--config", synth_args.config, "corpus spec (JSON)")
      ->required();
  synth_cmd->add_option("--out", synth_args.out, "output directory")->required();
  synth_args.seed_opt =
      synth_cmd->add_option("--seed", synth_args.seed, "override the spec seed");

  CommonArgs augment_args;
  std::string augment_split = "train";
  CLI::App* augment_cmd = app.add_subcommand(
      "augment", "apply the augmentation policy to corpus files");
  add_common_training_flags(augment_cmd, augment_args);
  augment_cmd->add_option("--split", augment_split,
                          "split to transform (default train)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(train_args);
    if (distill_cmd->parsed())
      return cmd_distill(distill_args, student_init, teacher_logits);
    if (eval_cmd->parsed())
      return cmd_evaluate(eval_args, eval_checkpoint, eval_split, eval_logits_out);
    if (report_cmd->parsed())
      return cmd_report(report_args, predictions, baseline_report, attributes,
                        min_support);
    if (synth_cmd->parsed()) return cmd_synth(synth_args);
    if (augment_cmd->parsed()) return cmd_augment(augment_args, augment_split);
  } catch (const ConfigError& e) {
    log::error(e.what());
    return 1;
  } catch (const DimensionError& e) {
    log::error(e.what());
    return 1;
  } catch (const std::domain_error& e) {
    log::error(e.what());
    return 1;
  } catch (const DataError& e) {
    log::error(e.what());
    return 2;
  } catch (const std::exception& e) {
    log::error(e.what());
    return 2;
  }
  return 0;
}
