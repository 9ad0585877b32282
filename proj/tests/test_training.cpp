// tests/test_training.cpp

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

#include <catch2/catch.hpp>
#include <filesystem>

#include "fairwake/checkpoint.hpp"
#include "fairwake/corpus.hpp"
#include "fairwake/training.hpp"

using namespace fairwake;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("fairwake_train_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TrainingHistory history_from_losses(const std::vector<double>& losses) {
  TrainingHistory h;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    EpochRecord e;
    e.epoch = static_cast<int>(i) + 1;
    e.validation_loss = losses[i];
    e.checkpoint_file = "epoch_" + std::to_string(e.epoch) + ".ckpt";
    h.epochs.push_back(e);
  }
  return h;
}

/// Small, separable two-group corpus; shared by the loop tests.
fs::path make_toy_corpus(const std::string& tag, bool with_resources = false,
                         std::uint64_t seed = 11) {
  const fs::path dir = temp_dir(tag);
  SynthSpec spec;
  spec.groups = {{"alpha", "female", "21-30", "northern", 130.0, 1300.0},
                 {"beta", "male", "41-50", "southern", 240.0, 2600.0}};
  spec.counts = {5, 5, 2, 2, 2, 2};
  spec.noise_level = 0.02;
  spec.seed = seed;
  if (with_resources) {
    spec.n_noise_files = 1;
    spec.n_rir_files = 1;
  }
  synth_corpus(spec, dir);
  return dir / "manifest.jsonl";
}

AugmentationPolicy no_augmentation() {
  AugmentationPolicy policy;
  policy.apply_probability = 0.0;
  return policy;
}

double accuracy(const std::vector<PredictionRecord>& preds) {
  int correct = 0;
  for (const auto& p : preds) {
    const bool predicted = p.score >= 0.5;
    const bool truth = p.true_label == "wuw";
    correct += predicted == truth ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

}  // namespace

TEST_CASE("select_checkpoint follows the best-3-mean rule") {
  // mean of (0.5, 0.3, 0.4) is 0.4 -> epoch 3
  REQUIRE(history_from_losses({0.5, 0.3, 0.4})
              .epochs[select_checkpoint(history_from_losses({0.5, 0.3, 0.4}))]
              .epoch == 3);
  // single epoch -> that epoch
  REQUIRE(history_from_losses({0.9})
              .epochs[select_checkpoint(history_from_losses({0.9}))]
              .epoch == 1);
  // three-way tie at the mean breaks toward the later epoch
  const TrainingHistory h = history_from_losses({0.9, 0.2, 0.2, 0.2, 0.8});
  REQUIRE(h.epochs[select_checkpoint(h)].epoch == 4);
}

TEST_CASE("select_checkpoint is permutation stable") {
  Pcg32 rng(2121);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = rng.uniform_int(1, 12);
    TrainingHistory h;
    for (int i = 0; i < n; ++i) {
      EpochRecord e;
      e.epoch = i + 1;
      e.validation_loss = rng.uniform_int(0, 5) * 0.1;  // force ties
      e.checkpoint_file = "e" + std::to_string(e.epoch);
      h.epochs.push_back(e);
    }
    const int selected = h.epochs[select_checkpoint(h)].epoch;

    TrainingHistory shuffled = h;
    for (int i = n - 1; i > 0; --i)
      std::swap(shuffled.epochs[static_cast<std::size_t>(i)],
                shuffled.epochs[static_cast<std::size_t>(rng.uniform_int(0, i))]);
    REQUIRE(shuffled.epochs[select_checkpoint(shuffled)].epoch == selected);
  }
}

TEST_CASE("teacher logits round-trip and export deterministically") {
  const fs::path dir = temp_dir("teacher_io");
  TeacherLogits logits;
  Eigen::VectorXd z(2);
  z << 1.25, -0.75;
  logits[{"utt_b", 0}] = z;
  z << -3.5, 2.25;
  logits[{"utt_a", 1}] = z;
  z << 0.125, 0.5;
  logits[{"utt_a", 0}] = z;

  save_teacher_logits(dir / "t.jsonl", logits);
  save_teacher_logits(dir / "t2.jsonl", logits);
  REQUIRE(file_digest_hex(dir / "t.jsonl") == file_digest_hex(dir / "t2.jsonl"));

  const TeacherLogits loaded = load_teacher_logits(dir / "t.jsonl");
  REQUIRE(loaded.size() == 3);
  REQUIRE(loaded.at({"utt_a", 1})(1) == 2.25);
  REQUIRE(loaded.at({"utt_b", 0})(0) == 1.25);
}

TEST_CASE("toy teacher export covers exactly the train and validation windows") {
  const fs::path manifest = make_toy_corpus("teacher_export");
  const LoadedCorpus corpus = load_corpus(manifest);
  Pcg32 rng(5);
  const ModelParams teacher = ModelParams::random_init({13, 6, 2}, rng);
  const TeacherLogits logits = export_toy_teacher_logits(teacher, corpus);
  REQUIRE(logits.size() == corpus.train.size() + corpus.validation.size());
  for (const auto& w : corpus.train)
    REQUIRE(logits.count({w.utterance_id, w.window_index}) == 1);
  for (const auto& w : corpus.validation)
    REQUIRE(logits.count({w.utterance_id, w.window_index}) == 1);

  const fs::path dir = temp_dir("teacher_export_io");
  save_teacher_logits(dir / "t.jsonl", logits);
  const TeacherLogits reloaded = load_teacher_logits(dir / "t.jsonl");
  REQUIRE(reloaded.size() == logits.size());
  for (const auto& [key, value] : logits) {
    REQUIRE(reloaded.count(key) == 1);
    REQUIRE(reloaded.at(key)(0) == value(0));
    REQUIRE(reloaded.at(key)(1) == value(1));
  }
}

TEST_CASE("load_corpus splits windows and collects resource pools") {
  const fs::path manifest = make_toy_corpus("load", /*with_resources=*/true);
  const LoadedCorpus corpus = load_corpus(manifest);
  REQUIRE(corpus.train.size() == 20);       // 2 groups x (5 pos + 5 neg)
  REQUIRE(corpus.validation.size() == 8);
  REQUIRE(corpus.test.size() == 8);
  REQUIRE(corpus.noise_pool.size() == 1);
  REQUIRE(corpus.rir_pool.size() == 1);
  for (const auto& w : corpus.train) {
    REQUIRE(w.samples.size() == static_cast<std::size_t>(kEvalWindowSamples));
    REQUIRE(w.features.rows() == 29);
    REQUIRE(w.features.cols() == 13);
  }
}

TEST_CASE("one epoch on a toy corpus records history and a checkpoint") {
  const fs::path manifest = make_toy_corpus("one_epoch");
  const LoadedCorpus corpus = load_corpus(manifest);
  TrainConfig cfg;
  cfg.max_epochs = 1;
  cfg.batch_size = 8;
  cfg.model = {13, 4, 2};
  cfg.seed = 3;
  cfg.checkpoint_dir = temp_dir("one_epoch_ckpt");
  const TrainResult result = train(cfg, corpus, no_augmentation());
  REQUIRE(result.history.epochs.size() == 1);
  REQUIRE(result.history.selected_epoch == 1);
  REQUIRE(fs::exists(cfg.checkpoint_dir / result.history.selected_checkpoint));
}

TEST_CASE("training is deterministic under a fixed seed") {
  const fs::path manifest = make_toy_corpus("det", /*with_resources=*/true);
  const LoadedCorpus corpus = load_corpus(manifest);
  AugmentationPolicy policy;
  policy.apply_probability = 0.5;
  policy.enabled = {Technique::kFreqMasking};

  TrainConfig cfg;
  cfg.max_epochs = 3;
  cfg.batch_size = 8;
  cfg.model = {13, 4, 2};
  cfg.seed = 99;
  const fs::path dir_a = temp_dir("det_ckpt_a");
  const fs::path dir_b = temp_dir("det_ckpt_b");
  cfg.checkpoint_dir = dir_a;
  const TrainResult a = train(cfg, corpus, policy);
  cfg.checkpoint_dir = dir_b;
  const TrainResult b = train(cfg, corpus, policy);

  REQUIRE(a.history.epochs.size() == b.history.epochs.size());
  for (std::size_t i = 0; i < a.history.epochs.size(); ++i) {
    REQUIRE(a.history.epochs[i].train_loss == b.history.epochs[i].train_loss);
    REQUIRE(a.history.epochs[i].validation_loss ==
            b.history.epochs[i].validation_loss);
    REQUIRE(a.history.epochs[i].lr == b.history.epochs[i].lr);
  }
  REQUIRE(a.history.selected_epoch == b.history.selected_epoch);
  REQUIRE(file_digest_hex(dir_a / a.history.selected_checkpoint) ==
          file_digest_hex(dir_b / b.history.selected_checkpoint));
}

TEST_CASE("training rejects empty splits") {
  const fs::path manifest = make_toy_corpus("empty_split");
  LoadedCorpus corpus = load_corpus(manifest);
  corpus.validation.clear();
  TrainConfig cfg;
  cfg.checkpoint_dir = temp_dir("empty_split_ckpt");
  REQUIRE_THROWS_AS(train(cfg, corpus, no_augmentation()), ConfigError);
}

TEST_CASE("a separable toy corpus trains to high validation accuracy") {
  const fs::path manifest = make_toy_corpus("learn");
  const LoadedCorpus corpus = load_corpus(manifest);
  TrainConfig cfg;
  cfg.max_epochs = 50;
  cfg.batch_size = 20;
  cfg.model = {13, 16, 2};
  cfg.optimizer = adam_spec(0.01);
  cfg.seed = 7;
  cfg.checkpoint_dir = temp_dir("learn_ckpt");
  const TrainResult result = train(cfg, corpus, no_augmentation());
  const auto preds = evaluate_model(result.params, corpus.validation);
  REQUIRE(accuracy(preds) >= 0.9);
}

TEST_CASE("distillation with delta 1 ignores the teacher bit for bit") {
  const fs::path manifest = make_toy_corpus("kd_delta1");
  const LoadedCorpus corpus = load_corpus(manifest);
  Pcg32 rng(17);
  const ModelParams init = ModelParams::random_init({13, 4, 2}, rng);

  TeacherLogits teacher_a;
  TeacherLogits teacher_b;
  Pcg32 zrng(23);
  for (const auto* split : {&corpus.train, &corpus.validation})
    for (const auto& w : *split) {
      Eigen::VectorXd za(2);
      Eigen::VectorXd zb(2);
      za << zrng.uniform(-2, 2), zrng.uniform(-2, 2);
      zb << zrng.uniform(-2, 2), zrng.uniform(-2, 2);
      teacher_a[{w.utterance_id, w.window_index}] = za;
      teacher_b[{w.utterance_id, w.window_index}] = zb;
    }

  TrainConfig cfg;
  cfg.max_epochs = 3;
  cfg.batch_size = 8;
  cfg.model = {13, 4, 2};
  cfg.seed = 31;
  KdConfig kd;
  kd.delta = 1.0;
  kd.optimizer = sgd_momentum_spec(1e-3, 0.9, 0.0);

  cfg.checkpoint_dir = temp_dir("kd_delta1_a");
  const TrainResult ra = distill(init, teacher_a, kd, cfg, corpus, no_augmentation());
  cfg.checkpoint_dir = temp_dir("kd_delta1_b");
  const TrainResult rb = distill(init, teacher_b, kd, cfg, corpus, no_augmentation());

  auto ta = ModelParams::tensor_refs(static_cast<const ModelParams&>(ra.params));
  auto tb = ModelParams::tensor_refs(static_cast<const ModelParams&>(rb.params));
  for (std::size_t k = 0; k < ta.size(); ++k)
    for (Eigen::Index i = 0; i < ta[k].size; ++i)
      REQUIRE(ta[k].data[i] == tb[k].data[i]);
}

TEST_CASE("distillation reports the first missing teacher window") {
  const fs::path manifest = make_toy_corpus("kd_missing");
  const LoadedCorpus corpus = load_corpus(manifest);
  Pcg32 rng(41);
  const ModelParams init = ModelParams::random_init({13, 4, 2}, rng);
  TeacherLogits teacher;  // empty: zero coverage
  TrainConfig cfg;
  cfg.model = {13, 4, 2};
  cfg.checkpoint_dir = temp_dir("kd_missing_ckpt");
  try {
    distill(init, teacher, KdConfig{}, cfg, corpus, no_augmentation());
    FAIL("expected DataError");
  } catch (const DataError& e) {
    REQUIRE(std::string(e.what()).find(corpus.train[0].utterance_id) !=
            std::string::npos);
  }
}

TEST_CASE("distilling from an ideal teacher keeps the student accurate") {
  const fs::path manifest = make_toy_corpus("kd_ideal");
  const LoadedCorpus corpus = load_corpus(manifest);

  // baseline student first
  TrainConfig cfg;
  cfg.max_epochs = 40;
  cfg.batch_size = 20;
  cfg.model = {13, 16, 2};
  cfg.optimizer = adam_spec(0.01);
  cfg.seed = 53;
  cfg.checkpoint_dir = temp_dir("kd_ideal_base");
  const TrainResult base = train(cfg, corpus, no_augmentation());

  // one-hot-consistent oracle logits
  TeacherLogits teacher;
  for (const auto* split : {&corpus.train, &corpus.validation})
    for (const auto& w : *split) {
      Eigen::VectorXd z(2);
      z << (w.label == 0 ? 4.0 : -4.0), (w.label == 1 ? 4.0 : -4.0);
      teacher[{w.utterance_id, w.window_index}] = z;
    }

  TrainConfig kd_cfg = cfg;
  kd_cfg.max_epochs = 20;
  kd_cfg.checkpoint_dir = temp_dir("kd_ideal_student");
  const TrainResult distilled =
      distill(base.params, teacher, KdConfig{}, kd_cfg, corpus, no_augmentation());

  const double base_acc = accuracy(evaluate_model(base.params, corpus.validation));
  const double kd_acc =
      accuracy(evaluate_model(distilled.params, corpus.validation));
  REQUIRE(kd_acc >= base_acc - 0.125);  // one window of slack at this scale
  REQUIRE(kd_acc >= 0.75);
}

TEST_CASE("evaluation is deterministic with scores in range") {
  const fs::path manifest = make_toy_corpus("eval");
  const LoadedCorpus corpus = load_corpus(manifest);
  Pcg32 rng(61);
  const ModelParams p = ModelParams::random_init({13, 5, 2}, rng);
  const auto a = evaluate_model(p, corpus.test);
  const auto b = evaluate_model(p, corpus.test);
  REQUIRE(a.size() == corpus.test.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].score == b[i].score);
    REQUIRE(a[i].score >= 0.0);
    REQUIRE(a[i].score <= 1.0);
  }
  REQUIRE_THROWS_AS(evaluate_model(p, std::vector<TrainWindow>{}), DataError);
}

TEST_CASE("training history persists through JSON") {
  const fs::path dir = temp_dir("history_io");
  TrainingHistory h = history_from_losses({0.5, 0.25, 0.375});
  h.epochs[1].train_loss = 0.4;
  h.epochs[1].lr = 1e-3;
  h.selected_epoch = 2;
  h.selected_checkpoint = "epoch_2.ckpt";
  save_history(dir / "history.json", h);
  const TrainingHistory loaded = load_history(dir / "history.json");
  REQUIRE(loaded.epochs.size() == 3);
  REQUIRE(loaded.epochs[1].train_loss == 0.4);
  REQUIRE(loaded.epochs[1].validation_loss == 0.25);
  REQUIRE(loaded.selected_epoch == 2);
  REQUIRE(loaded.selected_checkpoint == "epoch_2.ckpt");
}
