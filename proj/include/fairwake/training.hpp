// fairwake/training.hpp

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

// Training orchestration: window/feature loading, the baseline loop
// (mini-batch CE with gated augmentation, perturbed validation, plateau
// scheduling, best-3 checkpointing), best-3-mean checkpoint selection comes,
// knowledge distillation against ingested teacher logits, the toy-teacher
// logit export, and model evaluation into prediction records.

#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "fairwake/augment.hpp"
#include "fairwake/checkpoint.hpp"
#include "fairwake/common.hpp"
#include "fairwake/corpus.hpp"
#include "fairwake/fairness.hpp"
#include "fairwake/gru.hpp"
#include "fairwake/losses.hpp"
#include "fairwake/optim.hpp"
#include "fairwake/parallel.hpp"
#include "fairwake/rng.hpp"
#include "fairwake/wav.hpp"

namespace fairwake {

/// One loaded training/evaluation window: fixed-length samples plus the
/// cached clean MFCC features.
struct TrainWindow {
  std::string utterance_id;
  int window_index = 0;
  int label = 0;
  std::vector<double> samples;  // kEvalWindowSamples
  Eigen::MatrixXd features;     // 29 x 13
};

struct LoadedCorpus {
  std::vector<TrainWindow> train;
  std::vector<TrainWindow> validation;
  std::vector<TrainWindow> test;
  std::vector<Waveform> noise_pool;
  std::vector<ImpulseResponse> rir_pool;
  std::vector<Utterance> utterances;
};

/// Loads audio, windows every labeled utterance, and extracts clean features.
/// Resources feed the noise/RIR pools: rows with role=rir become impulse
/// responses, unlabeled noise rows become validation noise.
inline LoadedCorpus load_corpus(const std::filesystem::path& manifest_path,
                                int n_threads = 0) {
  LoadedCorpus corpus;
  corpus.utterances = load_manifest(manifest_path);
  const std::filesystem::path base = manifest_path.parent_path();
  const FrameConfig frame;

  struct Slot {
    std::vector<TrainWindow> windows;
    const Utterance* utterance = nullptr;
  };
  std::vector<Slot> slots(corpus.utterances.size());

  parallel_for(static_cast<int>(corpus.utterances.size()), n_threads, [&](int i) {
    const Utterance& u = corpus.utterances[static_cast<std::size_t>(i)];
    Slot& slot = slots[static_cast<std::size_t>(i)];
    slot.utterance = &u;
    const Waveform w = read_wav(base / u.audio_path);
    if (w.sample_rate != kPipelineSampleRate)
      throw DataError("utterance '" + u.id + "' is " +
                      std::to_string(w.sample_rate) +
                      " Hz; the pipeline requires 16 kHz mono");
    if (u.role == "rir") return;  // handled below, sequentially
    if (u.label.empty()) return;
    for (const EvalWindow& ew : window_utterance(u, w)) {
      TrainWindow tw;
      tw.utterance_id = u.id;
      tw.window_index = ew.window_index;
      tw.label = ew.label;
      Waveform clip = extract_window(w, ew);
      tw.features = mfcc_features(clip, frame).coeffs;
      tw.samples = std::move(clip.samples);
      slot.windows.push_back(std::move(tw));
    }
  });

  for (std::size_t i = 0; i < slots.size(); ++i) {
    const Utterance& u = corpus.utterances[i];
    if (u.role == "rir") {
      const Waveform w = read_wav(base / u.audio_path);
      ImpulseResponse ir;
      ir.taps = w.samples;
      ir.sample_rate = w.sample_rate;
      ir.source_id = u.id;
      corpus.rir_pool.push_back(std::move(ir));
      continue;
    }
    if (u.label.empty()) {
      if (u.sound_type == "noise")
        corpus.noise_pool.push_back(read_wav(base / u.audio_path));
      continue;
    }
    auto* dest = u.split == "train"        ? &corpus.train
                 : u.split == "validation" ? &corpus.validation
                                           : &corpus.test;
    for (auto& w : slots[i].windows) dest->push_back(std::move(w));
  }
  return corpus;
}

// ---------------------------------------------------------------------------
// Teacher logits

struct WindowKey {
  std::string utterance_id;
  int window_index = 0;
  bool operator==(const WindowKey&) const = default;
  bool operator<(const WindowKey& o) const {
    return utterance_id != o.utterance_id ? utterance_id < o.utterance_id
                                          : window_index < o.window_index;
  }
};

struct WindowKeyHash {
  std::size_t operator()(const WindowKey& k) const {
    return std::hash<std::string>()(k.utterance_id) * 1099511628211ULL ^
           static_cast<std::size_t>(k.window_index);
  }
};

using TeacherLogits = std::unordered_map<WindowKey, Eigen::VectorXd, WindowKeyHash>;

/// JSON Lines, one record per window: {"id", "window", "z": [z_unknown, z_wuw]}.
inline void save_teacher_logits(const std::filesystem::path& path,
                                const TeacherLogits& logits) {
  std::vector<const std::pair<const WindowKey, Eigen::VectorXd>*> entries;
  entries.reserve(logits.size());
  for (const auto& e : logits) entries.push_back(&e);
  std::sort(entries.begin(), entries.end(),
            [](const auto* a, const auto* b) { return a->first < b->first; });

  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DataError("cannot write teacher logits: " + path.string());
  for (const auto* e : entries) {
    nlohmann::ordered_json j;
    j["id"] = e->first.utterance_id;
    j["window"] = e->first.window_index;
    j["z"] = std::vector<double>(e->second.data(),
                                 e->second.data() + e->second.size());
    os << j.dump() << "\n";
  }
}

inline TeacherLogits load_teacher_logits(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open teacher logits: " + path.string());
  TeacherLogits logits;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw DataError(where + ": malformed logits line");
    WindowKey key{j.at("id").get<std::string>(), j.at("window").get<int>()};
    const auto z = j.at("z").get<std::vector<double>>();
    if (z.size() != 2)
      throw DataError(where + ": expected two logits (unknown, wuw)");
    for (double v : z)
      if (!std::isfinite(v)) throw DataError(where + ": non-finite logit");
    Eigen::VectorXd zv(2);
    zv << z[0], z[1];
    if (!logits.emplace(std::move(key), std::move(zv)).second)
      throw DataError(where + ": duplicate window key");
  }
  return logits;
}

// ---------------------------------------------------------------------------
// Configuration and history

struct ValidationPerturbSettings {
  bool enabled = true;
  double snr_db_min = 5.0;
  double snr_db_max = 20.0;
};

struct TrainConfig {
  int max_epochs = 700;
  int batch_size = 128;
  ModelConfig model{kMfccCoeffs, 200, 2};
  OptimizerSpec optimizer = adam_spec(1e-3);
  PlateauConfig plateau{};
  ValidationPerturbSettings validation;
  std::uint64_t seed = 0;
  std::filesystem::path checkpoint_dir;
  int n_threads = 0;
};

struct KdConfig {
  double delta = 0.2;
  double tau = 2.0;
  OptimizerSpec optimizer = sgd_momentum_spec(1e-4, 0.9, 1e-4);
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double validation_loss = 0.0;
  double lr = 0.0;
  std::string checkpoint_file;  // relative to the checkpoint dir; may be empty
};

struct TrainingHistory {
  std::vector<EpochRecord> epochs;
  int selected_epoch = -1;
  std::string selected_checkpoint;
};

inline nlohmann::json to_json(const TrainingHistory& h) {
  nlohmann::json j;
  j["epochs"] = nlohmann::json::array();
  for (const auto& e : h.epochs) {
    nlohmann::json je;
    je["epoch"] = e.epoch;
    je["train_loss"] = e.train_loss;
    je["validation_loss"] = e.validation_loss;
    je["lr"] = e.lr;
    je["checkpoint_file"] = e.checkpoint_file;
    j["epochs"].push_back(je);
  }
  j["selected_epoch"] = h.selected_epoch;
  j["selected_checkpoint"] = h.selected_checkpoint;
  return j;
}

inline TrainingHistory history_from_json(const nlohmann::json& j) {
  TrainingHistory h;
  for (const auto& je : j.at("epochs")) {
    EpochRecord e;
    e.epoch = je.at("epoch").get<int>();
    e.train_loss = je.at("train_loss").get<double>();
    e.validation_loss = je.at("validation_loss").get<double>();
    e.lr = je.at("lr").get<double>();
    e.checkpoint_file = je.at("checkpoint_file").get<std::string>();
    h.epochs.push_back(std::move(e));
  }
  h.selected_epoch = j.at("selected_epoch").get<int>();
  h.selected_checkpoint = j.at("selected_checkpoint").get<std::string>();
  return h;
}

inline void save_history(const std::filesystem::path& path,
                         const TrainingHistory& h) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DataError("cannot write history: " + path.string());
  os << to_json(h).dump(2) << "\n";
}

inline TrainingHistory load_history(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open history: " + path.string());
  nlohmann::json j;
  in >> j;
  return history_from_json(j);
}

/// The checkpoint whose validation loss is nearest the mean of the three
/// lowest validation losses (all epochs when fewer than three); ties break
/// toward the later epoch. Returns an index into history.epochs.
inline std::size_t select_checkpoint(const TrainingHistory& history) {
  if (history.epochs.empty())
    throw DataError("select_checkpoint: empty training history");
  std::vector<std::size_t> order(history.epochs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ea = history.epochs[a];
    const auto& eb = history.epochs[b];
    return ea.validation_loss != eb.validation_loss
               ? ea.validation_loss < eb.validation_loss
               : ea.epoch < eb.epoch;
  });
  const std::size_t k = std::min<std::size_t>(3, order.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    mean += history.epochs[order[i]].validation_loss;
  mean /= static_cast<double>(k);

  std::size_t best = order[0];
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < k; ++i) {
    const auto& e = history.epochs[order[i]];
    const double dist = std::abs(e.validation_loss - mean);
    if (dist < best_dist ||
        (dist == best_dist && e.epoch > history.epochs[best].epoch)) {
      best_dist = dist;
      best = order[i];
    }
  }
  return best;
}

struct TrainResult {
  ModelParams params;
  TrainingHistory history;
};

// ---------------------------------------------------------------------------
// Shared epoch loop

namespace detail {

/// Per-window objective: returns the loss and fills the logit gradient.
using WindowObjective = std::function<double(
    const TrainWindow&, const Eigen::VectorXd& logits, Eigen::VectorXd& grad)>;

inline constexpr std::uint64_t kShuffleTag = 0x5a55f1e0ULL;
inline constexpr std::uint64_t kAugmentTag = 0xa3612e57ULL;
inline constexpr std::uint64_t kValidationTag = 0x7a11da7eULL;

inline TrainResult run_training_loop(const TrainConfig& cfg,
                                     const OptimizerSpec& opt_spec,
                                     const LoadedCorpus& corpus,
                                     const AugmentationPolicy& policy,
                                     const WindowObjective& objective,
                                     ModelParams initial_params) {
  if (corpus.train.empty() || corpus.validation.empty())
    throw ConfigError("training requires non-empty train and validation splits");
  if (cfg.batch_size < 1 || cfg.max_epochs < 1)
    throw ConfigError("training: batch_size and max_epochs must be >= 1");
  if (cfg.checkpoint_dir.empty())
    throw ConfigError("training: checkpoint_dir must be set");
  std::filesystem::create_directories(cfg.checkpoint_dir);

  const FrameConfig frame;
  ModelParams params = std::move(initial_params);
  Optimizer optimizer(opt_spec, params);
  PlateauScheduler scheduler(opt_spec.lr, cfg.plateau);

  const bool perturb = cfg.validation.enabled && !corpus.rir_pool.empty() &&
                       !corpus.noise_pool.empty();
  if (cfg.validation.enabled && !perturb)
    log::info("validation perturbation disabled: no noise/RIR resources");

  TrainingHistory history;
  std::vector<double> best_losses;  // running best-3 validation losses

  const int n_train = static_cast<int>(corpus.train.size());
  std::vector<int> order(static_cast<std::size_t>(n_train));
  for (int i = 0; i < n_train; ++i) order[static_cast<std::size_t>(i)] = i;

  bool stop = false;
  for (int epoch = 1; epoch <= cfg.max_epochs && !stop; ++epoch) {
    {
      Pcg32 shuffle_rng(derive_stream(cfg.seed, kShuffleTag,
                                      static_cast<std::uint64_t>(epoch)));
      for (int i = n_train - 1; i > 0; --i) {
        const int j = shuffle_rng.uniform_int(0, i);
        std::swap(order[static_cast<std::size_t>(i)],
                  order[static_cast<std::size_t>(j)]);
      }
    }

    double train_loss_sum = 0.0;
    const double epoch_lr = optimizer.lr();
    for (int begin = 0; begin < n_train; begin += cfg.batch_size) {
      const int end = std::min(n_train, begin + cfg.batch_size);
      const int b = end - begin;

      std::vector<PolicyItem> items;
      items.reserve(static_cast<std::size_t>(b));
      for (int k = begin; k < end; ++k) {
        const TrainWindow& w =
            corpus.train[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
        Waveform wave;
        wave.sample_rate = kPipelineSampleRate;
        wave.samples = w.samples;
        items.push_back({std::move(wave), w.label});
      }
      const std::uint64_t batch_seed = derive_stream(
          cfg.seed, kAugmentTag,
          static_cast<std::uint64_t>(epoch) * 1000003ULL +
              static_cast<std::uint64_t>(begin / cfg.batch_size));
      const auto augmented =
          apply_policy_sparse(items, policy, batch_seed, cfg.n_threads);

      std::vector<Eigen::MatrixXd> batch_features(static_cast<std::size_t>(b));
      parallel_for(b, cfg.n_threads, [&](int k) {
        const TrainWindow& w =
            corpus.train[static_cast<std::size_t>(order[static_cast<std::size_t>(begin + k)])];
        if (augmented[static_cast<std::size_t>(k)].has_value())
          batch_features[static_cast<std::size_t>(k)] =
              mfcc_features(*augmented[static_cast<std::size_t>(k)], frame).coeffs;
        else
          batch_features[static_cast<std::size_t>(k)] = w.features;
      });

      std::vector<const Eigen::MatrixXd*> ptrs;
      ptrs.reserve(static_cast<std::size_t>(b));
      for (const auto& f : batch_features) ptrs.push_back(&f);
      auto fwd = gru_forward_batch(params, ptrs);

      Eigen::MatrixXd dlogits(params.config.n_classes, b);
      double batch_loss = 0.0;
      for (int k = 0; k < b; ++k) {
        const TrainWindow& w =
            corpus.train[static_cast<std::size_t>(order[static_cast<std::size_t>(begin + k)])];
        Eigen::VectorXd grad(params.config.n_classes);
        batch_loss += objective(w, fwd.logits.col(k), grad);
        dlogits.col(k) = grad / static_cast<double>(b);
      }
      train_loss_sum += batch_loss;

      const ParamGrads grads = gru_backward_batch(fwd.cache, dlogits);
      optimizer.step(params, grads);
    }
    const double train_loss = train_loss_sum / static_cast<double>(n_train);

    const int n_val = static_cast<int>(corpus.validation.size());
    std::vector<Eigen::MatrixXd> val_features(static_cast<std::size_t>(n_val));
    parallel_for(n_val, cfg.n_threads, [&](int i) {
      const TrainWindow& w = corpus.validation[static_cast<std::size_t>(i)];
      if (!perturb) {
        val_features[static_cast<std::size_t>(i)] = w.features;
        return;
      }
      Pcg32 rng(derive_stream(cfg.seed, kValidationTag,
                              static_cast<std::uint64_t>(epoch) * 1000003ULL +
                                  static_cast<std::uint64_t>(i)));
      Waveform wave;
      wave.sample_rate = kPipelineSampleRate;
      wave.samples = w.samples;
      const ImpulseResponse& rir = corpus.rir_pool[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<int>(corpus.rir_pool.size()) - 1))];
      const Waveform& noise = corpus.noise_pool[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<int>(corpus.noise_pool.size()) - 1))];
      const double snr =
          rng.uniform(cfg.validation.snr_db_min, cfg.validation.snr_db_max);
      const Waveform perturbed = validation_perturb(wave, noise, rir, snr, rng);
      val_features[static_cast<std::size_t>(i)] =
          mfcc_features(perturbed, frame).coeffs;
    });

    double val_loss_sum = 0.0;
    for (int begin = 0; begin < n_val; begin += cfg.batch_size) {
      const int end = std::min(n_val, begin + cfg.batch_size);
      std::vector<const Eigen::MatrixXd*> ptrs;
      for (int i = begin; i < end; ++i)
        ptrs.push_back(&val_features[static_cast<std::size_t>(i)]);
      const auto fwd = gru_forward_batch(params, ptrs);
      for (int i = begin; i < end; ++i) {
        Eigen::VectorXd unused(params.config.n_classes);
        val_loss_sum += objective(corpus.validation[static_cast<std::size_t>(i)],
                                  fwd.logits.col(i - begin), unused);
      }
    }
    const double val_loss = val_loss_sum / static_cast<double>(n_val);

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = train_loss;
    record.validation_loss = val_loss;
    record.lr = epoch_lr;

    const bool enters_best3 =
        best_losses.size() < 3 || val_loss <= best_losses.back();
    if (enters_best3) {
      char name[32];
      std::snprintf(name, sizeof(name), "epoch_%04d.ckpt", epoch);
      save_checkpoint(cfg.checkpoint_dir / name, params, cfg.seed);
      record.checkpoint_file = name;
      best_losses.push_back(val_loss);
      std::sort(best_losses.begin(), best_losses.end());
      if (best_losses.size() > 3) best_losses.resize(3);
    }
    history.epochs.push_back(record);

    const auto update = scheduler.observe(val_loss);
    optimizer.set_lr(update.lr);
    stop = update.stop;
    log::debug("epoch " + std::to_string(epoch) + ": train " +
               std::to_string(train_loss) + ", val " + std::to_string(val_loss) +
               ", lr " + std::to_string(epoch_lr));
  }

  const std::size_t selected = select_checkpoint(history);
  history.selected_epoch = history.epochs[selected].epoch;
  history.selected_checkpoint = history.epochs[selected].checkpoint_file;
  if (history.selected_checkpoint.empty())
    throw DataError("training: selected epoch has no checkpoint on disk");
  TrainResult result;
  result.params =
      load_checkpoint(cfg.checkpoint_dir / history.selected_checkpoint).params;
  result.history = std::move(history);
  return result;
}

}  // namespace detail

/// Baseline training: shuffled mini-batches, cross-entropy, gated
/// augmentation on train, noise+reverb perturbation on validation, plateau
/// scheduling, and best-3 checkpointing.
inline TrainResult train(const TrainConfig& cfg, const LoadedCorpus& corpus,
                         const AugmentationPolicy& policy) {
  Pcg32 init_rng(derive_stream(cfg.seed, 0x1217ULL));
  ModelParams params = ModelParams::random_init(cfg.model, init_rng);
  const detail::WindowObjective ce_objective =
      [](const TrainWindow& w, const Eigen::VectorXd& logits,
         Eigen::VectorXd& grad) {
        grad = cross_entropy_logits_grad(logits, w.label);
        return cross_entropy(softmax(logits), w.label);
      };
  return detail::run_training_loop(cfg, cfg.optimizer, corpus, policy,
                                   ce_objective, std::move(params));
}

/// Distillation: identical loop, but minimizing kd_loss against the ingested
/// teacher logits with SGD-momentum. Teacher entries are looked up for the
/// clean window key whether or not the sample was augmented. Coverage of all
/// train and validation windows is checked upfront.
inline TrainResult distill(const ModelParams& student_init,
                           const TeacherLogits& teacher, const KdConfig& kd,
                           const TrainConfig& cfg, const LoadedCorpus& corpus,
                           const AugmentationPolicy& policy) {
  if (!(student_init.config == cfg.model))
    throw DimensionError("distill: student checkpoint does not match the model config");
  if (!(kd.delta >= 0.0 && kd.delta <= 1.0))
    throw ConfigError("distill: delta must be in [0, 1]");
  if (!(kd.tau > 0.0)) throw ConfigError("distill: tau must be positive");

  auto check_coverage = [&](const std::vector<TrainWindow>& windows,
                            const char* split) {
    for (const auto& w : windows) {
      if (teacher.find({w.utterance_id, w.window_index}) == teacher.end())
        throw DataError(std::string("distill: teacher logits missing ") + split +
                        " window (" + w.utterance_id + ", " +
                        std::to_string(w.window_index) + ")");
    }
  };
  check_coverage(corpus.train, "train");
  check_coverage(corpus.validation, "validation");

  const double delta = kd.delta;
  const double tau = kd.tau;
  const detail::WindowObjective kd_objective =
      [&teacher, delta, tau](const TrainWindow& w, const Eigen::VectorXd& logits,
                             Eigen::VectorXd& grad) {
        const Eigen::VectorXd& teacher_z =
            teacher.at({w.utterance_id, w.window_index});
        grad = kd_loss_grad(logits, teacher_z, w.label, delta, tau);
        return kd_loss(logits, teacher_z, w.label, delta, tau);
      };
  return detail::run_training_loop(cfg, kd.optimizer, corpus, policy,
                                   kd_objective, student_init);
}

/// Deterministic forward pass over clean windows; score is the wuw softmax
/// probability.
inline std::vector<PredictionRecord> evaluate_model(
    const ModelParams& params, const std::vector<TrainWindow>& windows,
    int batch_size = 128) {
  if (windows.empty()) throw DataError("evaluate: no windows in the split");
  std::vector<PredictionRecord> preds;
  preds.reserve(windows.size());
  const int n = static_cast<int>(windows.size());
  for (int begin = 0; begin < n; begin += batch_size) {
    const int end = std::min(n, begin + batch_size);
    std::vector<const Eigen::MatrixXd*> ptrs;
    for (int i = begin; i < end; ++i)
      ptrs.push_back(&windows[static_cast<std::size_t>(i)].features);
    const auto fwd = gru_forward_batch(params, ptrs);
    for (int i = begin; i < end; ++i) {
      const TrainWindow& w = windows[static_cast<std::size_t>(i)];
      PredictionRecord p;
      p.utterance_id = w.utterance_id;
      p.window_index = w.window_index;
      p.score = softmax(fwd.logits.col(i - begin))(1);
      p.true_label = w.label == 1 ? "wuw" : "unknown";
      preds.push_back(std::move(p));
    }
  }
  return preds;
}

/// Exports teacher logits for every train and validation window (clean
/// features), keyed by (utterance_id, window_index).
inline TeacherLogits export_toy_teacher_logits(const ModelParams& teacher,
                                               const LoadedCorpus& corpus,
                                               int batch_size = 128) {
  TeacherLogits logits;
  for (const auto* split : {&corpus.train, &corpus.validation}) {
    const int n = static_cast<int>(split->size());
    for (int begin = 0; begin < n; begin += batch_size) {
      const int end = std::min(n, begin + batch_size);
      std::vector<const Eigen::MatrixXd*> ptrs;
      for (int i = begin; i < end; ++i)
        ptrs.push_back(&(*split)[static_cast<std::size_t>(i)].features);
      const auto fwd = gru_forward_batch(teacher, ptrs);
      for (int i = begin; i < end; ++i) {
        const TrainWindow& w = (*split)[static_cast<std::size_t>(i)];
        if ((*split)[static_cast<std::size_t>(i)].features.cols() !=
            teacher.config.input_size)
          throw DimensionError("export_toy_teacher_logits: feature mismatch");
        logits[{w.utterance_id, w.window_index}] = fwd.logits.col(i - begin);
      }
    }
  }
  return logits;
}

}  // namespace fairwake
