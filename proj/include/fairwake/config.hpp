// fairwake/config.hpp

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

// Declarative JSON run configuration mirroring TrainConfig / KdConfig /
// AugmentationPolicy / SynthSpec. Every field is optional and defaults to the
// values documented in the README; command-line flags override file values.

#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "fairwake/augment.hpp"
#include "fairwake/common.hpp"
#include "fairwake/corpus.hpp"
#include "fairwake/training.hpp"

namespace fairwake {

struct PipelineConfig {
  TrainConfig train;
  AugmentationPolicy policy;
  KdConfig kd;
};

namespace detail {

inline Technique technique_from_name(const std::string& name) {
  if (name == "freq_mix_style") return Technique::kFreqMixStyle;
  if (name == "filter_augment") return Technique::kFilterAugment;
  if (name == "freq_masking") return Technique::kFreqMasking;
  if (name == "dir") return Technique::kDir;
  throw ConfigError("unknown augmentation technique '" + name + "'");
}

inline OptimizerSpec parse_optimizer(const nlohmann::json& j,
                                     const OptimizerSpec& defaults) {
  OptimizerSpec spec = defaults;
  if (j.contains("kind")) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "adam")
      spec.kind = OptimizerKind::kAdam;
    else if (kind == "sgd_momentum")
      spec.kind = OptimizerKind::kSgdMomentum;
    else
      throw ConfigError("unknown optimizer kind '" + kind + "'");
  }
  spec.lr = j.value("lr", spec.lr);
  spec.beta1 = j.value("beta1", spec.beta1);
  spec.beta2 = j.value("beta2", spec.beta2);
  spec.eps = j.value("eps", spec.eps);
  spec.momentum = j.value("momentum", spec.momentum);
  spec.weight_decay = j.value("weight_decay", spec.weight_decay);
  return spec;
}

}  // namespace detail

inline PipelineConfig parse_pipeline_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("run config must be a JSON object");
  PipelineConfig cfg;

  cfg.train.max_epochs = j.value("max_epochs", cfg.train.max_epochs);
  cfg.train.batch_size = j.value("batch_size", cfg.train.batch_size);
  cfg.train.seed = j.value("seed", cfg.train.seed);
  cfg.train.n_threads = j.value("n_threads", cfg.train.n_threads);

  if (j.contains("model")) {
    const auto& jm = j.at("model");
    cfg.train.model.input_size = jm.value("input_size", cfg.train.model.input_size);
    cfg.train.model.hidden_size = jm.value("hidden_size", cfg.train.model.hidden_size);
    cfg.train.model.n_classes = jm.value("n_classes", cfg.train.model.n_classes);
  }
  if (j.contains("optimizer"))
    cfg.train.optimizer = detail::parse_optimizer(j.at("optimizer"), adam_spec(1e-3));
  if (j.contains("scheduler")) {
    const auto& js = j.at("scheduler");
    cfg.train.plateau.factor = js.value("factor", cfg.train.plateau.factor);
    cfg.train.plateau.patience = js.value("patience", cfg.train.plateau.patience);
    cfg.train.plateau.threshold = js.value("threshold", cfg.train.plateau.threshold);
    cfg.train.plateau.max_reductions =
        js.value("max_reductions", cfg.train.plateau.max_reductions);
  }
  if (j.contains("validation")) {
    const auto& jv = j.at("validation");
    cfg.train.validation.enabled = jv.value("perturb", cfg.train.validation.enabled);
    cfg.train.validation.snr_db_min =
        jv.value("snr_db_min", cfg.train.validation.snr_db_min);
    cfg.train.validation.snr_db_max =
        jv.value("snr_db_max", cfg.train.validation.snr_db_max);
  }

  if (j.contains("augmentation")) {
    const auto& ja = j.at("augmentation");
    cfg.policy.apply_probability =
        ja.value("apply_probability", cfg.policy.apply_probability);
    cfg.policy.allow_stacking = ja.value("allow_stacking", cfg.policy.allow_stacking);
    if (ja.contains("enabled"))
      for (const auto& name : ja.at("enabled"))
        cfg.policy.enabled.push_back(
            detail::technique_from_name(name.get<std::string>()));
    if (ja.contains("freq_mix_style")) {
      const auto& jf = ja.at("freq_mix_style");
      cfg.policy.freq_mix_style.alpha =
          jf.value("alpha", cfg.policy.freq_mix_style.alpha);
      cfg.policy.freq_mix_style.same_label_only =
          jf.value("same_label_only", cfg.policy.freq_mix_style.same_label_only);
    }
    if (ja.contains("filter_augment")) {
      const auto& jf = ja.at("filter_augment");
      auto& fa = cfg.policy.filter_augment;
      fa.n_bands_min = jf.value("n_bands_min", fa.n_bands_min);
      fa.n_bands_max = jf.value("n_bands_max", fa.n_bands_max);
      fa.min_bandwidth_hz = jf.value("min_bandwidth_hz", fa.min_bandwidth_hz);
      fa.gain_db_min = jf.value("gain_db_min", fa.gain_db_min);
      fa.gain_db_max = jf.value("gain_db_max", fa.gain_db_max);
    }
    if (ja.contains("freq_masking")) {
      const auto& jf = ja.at("freq_masking");
      cfg.policy.freq_masking.max_width =
          jf.value("max_width", cfg.policy.freq_masking.max_width);
      cfg.policy.freq_masking.n_mel_channels =
          jf.value("n_mel_channels", cfg.policy.freq_masking.n_mel_channels);
    }
  }

  if (j.contains("kd")) {
    const auto& jk = j.at("kd");
    cfg.kd.delta = jk.value("delta", cfg.kd.delta);
    cfg.kd.tau = jk.value("tau", cfg.kd.tau);
    if (jk.contains("optimizer"))
      cfg.kd.optimizer = detail::parse_optimizer(
          jk.at("optimizer"), sgd_momentum_spec(1e-4, 0.9, 1e-4));
  }
  return cfg;
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

inline PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  return parse_pipeline_config(read_json_file(path));
}

inline SynthSpec parse_synth_spec(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("groups"))
    throw ConfigError("synth spec must be a JSON object with a 'groups' array");
  SynthSpec spec;
  for (const auto& jg : j.at("groups")) {
    SynthGroup g;
    g.label = jg.at("label").get<std::string>();
    g.sex = jg.value("sex", g.sex);
    g.age_group = jg.value("age_group", g.age_group);
    g.accent = jg.value("accent", g.accent);
    g.f0_hz = jg.value("f0_hz", g.f0_hz);
    g.band_hz = jg.value("band_hz", g.band_hz);
    spec.groups.push_back(std::move(g));
  }
  if (j.contains("counts")) {
    const auto& jc = j.at("counts");
    spec.counts.train_pos = jc.value("train_pos", 0);
    spec.counts.train_neg = jc.value("train_neg", 0);
    spec.counts.validation_pos = jc.value("validation_pos", 0);
    spec.counts.validation_neg = jc.value("validation_neg", 0);
    spec.counts.test_pos = jc.value("test_pos", 0);
    spec.counts.test_neg = jc.value("test_neg", 0);
  }
  spec.noise_level = j.value("noise_level", spec.noise_level);
  spec.snr_jitter = j.value("snr_jitter", spec.snr_jitter);
  spec.amp_min = j.value("amp_min", spec.amp_min);
  spec.amp_max = j.value("amp_max", spec.amp_max);
  spec.detune_factor = j.value("detune_factor", spec.detune_factor);
  spec.n_noise_files = j.value("n_noise_files", spec.n_noise_files);
  spec.n_rir_files = j.value("n_rir_files", spec.n_rir_files);
  spec.speakers_per_group = j.value("speakers_per_group", spec.speakers_per_group);
  spec.seed = j.value("seed", spec.seed);
  spec.clip_seconds = j.value("clip_seconds", spec.clip_seconds);
  return spec;
}

inline SynthSpec load_synth_spec(const std::filesystem::path& path) {
  return parse_synth_spec(read_json_file(path));
}

}  // namespace fairwake
