// fairwake/corpus.hpp

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

// Corpus ingestion and generation: the JSON-Lines demographic manifest,
// fixed 1.5 s evaluation windows, and a seeded synthetic corpus generator
// that plants a demographic-correlated spectral cue for desk-scale
// end-to-end bias experiments.

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairwake/augment.hpp"
#include "fairwake/common.hpp"
#include "fairwake/dsp.hpp"
#include "fairwake/rng.hpp"
#include "fairwake/wav.hpp"

namespace fairwake {

inline constexpr double kEvalWindowSeconds = 1.5;
inline constexpr int kEvalWindowSamples = 24000;  // 1.5 s at 16 kHz
inline constexpr double kMinUtteranceSeconds = 0.1;

inline const std::vector<std::string>& known_sex_values() {
  static const std::vector<std::string> v = {"female", "male", "unknown"};
  return v;
}

inline const std::vector<std::string>& known_age_groups() {
  static const std::vector<std::string> v = {"0-20", "21-30", "31-40",
                                             "41-50", "51+", "unknown"};
  return v;
}

/// One manifest row. Audio paths are relative to the manifest's directory.
/// `role` marks augmentation resources ("rir" for impulse responses); rows
/// with a role or without a label are never training material.
struct Utterance {
  std::string id;
  std::string audio_path;
  std::string label;       // "wuw", "unknown", or empty for resources
  std::string sound_type = "speech";
  std::string speaker_id;
  std::string sex = "unknown";
  std::string age_group = "unknown";
  std::string accent = "unknown";
  std::string split;  // train | validation | test
  std::string role;   // "" | "rir"
  std::optional<double> event_start_s;
  std::optional<double> event_end_s;

  bool is_resource() const { return label.empty() || !role.empty(); }
  int label_index() const { return label == "wuw" ? 1 : 0; }
};

namespace detail {

inline std::string normalize_choice(std::string value,
                                    const std::vector<std::string>& allowed) {
  std::transform(value.begin(), value.end(), value.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (const auto& a : allowed)
    if (value == a) return value;
  return "unknown";
}

}  // namespace detail

/// Parses a JSON-Lines manifest. Unknown demographic values normalize to
/// "unknown"; malformed lines raise DataError with the 1-based line number.
inline std::vector<Utterance> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest: " + path.string());

  std::vector<Utterance> rows;
  std::set<std::string> seen_ids;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw DataError(where + ": malformed JSON line");

    auto get_string = [&](const char* key, bool required) -> std::string {
      if (!j.contains(key)) {
        if (required)
          throw DataError(where + ": missing required field '" + key + "'");
        return "";
      }
      if (!j.at(key).is_string())
        throw DataError(where + ": field '" + key + "' must be a string");
      return j.at(key).get<std::string>();
    };

    Utterance u;
    u.id = get_string("id", true);
    u.audio_path = get_string("audio_path", true);
    u.split = get_string("split", true);
    if (u.split != "train" && u.split != "validation" && u.split != "test")
      throw DataError(where + ": field 'split' must be train|validation|test");

    u.sound_type = get_string("sound_type", false);
    if (u.sound_type.empty()) u.sound_type = "speech";
    if (u.sound_type != "speech" && u.sound_type != "noise")
      throw DataError(where + ": field 'sound_type' must be speech|noise");

    u.role = get_string("role", false);
    u.label = get_string("label", false);
    if (u.label.empty() && u.sound_type == "speech" && u.role.empty())
      throw DataError(where + ": missing field 'label' for speech row");
    if (!u.label.empty() && u.label != "wuw" && u.label != "unknown")
      throw DataError(where + ": field 'label' must be wuw|unknown");

    u.speaker_id = get_string("speaker_id", false);
    u.sex = detail::normalize_choice(get_string("sex", false), known_sex_values());
    u.age_group =
        detail::normalize_choice(get_string("age_group", false), known_age_groups());
    u.accent = get_string("accent", false);
    if (u.accent.empty()) u.accent = "unknown";

    const bool has_start = j.contains("event_start_s");
    const bool has_end = j.contains("event_end_s");
    if (has_start != has_end)
      throw DataError(where + ": event_start_s/event_end_s must come together");
    if (has_start) {
      u.event_start_s = j.at("event_start_s").get<double>();
      u.event_end_s = j.at("event_end_s").get<double>();
      if (!(*u.event_start_s >= 0.0) || !(*u.event_end_s > *u.event_start_s))
        throw DataError(where + ": bad event annotation interval");
    }

    if (!seen_ids.insert(u.id).second)
      throw DataError("duplicate utterance id '" + u.id + "' in " + path.string());
    rows.push_back(std::move(u));
  }
  return rows;
}

/// Serializes rows as JSON Lines with a fixed field order; lossless against
/// load_manifest.
inline void save_manifest(const std::filesystem::path& path,
                          const std::vector<Utterance>& rows) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DataError("cannot write manifest: " + path.string());
  for (const auto& u : rows) {
    nlohmann::ordered_json j;
    j["id"] = u.id;
    j["audio_path"] = u.audio_path;
    if (!u.label.empty()) j["label"] = u.label;
    j["sound_type"] = u.sound_type;
    if (!u.speaker_id.empty()) j["speaker_id"] = u.speaker_id;
    j["sex"] = u.sex;
    j["age_group"] = u.age_group;
    j["accent"] = u.accent;
    j["split"] = u.split;
    if (!u.role.empty()) j["role"] = u.role;
    if (u.event_start_s.has_value()) {
      j["event_start_s"] = *u.event_start_s;
      j["event_end_s"] = *u.event_end_s;
    }
    os << j.dump() << "\n";
  }
  if (!os) throw DataError("short write to manifest: " + path.string());
}

/// A fixed 1.5 s span of one utterance; the unit of training and evaluation.
struct EvalWindow {
  std::string utterance_id;
  int window_index = 0;
  std::int64_t start_sample = 0;
  int n_samples = kEvalWindowSamples;  // may be shorter; extract zero-pads
  int label = 0;                       // 0 unknown, 1 wuw
};

/// Annotated positives get one window centered on the event; everything else
/// is tiled into non-overlapping windows with the terminal partial window
/// zero-padded. Utterances under 0.1 s are skipped with a warning.
inline std::vector<EvalWindow> window_utterance(const Utterance& u,
                                                const Waveform& w) {
  if (w.sample_rate != kPipelineSampleRate)
    throw DataError("window_utterance: utterance '" + u.id +
                    "' is not at the 16 kHz pipeline rate");
  const auto n = static_cast<std::int64_t>(w.samples.size());
  if (n < static_cast<std::int64_t>(kMinUtteranceSeconds * kPipelineSampleRate)) {
    log::warn("skipping utterance '" + u.id + "': shorter than 0.1 s");
    return {};
  }

  const int label = u.label_index();
  std::vector<EvalWindow> windows;
  if (label == 1 && u.event_start_s.has_value()) {
    const double center_s = 0.5 * (*u.event_start_s + *u.event_end_s);
    std::int64_t start =
        static_cast<std::int64_t>(std::llround(center_s * kPipelineSampleRate)) -
        kEvalWindowSamples / 2;
    const std::int64_t max_start = std::max<std::int64_t>(0, n - kEvalWindowSamples);
    start = std::clamp<std::int64_t>(start, 0, max_start);
    EvalWindow win;
    win.utterance_id = u.id;
    win.window_index = 0;
    win.start_sample = start;
    win.n_samples = static_cast<int>(std::min<std::int64_t>(kEvalWindowSamples, n - start));
    win.label = label;
    windows.push_back(win);
    return windows;
  }

  const auto n_windows = static_cast<int>((n + kEvalWindowSamples - 1) / kEvalWindowSamples);
  for (int k = 0; k < n_windows; ++k) {
    EvalWindow win;
    win.utterance_id = u.id;
    win.window_index = k;
    win.start_sample = static_cast<std::int64_t>(k) * kEvalWindowSamples;
    win.n_samples =
        static_cast<int>(std::min<std::int64_t>(kEvalWindowSamples, n - win.start_sample));
    win.label = label;
    windows.push_back(win);
  }
  return windows;
}

/// Copies the window span, zero-padding to the fixed 1.5 s length.
inline Waveform extract_window(const Waveform& w, const EvalWindow& win) {
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples.assign(kEvalWindowSamples, 0.0);
  for (int i = 0; i < win.n_samples; ++i)
    out.samples[static_cast<std::size_t>(i)] =
        w.samples[static_cast<std::size_t>(win.start_sample) + i];
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic corpus

struct SynthGroup {
  std::string label;
  std::string sex = "unknown";
  std::string age_group = "unknown";
  std::string accent = "unknown";
  double f0_hz = 130.0;    // carrier of the wake motif's first tone
  double band_hz = 1300.0; // formant-like placement of the second tone
};

struct SynthCounts {
  int train_pos = 0;
  int train_neg = 0;
  int validation_pos = 0;
  int validation_neg = 0;
  int test_pos = 0;
  int test_neg = 0;
};

struct SynthSpec {
  std::vector<SynthGroup> groups;
  SynthCounts counts;       // per group
  double noise_level = 0.03;
  double snr_jitter = 1.0;  // per-utterance noise level multiplier in [1/j, j]
  double amp_min = 0.26;    // wake-motif tone amplitude range
  double amp_max = 0.35;
  double detune_factor = 1.25;  // near-miss second-tone offset
  int n_noise_files = 0;    // extra noise resources (no label)
  int n_rir_files = 0;      // extra impulse-response resources (role = rir)
  int speakers_per_group = 4;
  std::uint64_t seed = 1;
  double clip_seconds = 1.5;
};

inline void validate_synth_spec(const SynthSpec& spec) {
  if (spec.groups.size() < 2)
    throw ConfigError("synth_corpus: need at least 2 groups");
  const auto& c = spec.counts;
  if (c.train_pos + c.validation_pos + c.test_pos < 1 ||
      c.train_neg + c.validation_neg + c.test_neg < 1)
    throw ConfigError("synth_corpus: need at least one positive and one negative");
  if (c.train_pos < 0 || c.train_neg < 0 || c.validation_pos < 0 ||
      c.validation_neg < 0 || c.test_pos < 0 || c.test_neg < 0)
    throw ConfigError("synth_corpus: counts must be non-negative");
  if (spec.clip_seconds < kEvalWindowSeconds)
    throw ConfigError("synth_corpus: clips must be at least 1.5 s");
  if (spec.speakers_per_group < 1)
    throw ConfigError("synth_corpus: speakers_per_group must be >= 1");
}

namespace detail {

/// Enveloped tone burst with one octave harmonic.
inline void add_tone(std::vector<double>& x, double freq_hz, double t0,
                     double t1, double amp, double phase) {
  const int sr = kPipelineSampleRate;
  const int i0 = std::max(0, static_cast<int>(t0 * sr));
  const int i1 = std::min(static_cast<int>(x.size()), static_cast<int>(t1 * sr));
  const int ramp = sr / 100;  // 10 ms attack/decay
  for (int i = i0; i < i1; ++i) {
    double env = 1.0;
    if (i - i0 < ramp) env = static_cast<double>(i - i0) / ramp;
    if (i1 - i < ramp) env = std::min(env, static_cast<double>(i1 - i) / ramp);
    const double t = static_cast<double>(i) / sr;
    x[static_cast<std::size_t>(i)] +=
        amp * env *
        (std::sin(2.0 * kPi * freq_hz * t + phase) +
         0.4 * std::sin(2.0 * kPi * 2.0 * freq_hz * t + 1.3 * phase));
  }
}

struct SynthClip {
  Waveform wave;
  std::optional<double> event_start_s;
  std::optional<double> event_end_s;
  std::string sound_type = "speech";
};

/// Wake motif: tone at the group F0, then tone at the group band frequency.
inline SynthClip synth_positive(const SynthGroup& g, const SynthSpec& spec,
                                Pcg32& rng) {
  SynthClip clip;
  clip.wave.sample_rate = kPipelineSampleRate;
  const auto n = static_cast<std::size_t>(spec.clip_seconds * kPipelineSampleRate);
  clip.wave.samples.assign(n, 0.0);
  const double level = spec.noise_level * rng.uniform(1.0 / spec.snr_jitter,
                                                      spec.snr_jitter);
  for (auto& s : clip.wave.samples) s = level * rng.normal();

  const double offset = rng.uniform(0.1, spec.clip_seconds - 1.3);
  const double jitter1 = rng.uniform(0.98, 1.02);
  const double jitter2 = rng.uniform(0.98, 1.02);
  const double amp = rng.uniform(spec.amp_min, spec.amp_max);
  add_tone(clip.wave.samples, g.f0_hz * jitter1, offset + 0.05, offset + 0.45,
           amp, rng.uniform(0.0, 2.0 * kPi));
  add_tone(clip.wave.samples, g.band_hz * jitter2, offset + 0.55, offset + 0.95,
           0.8 * amp, rng.uniform(0.0, 2.0 * kPi));
  clip.event_start_s = offset;
  clip.event_end_s = offset + 1.0;
  return clip;
}

/// Negatives cycle through single tones, noise bursts, and two near-miss
/// motifs (reversed order, detuned second tone).
inline SynthClip synth_negative(const SynthGroup& g, const SynthSpec& spec,
                                int variant, Pcg32& rng) {
  SynthClip clip;
  clip.wave.sample_rate = kPipelineSampleRate;
  const auto n = static_cast<std::size_t>(spec.clip_seconds * kPipelineSampleRate);
  clip.wave.samples.assign(n, 0.0);
  const double level = spec.noise_level * rng.uniform(1.0 / spec.snr_jitter,
                                                      spec.snr_jitter);
  for (auto& s : clip.wave.samples) s = level * rng.normal();

  const double offset = rng.uniform(0.1, spec.clip_seconds - 1.3);
  const double jitter1 = rng.uniform(0.98, 1.02);
  const double jitter2 = rng.uniform(0.98, 1.02);
  const double amp = rng.uniform(spec.amp_min, spec.amp_max);
  switch (variant % 4) {
    case 0:  // single tone at the group carrier
      add_tone(clip.wave.samples, g.f0_hz * jitter1, offset + 0.05,
               offset + 0.45, amp, rng.uniform(0.0, 2.0 * kPi));
      break;
    case 1: {  // noise burst
      const int sr = kPipelineSampleRate;
      const int i0 = static_cast<int>((offset + 0.05) * sr);
      const int i1 = static_cast<int>((offset + 0.95) * sr);
      for (int i = i0; i < i1 && i < static_cast<int>(n); ++i)
        clip.wave.samples[static_cast<std::size_t>(i)] += 0.5 * amp * rng.normal();
      clip.sound_type = "noise";
      break;
    }
    case 2:  // near miss: tones in reversed order
      add_tone(clip.wave.samples, g.band_hz * jitter2, offset + 0.05,
               offset + 0.45, 0.8 * amp, rng.uniform(0.0, 2.0 * kPi));
      add_tone(clip.wave.samples, g.f0_hz * jitter1, offset + 0.55,
               offset + 0.95, amp, rng.uniform(0.0, 2.0 * kPi));
      break;
    default:  // near miss: detuned second tone
      add_tone(clip.wave.samples, g.f0_hz * jitter1, offset + 0.05,
               offset + 0.45, amp, rng.uniform(0.0, 2.0 * kPi));
      add_tone(clip.wave.samples, g.band_hz * spec.detune_factor * jitter2, offset + 0.55,
               offset + 0.95, 0.8 * amp, rng.uniform(0.0, 2.0 * kPi));
      break;
  }
  return clip;
}

}  // namespace detail

/// Generates WAVs plus a manifest under out_dir; fully reproducible from
/// (spec, seed). Returns the manifest path.
inline std::filesystem::path synth_corpus(const SynthSpec& spec,
                                          const std::filesystem::path& out_dir) {
  validate_synth_spec(spec);
  const std::filesystem::path audio_dir = out_dir / "audio";
  std::filesystem::create_directories(audio_dir);

  std::vector<Utterance> rows;
  std::uint64_t counter = 0;
  const char* splits[3] = {"train", "validation", "test"};

  for (const auto& group : spec.groups) {
    int speaker_cursor = 0;
    for (int s = 0; s < 3; ++s) {
      const int n_pos = s == 0   ? spec.counts.train_pos
                        : s == 1 ? spec.counts.validation_pos
                                 : spec.counts.test_pos;
      const int n_neg = s == 0   ? spec.counts.train_neg
                        : s == 1 ? spec.counts.validation_neg
                                 : spec.counts.test_neg;
      for (int polarity = 0; polarity < 2; ++polarity) {
        const int count = polarity == 0 ? n_pos : n_neg;
        for (int k = 0; k < count; ++k) {
          Pcg32 rng(derive_stream(spec.seed, ++counter));
          const detail::SynthClip clip =
              polarity == 0 ? detail::synth_positive(group, spec, rng)
                            : detail::synth_negative(group, spec, k, rng);

          Utterance u;
          char name[160];
          std::snprintf(name, sizeof(name), "%s_%s_%s_%03d", group.label.c_str(),
                        splits[s], polarity == 0 ? "pos" : "neg", k);
          u.id = name;
          u.audio_path = "audio/" + u.id + ".wav";
          u.label = polarity == 0 ? "wuw" : "unknown";
          u.sound_type = clip.sound_type;
          u.speaker_id =
              group.label + "_spk" +
              std::to_string(speaker_cursor++ % spec.speakers_per_group);
          u.sex = group.sex;
          u.age_group = group.age_group;
          u.accent = group.accent;
          u.split = splits[s];
          u.event_start_s = clip.event_start_s;
          u.event_end_s = clip.event_end_s;
          write_wav(out_dir / u.audio_path, clip.wave);
          rows.push_back(std::move(u));
        }
      }
    }
  }

  for (int k = 0; k < spec.n_noise_files; ++k) {
    Pcg32 rng(derive_stream(spec.seed, 0xa0157000ULL + static_cast<std::uint64_t>(k)));
    Waveform noise;
    noise.sample_rate = kPipelineSampleRate;
    noise.samples.resize(2 * kPipelineSampleRate);
    for (auto& s : noise.samples) s = 0.25 * rng.normal();
    Utterance u;
    u.id = "noise_res_" + std::to_string(k);
    u.audio_path = "audio/" + u.id + ".wav";
    u.sound_type = "noise";
    u.split = "train";
    write_wav(out_dir / u.audio_path, noise);
    rows.push_back(std::move(u));
  }

  for (int k = 0; k < spec.n_rir_files; ++k) {
    Pcg32 rng(derive_stream(spec.seed, 0x717000ULL + static_cast<std::uint64_t>(k)));
    Waveform rir;
    rir.sample_rate = kPipelineSampleRate;
    rir.samples.assign(1280, 0.0);  // 80 ms tail
    rir.samples[0] = 1.0;
    for (std::size_t i = 1; i < rir.samples.size(); ++i) {
      const double t = static_cast<double>(i) / kPipelineSampleRate;
      rir.samples[i] = 0.25 * std::exp(-t / 0.03) * rng.normal();
    }
    Utterance u;
    u.id = "rir_" + std::to_string(k);
    u.audio_path = "audio/" + u.id + ".wav";
    u.sound_type = "noise";
    u.role = "rir";
    u.split = "train";
    write_wav(out_dir / u.audio_path, rir);
    rows.push_back(std::move(u));
  }

  const std::filesystem::path manifest_path = out_dir / "manifest.jsonl";
  save_manifest(manifest_path, rows);
  return manifest_path;
}

}  // namespace fairwake
